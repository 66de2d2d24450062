#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "cefac/errors.hpp"

namespace cefac::paillier {

/// Deterministic randomness handle for key generation and encryption.
/// Distinct seeds give independent streams; the same seed replays exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(gmp_randinit_mt) {
        state_.seed(static_cast<unsigned long>(seed));
    }
    gmp_randclass& raw() { return state_; }

    /// Uniform integer in [0, bound).
    mpz_class below(const mpz_class& bound) { return state_.get_z_range(bound); }
    /// Uniform integer with `bits` random bits.
    mpz_class bits(unsigned long n_bits) { return state_.get_z_bits(n_bits); }

private:
    gmp_randclass state_;
};

struct PublicKey {
    mpz_class b;          // modulus p*q
    mpz_class g;          // generator in Z*_{b^2}
    mpz_class b_squared;  // cached b^2

    bool operator==(const PublicKey& o) const { return b == o.b && g == o.g; }
};

struct PrivateKey {
    mpz_class lambda;  // lcm(p-1, q-1)
    mpz_class mu;      // (L(g^lambda mod b^2))^-1 mod b
};

struct Keypair {
    PublicKey pub;
    PrivateKey priv;
};

struct Ciphertext {
    mpz_class value;           // in Z*_{b^2}
    std::uint32_t key_id = 0;  // which directory key encrypted this

    bool operator==(const Ciphertext&) const = default;
};

/// How the generator g is chosen: b+1 (always valid, mu = lambda^-1 mod b) or
/// a random element of Z*_{b^2} validated through the mu-existence check.
enum class GeneratorChoice { BPlusOne, Random };

/// Key generation per the standard scheme: primes p, q with
/// gcd(pq, (p-1)(q-1)) = 1, b = pq, lambda = lcm(p-1, q-1).
/// bit_length is the approximate size of b; at least 16 bits. Keys at this
/// size are for tests and demos only — real deployments need >= 2048 bits.
Keypair keygen(unsigned bit_length, Rng& rng, GeneratorChoice gen = GeneratorChoice::BPlusOne);

/// c = g^m * r^b mod b^2 with fresh r coprime to b. Requires 0 <= m < b.
Ciphertext encrypt(const PublicKey& pk, const mpz_class& plaintext, Rng& rng);

/// m = L(c^lambda mod b^2) * mu mod b, L(x) = (x-1)/b.
mpz_class decrypt(const Keypair& kp, const Ciphertext& c);

/// Product of ciphertexts mod b^2: decrypts to the sum of the plaintexts.
Ciphertext homomorphic_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

/// Fixed-point convention for privacy weights: w in [0,1] is carried as
/// floor(w * 10^4), i.e. four decimal digits.
constexpr long kWeightScale = 10000;

long encode_weight(double w);
double decode_weight(long v);

}  // namespace cefac::paillier
