#include "cefac/paillier.hpp"

#include <cmath>

namespace cefac::paillier {

namespace {

constexpr int kPrimeRounds = 40;
constexpr int kMaxAttempts = 20000;

mpz_class random_prime(unsigned bits, Rng& rng) {
    if (bits < 2) throw PrimeGenerationFailure("prime size too small");
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        mpz_class candidate = rng.bits(bits);
        // Force the top bit so the product has the requested size, and odd.
        mpz_setbit(candidate.get_mpz_t(), bits - 1);
        mpz_setbit(candidate.get_mpz_t(), 0);
        if (mpz_probab_prime_p(candidate.get_mpz_t(), kPrimeRounds) > 0) {
            return candidate;
        }
    }
    throw PrimeGenerationFailure("no prime found within the attempt budget");
}

// L(x) = (x - 1) / b; defined on x = 1 mod b.
mpz_class paillier_l(const mpz_class& x, const mpz_class& b) { return (x - 1) / b; }

}  // namespace

Keypair keygen(unsigned bit_length, Rng& rng, GeneratorChoice gen) {
    if (bit_length < 16) {
        throw PrimeGenerationFailure("key size below 16 bits not supported");
    }
    const unsigned half = bit_length / 2;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        mpz_class p = random_prime(half, rng);
        mpz_class q = random_prime(bit_length - half, rng);
        if (p == q) continue;
        mpz_class b = p * q;
        mpz_class totient = (p - 1) * (q - 1);
        mpz_class gcd;
        mpz_gcd(gcd.get_mpz_t(), b.get_mpz_t(), totient.get_mpz_t());
        if (gcd != 1) continue;

        mpz_class lambda;
        mpz_lcm(lambda.get_mpz_t(), mpz_class(p - 1).get_mpz_t(), mpz_class(q - 1).get_mpz_t());
        mpz_class b2 = b * b;

        mpz_class g;
        if (gen == GeneratorChoice::BPlusOne) {
            g = b + 1;
        } else {
            g = rng.below(b2 - 1) + 1;
            mpz_class d;
            mpz_gcd(d.get_mpz_t(), g.get_mpz_t(), b2.get_mpz_t());
            if (d != 1) continue;
        }

        mpz_class g_lambda;
        mpz_powm(g_lambda.get_mpz_t(), g.get_mpz_t(), lambda.get_mpz_t(), b2.get_mpz_t());
        mpz_class l_value = paillier_l(g_lambda, b);
        mpz_class mu;
        if (mpz_invert(mu.get_mpz_t(), l_value.get_mpz_t(), b.get_mpz_t()) == 0) {
            continue;  // g unusable; retry
        }
        return Keypair{PublicKey{b, g, b2}, PrivateKey{lambda, mu}};
    }
    throw PrimeGenerationFailure("key generation exhausted its attempt budget");
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& plaintext, Rng& rng) {
    if (plaintext < 0 || plaintext >= pk.b) {
        throw PlaintextOutOfRange("plaintext must lie in [0, b)");
    }
    mpz_class r;
    mpz_class gcd;
    do {
        r = rng.below(pk.b - 1) + 1;
        mpz_gcd(gcd.get_mpz_t(), r.get_mpz_t(), pk.b.get_mpz_t());
    } while (gcd != 1);

    mpz_class gm, rb;
    mpz_powm(gm.get_mpz_t(), pk.g.get_mpz_t(), plaintext.get_mpz_t(), pk.b_squared.get_mpz_t());
    mpz_powm(rb.get_mpz_t(), r.get_mpz_t(), pk.b.get_mpz_t(), pk.b_squared.get_mpz_t());
    mpz_class c = (gm * rb) % pk.b_squared;
    return Ciphertext{c, 0};
}

mpz_class decrypt(const Keypair& kp, const Ciphertext& c) {
    const mpz_class& b2 = kp.pub.b_squared;
    if (c.value <= 0 || c.value >= b2) {
        throw InvalidCiphertext("ciphertext outside Z*_{b^2}");
    }
    mpz_class gcd;
    mpz_gcd(gcd.get_mpz_t(), c.value.get_mpz_t(), b2.get_mpz_t());
    if (gcd != 1) {
        throw InvalidCiphertext("ciphertext shares a factor with the modulus");
    }
    mpz_class powed;
    mpz_powm(powed.get_mpz_t(), c.value.get_mpz_t(), kp.priv.lambda.get_mpz_t(), b2.get_mpz_t());
    mpz_class m = (paillier_l(powed, kp.pub.b) * kp.priv.mu) % kp.pub.b;
    return m;
}

Ciphertext homomorphic_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
    return Ciphertext{(a.value * b.value) % pk.b_squared, a.key_id};
}

long encode_weight(double w) {
    if (!(w >= 0.0) || !(w <= 1.0)) {
        throw WeightOutOfRange("privacy weight must lie in [0,1]");
    }
    const double scaled = w * static_cast<double>(kWeightScale);
    long v = static_cast<long>(std::floor(scaled));
    // Quantized weights must round-trip exactly; absorb one-ulp dips below an
    // integer boundary before truncating.
    if (scaled - static_cast<double>(v) > 1.0 - 1e-9) v += 1;
    if (v > kWeightScale) v = kWeightScale;
    return v;
}

double decode_weight(long v) {
    if (v < 0 || v > kWeightScale) {
        throw WeightOutOfRange("encoded weight outside [0, 10^4]");
    }
    return static_cast<double>(v) / static_cast<double>(kWeightScale);
}

}  // namespace cefac::paillier
