#pragma once

#include <stdexcept>
#include <string>

namespace cefac {

// Base class for every domain error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define CEFAC_DEFINE_ERROR(name)                     \
    struct name : Error {                            \
        using Error::Error;                          \
    }

// evidence
CEFAC_DEFINE_ERROR(InvalidFrame);
CEFAC_DEFINE_ERROR(InvalidMass);
CEFAC_DEFINE_ERROR(DegenerateMass);
CEFAC_DEFINE_ERROR(TotalConflict);
CEFAC_DEFINE_ERROR(FrameMismatch);
CEFAC_DEFINE_ERROR(SubnormalInput);
CEFAC_DEFINE_ERROR(IndexOutOfRange);
CEFAC_DEFINE_ERROR(NonpositiveTau);

// credibility
CEFAC_DEFINE_ERROR(EmptyInput);
CEFAC_DEFINE_ERROR(ZeroSupport);
CEFAC_DEFINE_ERROR(NoConvergence);

// digraph
CEFAC_DEFINE_ERROR(InvalidNode);
CEFAC_DEFINE_ERROR(EmptySubset);
CEFAC_DEFINE_ERROR(ExplainedLimit);

// paillier
CEFAC_DEFINE_ERROR(PrimeGenerationFailure);
CEFAC_DEFINE_ERROR(PlaintextOutOfRange);
CEFAC_DEFINE_ERROR(InvalidCiphertext);
CEFAC_DEFINE_ERROR(WeightOutOfRange);

// protocol
CEFAC_DEFINE_ERROR(WeightDecodeFailure);
CEFAC_DEFINE_ERROR(MissingLocalRecord);
CEFAC_DEFINE_ERROR(EmptyNormalSet);
CEFAC_DEFINE_ERROR(ProtocolViolation);

// harness / cli
CEFAC_DEFINE_ERROR(ConfigInvalid);
CEFAC_DEFINE_ERROR(BadParams);

#undef CEFAC_DEFINE_ERROR

}  // namespace cefac
