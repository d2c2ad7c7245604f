#pragma once

#include <stdexcept>
#include <string>

namespace surrogate {

// Base of every error raised by the library. Each subclass names one failure
// mode so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SURROGATE_DEFINE_ERROR(Name)                   \
    class Name : public Error {                        \
    public:                                            \
        explicit Name(const std::string& what)         \
            : Error(std::string(#Name ": ") + what) {} \
    }

SURROGATE_DEFINE_ERROR(DomainError);
SURROGATE_DEFINE_ERROR(DegenerateConditionals);
SURROGATE_DEFINE_ERROR(InsufficientLabels);
SURROGATE_DEFINE_ERROR(InvalidSimplex);
SURROGATE_DEFINE_ERROR(ZeroMarginal);
SURROGATE_DEFINE_ERROR(SingleClassData);
SURROGATE_DEFINE_ERROR(NonFiniteLoss);
SURROGATE_DEFINE_ERROR(DimensionMismatch);
SURROGATE_DEFINE_ERROR(EmptyData);
SURROGATE_DEFINE_ERROR(InvalidSpec);
SURROGATE_DEFINE_ERROR(InsufficientData);
SURROGATE_DEFINE_ERROR(ConfigError);
SURROGATE_DEFINE_ERROR(IoError);
SURROGATE_DEFINE_ERROR(InvariantViolation);

#undef SURROGATE_DEFINE_ERROR

}  // namespace surrogate
