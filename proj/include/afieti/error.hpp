#pragma once

#include <stdexcept>
#include <string>

namespace afieti {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define AFIETI_DEFINE_ERROR(Name)            \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    };

AFIETI_DEFINE_ERROR(DomainError)
AFIETI_DEFINE_ERROR(ArgumentError)
AFIETI_DEFINE_ERROR(NotPositiveDefinite)
AFIETI_DEFINE_ERROR(SingularMatrix)
AFIETI_DEFINE_ERROR(NumericalFailure)
AFIETI_DEFINE_ERROR(SingularGeometry)
AFIETI_DEFINE_ERROR(GeometryMismatch)
AFIETI_DEFINE_ERROR(ApproximationDomainError)
AFIETI_DEFINE_ERROR(ScalingError)
AFIETI_DEFINE_ERROR(RedundantConstraints)
AFIETI_DEFINE_ERROR(RigidModeError)
AFIETI_DEFINE_ERROR(ConfigError)
AFIETI_DEFINE_ERROR(ParseError)

#undef AFIETI_DEFINE_ERROR

}  // namespace afieti
