#pragma once

#include <stdexcept>
#include <string>

namespace hoigs {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define HOIGS_DEFINE_ERROR(Name)                                          \
    struct Name : Error {                                                 \
        explicit Name(const std::string& msg = #Name) : Error(msg) {}     \
    }

HOIGS_DEFINE_ERROR(EmptyPointSet);
HOIGS_DEFINE_ERROR(PointBehindCamera);
HOIGS_DEFINE_ERROR(DegenerateProjection);
HOIGS_DEFINE_ERROR(OutOfRangeTime);
HOIGS_DEFINE_ERROR(DimensionMismatch);
HOIGS_DEFINE_ERROR(ShapeMismatch);
HOIGS_DEFINE_ERROR(MalformedSkeleton);
HOIGS_DEFINE_ERROR(EmptyPart);
HOIGS_DEFINE_ERROR(NotScalarLoss);
HOIGS_DEFINE_ERROR(NonFiniteValue);
HOIGS_DEFINE_ERROR(PartitionMismatch);
HOIGS_DEFINE_ERROR(InvalidConfig);
HOIGS_DEFINE_ERROR(InsufficientData);
HOIGS_DEFINE_ERROR(DivergedLoss);
HOIGS_DEFINE_ERROR(ImageTooSmall);

#undef HOIGS_DEFINE_ERROR

} // namespace hoigs
