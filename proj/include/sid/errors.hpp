#pragma once

#include <stdexcept>
#include <string>

namespace sid {

// Error hierarchy; each type names the failure the caller can act on.
struct SidError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlacementFailure : SidError {
    using SidError::SidError;
};
struct HorizonTooShort : SidError {
    using SidError::SidError;
};
struct HorizonMismatch : SidError {
    using SidError::SidError;
};
struct DimensionMismatch : SidError {
    using SidError::SidError;
};
struct ConflictingPins : SidError {
    using SidError::SidError;
};
struct StepOutOfRange : SidError {
    using SidError::SidError;
};
struct EmptyDataset : SidError {
    using SidError::SidError;
};
struct NonFiniteLoss : SidError {
    using SidError::SidError;
};
struct NonFiniteIterate : SidError {
    using SidError::SidError;
};
struct SnapFailure : SidError {
    using SidError::SidError;
};
struct NonMonotonePath : SidError {
    using SidError::SidError;
};
struct NoPlan : SidError {
    using SidError::SidError;
};
struct NotInfeasible : SidError {
    using SidError::SidError;
};
struct EpisodeFailure : SidError {
    using SidError::SidError;
};

}  // namespace sid
