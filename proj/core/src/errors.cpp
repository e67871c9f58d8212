#include "mfac/errors.hpp"

namespace mfac {

NumericError::NumericError(const std::string& what, long argument_index)
    : Error(argument_index >= 0 ? what + " (argument " + std::to_string(argument_index) + ")"
                                : what),
      argument_index_(argument_index) {}

RankDeficiencyError::RankDeficiencyError(long rank, long required)
    : Error("leading input block has rank " + std::to_string(rank) + ", need " +
            std::to_string(required) + " with zero weighting"),
      rank_(rank),
      required_(required) {}

}  // namespace mfac
