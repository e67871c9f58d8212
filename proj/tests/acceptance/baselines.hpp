#pragma once

// Example-1 regression baselines: max |y* - y| per output over 100 < k <= 400,
// frozen from the first green run (observed values in comments).

namespace baseline {

inline constexpr double kFirstOrder[2] = {0.020, 0.025};  // 0.0156, 0.0202
inline constexpr double kQuartic[2] = {0.020, 0.025};     // 0.0147, 0.0185
inline constexpr double kConstrained[2] = {0.28, 0.26};   // 0.224, 0.209

}  // namespace baseline
