#pragma once
// Bundled reference step pairs (4-decimal published coordinates). Rounding
// can push the budget products a hair above 1, so these load with a relaxed
// budget tolerance.

#include "obliq/stepfn.hpp"

namespace obliq {

inline constexpr double kPresetBudgetEps = 1e-3;

// Available n: 4, 5, 6, 7, 8, 9, 13.
GhPair reference_pair(int n);
bool has_reference_pair(int n);

// Expected certified ratios for the reference pairs.
double reference_ratio(int n);

}  // namespace obliq
