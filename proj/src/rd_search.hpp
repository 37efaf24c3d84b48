#pragma once
// Annealed search for the two rate-distortion specializations.

#include "coopcomp/regions.hpp"

namespace coopcomp::detail {

/// min I(X,Y;T,W) under both distortion budgets. With `full_cooperation`
/// false, T - X - Y and W depends on (T,Y) (the T=U form); otherwise T is
/// constant and W depends on (X,Y) (the U=X, V constant form).
SumRateResult minimize_rd_sum_rate(const JointPmf& base, const RdConstraint& rd, bool full_cooperation,
                                   const SearchConfig& cfg);

}  // namespace coopcomp::detail
