#pragma once

#include <span>

namespace pinch {

/// Gaussian tail probability Q(t) = P(Z > t), Z ~ N(0, 1).
double q_function(double t);

/// log Q(t), accurate far into both tails (no underflow for large t).
double log_q_function(double t);

/// log P(lo <= Z < hi) for a standard normal Z. Returns -inf for empty intervals.
double log_gaussian_interval(double lo, double hi);

/// log(sum(exp(v))) over the given log-terms; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> log_terms);

/// Pairwise (cascade) summation; keeps error O(log n) ulps for terms of mixed magnitude.
double pairwise_sum(std::span<const double> terms);

}  // namespace pinch
