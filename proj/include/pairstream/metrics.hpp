#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pairstream/learner.hpp"
#include "pairstream/losses.hpp"

namespace pairstream {

/// Exact Wilcoxon-Mann-Whitney statistic: fraction of (pos, neg) pairs with
/// score_pos > score_neg, ties counted 1/2. O(n log n) via sorting.
/// Throws on single-class input.
double auc(const std::vector<double>& scores, const std::vector<double>& labels);

/// Regularized batch minimizer over the mapped space:
///   argmin_w sum_{t=2..T} L_t(w) + (lambda/2) ||w||^2.
/// Found by full-batch first-order descent until the gradient norm is
/// <= tol: conjugate directions for the squared surrogate (whose gradient
/// uses class-conditional prefix sums, algebraically identical to the
/// pair-by-pair sum), diminishing-step subgradient descent for the hinge
/// (where the chosen subgradient can stay nonzero at the minimizer, so the
/// best iterate is returned once the objective stabilizes). Throws on
/// non-convergence within the iteration cap, carrying the last gradient
/// norm.
Eigen::VectorXd batch_comparator(const std::vector<MappedExample>& stream,
                                 PairLossKind kind, double lambda,
                                 double tol = 1e-6, long max_iters = 50000);

struct RegretPoint {
  long t = 0;
  double loss_model = 0.0;       // L_t(w_{t-1})
  double loss_comparator = 0.0;  // L_t(w*)
  double cum_regret = 0.0;
};

struct RegretTrace {
  std::vector<RegretPoint> points;
  double final_regret = 0.0;
};

/// Cumulative regret against w*, evaluated at the trajectory's snapshot
/// steps. With stride-1 snapshots the sum is exact; on a decimated grid
/// each evaluated term is weighted by the step stride.
RegretTrace regret(const Trajectory& traj,
                   const std::vector<MappedExample>& stream,
                   const Eigen::VectorXd& wstar, PairLossKind kind);

struct VarianceReport {
  long t = 0;
  double v_stratified = 0.0;
  double v_uniform = 0.0;
  bool certificate_ok = false;  // v_stratified <= v_uniform + 1e-12
};

/// Exact trace-covariance of the two gradient estimators at step t:
/// the single-uniform-sample estimator over the whole history, and the
/// stratified estimator with one uniform representative per cluster,
/// weights |C_j|/(t-1). `partition[i]` is the stratum of history example i.
VarianceReport exact_variance(PairLossKind kind, const Eigen::VectorXd& w,
                              const MappedExample& zt,
                              const std::vector<MappedExample>& history,
                              const std::vector<int>& partition);

enum class SamplingScheme { UniformWithinStratum, FifoLast };

/// Monte-Carlo trace-covariance of the stratified estimator, resampling the
/// buffer contents n_samples times. FifoLast is deterministic (variance 0).
double mc_variance(PairLossKind kind, const Eigen::VectorXd& w,
                   const MappedExample& zt,
                   const std::vector<MappedExample>& history,
                   const std::vector<int>& partition, SamplingScheme scheme,
                   long n_samples, std::uint64_t seed);

}  // namespace pairstream
