#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pairstream/rff.hpp"
#include "pairstream/strata.hpp"

namespace pairstream {

/// Pairwise AUC surrogates on mapped examples. Both vanish on same-label
/// pairs. With yhat = (y - y')/2 in {-1,0,+1} and delta = r - r':
///   squared: (1 - yhat w^T delta)^2, hinge: max(0, 1 - yhat w^T delta).
enum class PairLossKind { SquaredAuc, HingeAuc };

double loss_value(PairLossKind kind, const Eigen::VectorXd& w,
                  const MappedExample& z, const MappedExample& zp);

/// Gradient of loss_value w.r.t. w (subgradient 0 at the hinge kink).
Eigen::VectorXd loss_grad(PairLossKind kind, const Eigen::VectorXd& w,
                          const MappedExample& z, const MappedExample& zp);

using WeightedReps = std::vector<std::pair<const MappedExample*, double>>;

/// sum_j weight_j * loss_grad(w, z_t, rep_j); weights must sum to 1.
Eigen::VectorXd weighted_grad(PairLossKind kind, const Eigen::VectorXd& w,
                              const MappedExample& zt, const WeightedReps& reps);
double weighted_loss(PairLossKind kind, const Eigen::VectorXd& w,
                     const MappedExample& zt, const WeightedReps& reps);

/// The stratified stochastic gradient u_t: representatives weighted by
/// |C_j^t|/(t-1).
Eigen::VectorXd buffer_grad(PairLossKind kind, const Eigen::VectorXd& w,
                            const MappedExample& zt, const StrataBuffer& buffer,
                            long t);

/// (1/(t-1)) sum_{i<t} loss_grad(w, z_t, z_i) over the full history.
Eigen::VectorXd full_grad(PairLossKind kind, const Eigen::VectorXd& w,
                          const MappedExample& zt,
                          const std::vector<MappedExample>& history);

/// L_t(w): full-history average pairwise loss against z_t.
double full_loss(PairLossKind kind, const Eigen::VectorXd& w,
                 const MappedExample& zt,
                 const std::vector<MappedExample>& history);

/// v + lambda * w, the l2-regularized descent direction.
Eigen::VectorXd regularized_direction(const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& w, double lambda);

}  // namespace pairstream
