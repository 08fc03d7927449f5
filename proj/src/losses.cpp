#include "pairstream/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace pairstream {

namespace {
void check_dims(const Eigen::VectorXd& w, const MappedExample& z,
                const MappedExample& zp) {
  if (w.size() != z.r.size() || w.size() != zp.r.size())
    throw std::invalid_argument("pair loss: dimension mismatch");
}
}  // namespace

double loss_value(PairLossKind kind, const Eigen::VectorXd& w,
                  const MappedExample& z, const MappedExample& zp) {
  check_dims(w, z, zp);
  const double yhat = (z.label - zp.label) / 2.0;
  if (yhat == 0.0) return 0.0;
  const double margin = 1.0 - yhat * w.dot(z.r - zp.r);
  switch (kind) {
    case PairLossKind::SquaredAuc:
      return margin * margin;
    case PairLossKind::HingeAuc:
      return std::max(0.0, margin);
  }
  throw std::invalid_argument("unknown loss kind");
}

Eigen::VectorXd loss_grad(PairLossKind kind, const Eigen::VectorXd& w,
                          const MappedExample& z, const MappedExample& zp) {
  check_dims(w, z, zp);
  const double yhat = (z.label - zp.label) / 2.0;
  if (yhat == 0.0) return Eigen::VectorXd::Zero(w.size());
  const Eigen::VectorXd delta = z.r - zp.r;
  const double margin = 1.0 - yhat * w.dot(delta);
  switch (kind) {
    case PairLossKind::SquaredAuc:
      return (-2.0 * yhat * margin) * delta;
    case PairLossKind::HingeAuc:
      if (margin > 0.0) return (-yhat) * delta;
      return Eigen::VectorXd::Zero(w.size());
  }
  throw std::invalid_argument("unknown loss kind");
}

Eigen::VectorXd weighted_grad(PairLossKind kind, const Eigen::VectorXd& w,
                              const MappedExample& zt,
                              const WeightedReps& reps) {
  double wsum = 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (const auto& [rep, weight] : reps) {
    g += weight * loss_grad(kind, w, zt, *rep);
    wsum += weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("weighted_grad: weights do not sum to 1");
  return g;
}

double weighted_loss(PairLossKind kind, const Eigen::VectorXd& w,
                     const MappedExample& zt, const WeightedReps& reps) {
  double value = 0.0;
  for (const auto& [rep, weight] : reps)
    value += weight * loss_value(kind, w, zt, *rep);
  return value;
}

Eigen::VectorXd buffer_grad(PairLossKind kind, const Eigen::VectorXd& w,
                            const MappedExample& zt, const StrataBuffer& buffer,
                            long t) {
  return weighted_grad(kind, w, zt, buffer.weights(t));
}

Eigen::VectorXd full_grad(PairLossKind kind, const Eigen::VectorXd& w,
                          const MappedExample& zt,
                          const std::vector<MappedExample>& history) {
  if (history.empty()) throw std::invalid_argument("full_grad: empty history");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (const auto& zi : history) g += loss_grad(kind, w, zt, zi);
  return g / static_cast<double>(history.size());
}

double full_loss(PairLossKind kind, const Eigen::VectorXd& w,
                 const MappedExample& zt,
                 const std::vector<MappedExample>& history) {
  if (history.empty()) throw std::invalid_argument("full_loss: empty history");
  double value = 0.0;
  for (const auto& zi : history) value += loss_value(kind, w, zt, zi);
  return value / static_cast<double>(history.size());
}

Eigen::VectorXd regularized_direction(const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& w, double lambda) {
  if (lambda < 0.0)
    throw std::invalid_argument("regularized_direction: lambda must be >= 0");
  return v + lambda * w;
}

}  // namespace pairstream
