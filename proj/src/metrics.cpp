#include "pairstream/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pairstream/rng.hpp"

namespace pairstream {

double auc(const std::vector<double>& scores,
           const std::vector<double>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: scores/labels size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  double pos_total = 0, neg_total = 0;
  for (double y : labels) (y > 0 ? pos_total : neg_total) += 1.0;
  if (pos_total == 0 || neg_total == 0)
    throw std::invalid_argument("auc undefined: single-class input");

  // walk score groups; each positive beats all lower-scored negatives and
  // half-ties with equal-scored ones
  double wins = 0.0, neg_below = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    double group_pos = 0, group_neg = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] > 0 ? group_pos : group_neg) += 1.0;
      ++j;
    }
    wins += group_pos * neg_below + 0.5 * group_pos * group_neg;
    neg_below += group_neg;
    i = j;
  }
  return wins / (pos_total * neg_total);
}

namespace {

// naive all-pairs gradient of sum_t L_t(w) + (lambda/2)||w||^2
Eigen::VectorXd naive_objective_grad(const std::vector<MappedExample>& stream,
                                     PairLossKind kind,
                                     const Eigen::VectorXd& w, double lambda) {
  Eigen::VectorXd g = lambda * w;
  for (std::size_t t = 2; t <= stream.size(); ++t) {
    const double coef = 1.0 / static_cast<double>(t - 1);
    for (std::size_t i = 0; i + 1 < t; ++i)
      g += coef * loss_grad(kind, w, stream[t - 1], stream[i]);
  }
  return g;
}

}  // namespace

Eigen::VectorXd batch_comparator(const std::vector<MappedExample>& stream,
                                 PairLossKind kind, double lambda, double tol,
                                 long max_iters) {
  if (stream.size() < 2)
    throw std::invalid_argument("batch_comparator: need at least 2 examples");
  const Eigen::Index D = stream[0].r.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(D);

  if (kind == PairLossKind::SquaredAuc) {
    // The objective is quadratic; fold the pair sums into
    //   grad = H w - 2 b,  H = 2 A + lambda I
    // using class-conditional prefix sums over the stream.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(D, D);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(D);
    Eigen::VectorXd sum_pos = Eigen::VectorXd::Zero(D),
                    sum_neg = Eigen::VectorXd::Zero(D);
    Eigen::MatrixXd outer_pos = Eigen::MatrixXd::Zero(D, D),
                    outer_neg = Eigen::MatrixXd::Zero(D, D);
    double n_pos = 0, n_neg = 0;
    for (std::size_t t = 1; t <= stream.size(); ++t) {
      const MappedExample& zt = stream[t - 1];
      if (t >= 2) {
        const bool pos = zt.label > 0;
        const double n_opp = pos ? n_neg : n_pos;
        if (n_opp > 0) {
          const Eigen::VectorXd& s_opp = pos ? sum_neg : sum_pos;
          const Eigen::MatrixXd& m_opp = pos ? outer_neg : outer_pos;
          const double coef = 1.0 / static_cast<double>(t - 1);
          A.noalias() += coef * (n_opp * zt.r * zt.r.transpose() -
                                 zt.r * s_opp.transpose() -
                                 s_opp * zt.r.transpose() + m_opp);
          const double yhat = pos ? 1.0 : -1.0;
          b += coef * yhat * (n_opp * zt.r - s_opp);
        }
      }
      if (zt.label > 0) {
        n_pos += 1.0;
        sum_pos += zt.r;
        outer_pos.noalias() += zt.r * zt.r.transpose();
      } else {
        n_neg += 1.0;
        sum_neg += zt.r;
        outer_neg.noalias() += zt.r * zt.r.transpose();
      }
    }
    const Eigen::MatrixXd H =
        2.0 * A + lambda * Eigen::MatrixXd::Identity(D, D);

    // conjugate directions instead of plain steepest descent: the Hessian
    // can be badly conditioned for small lambda, where exact-line-search
    // descent stalls; CG reaches the same stopping rule in <= D steps.
    // The residual r equals -gradient throughout.
    Eigen::VectorXd r = 2.0 * b - H * w;
    Eigen::VectorXd p = r;
    double rs = r.squaredNorm();
    double gnorm = std::sqrt(rs);
    for (long it = 0; it < max_iters; ++it) {
      if (gnorm <= tol) return w;
      const Eigen::VectorXd Hp = H * p;
      const double curvature = p.dot(Hp);
      if (curvature <= 0.0) break;  // direction in the null space
      const double alpha = rs / curvature;
      w += alpha * p;
      if ((it + 1) % 64 == 0)
        r = 2.0 * b - H * w;  // periodic refresh against drift
      else
        r -= alpha * Hp;
      const double rs_new = r.squaredNorm();
      p = r + (rs_new / rs) * p;
      rs = rs_new;
      gnorm = std::sqrt(rs);
    }
    // lambda = 0 leaves H singular and CG can stagnate at the numerical
    // floor of the consistent system; finish via the pseudo-inverse
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    Eigen::VectorXd coef = eig.eigenvectors().transpose() * (2.0 * b);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      coef[i] = ev[i] > cutoff ? coef[i] / ev[i] : 0.0;
    w = eig.eigenvectors() * coef;
    gnorm = (H * w - 2.0 * b).norm();
    if (gnorm <= tol) return w;
    throw std::runtime_error(
        "batch_comparator did not converge; last gradient norm " +
        std::to_string(gnorm));
  }

  // hinge: subgradient descent with a diminishing step. The particular
  // subgradient chosen (zero at the kink) need not vanish at the minimizer,
  // so convergence is also declared once the best objective stabilizes,
  // returning the best iterate seen.
  auto objective = [&](const Eigen::VectorXd& v) {
    double obj = 0.5 * lambda * v.squaredNorm();
    for (std::size_t t = 2; t <= stream.size(); ++t) {
      const double coef = 1.0 / static_cast<double>(t - 1);
      for (std::size_t i = 0; i + 1 < t; ++i)
        obj += coef * loss_value(kind, v, stream[t - 1], stream[i]);
    }
    return obj;
  };
  Eigen::VectorXd best_w = w;
  double best_obj = objective(w);
  long stalled = 0;
  double gnorm = 0.0;
  for (long it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd g = naive_objective_grad(stream, kind, w, lambda);
    gnorm = g.norm();
    if (gnorm <= tol) return w;
    const double step = lambda > 0.0
                            ? 1.0 / (lambda * static_cast<double>(it + 1))
                            : 0.1 / std::sqrt(static_cast<double>(it + 1));
    w -= step * g;
    const double obj = objective(w);
    if (obj < best_obj - 1e-12 * (1.0 + std::abs(best_obj))) {
      best_obj = obj;
      best_w = w;
      stalled = 0;
    } else if (++stalled > 500) {
      return best_w;
    }
  }
  throw std::runtime_error(
      "batch_comparator did not converge; last gradient norm " +
      std::to_string(gnorm));
}

RegretTrace regret(const Trajectory& traj,
                   const std::vector<MappedExample>& stream,
                   const Eigen::VectorXd& wstar, PairLossKind kind) {
  if (traj.snapshots.empty())
    throw std::invalid_argument("regret: trajectory has no model snapshots");
  RegretTrace trace;
  double cum = 0.0;
  long prev_t = 1;
  for (const auto& [t, w] : traj.snapshots) {
    if (t < 2 || static_cast<std::size_t>(t) > stream.size())
      throw std::invalid_argument("regret: snapshot step outside stream");
    const std::vector<MappedExample> history(stream.begin(),
                                             stream.begin() + (t - 1));
    const MappedExample& zt = stream[t - 1];
    RegretPoint p;
    p.t = t;
    p.loss_model = full_loss(kind, w, zt, history);
    p.loss_comparator = full_loss(kind, wstar, zt, history);
    const double stride = static_cast<double>(t - prev_t);
    cum += stride * (p.loss_model - p.loss_comparator);
    p.cum_regret = cum;
    trace.points.push_back(p);
    prev_t = t;
  }
  trace.final_regret = cum;
  return trace;
}

VarianceReport exact_variance(PairLossKind kind, const Eigen::VectorXd& w,
                              const MappedExample& zt,
                              const std::vector<MappedExample>& history,
                              const std::vector<int>& partition) {
  if (history.empty())
    throw std::invalid_argument("exact_variance: empty history");
  if (partition.size() != history.size())
    throw std::invalid_argument("exact_variance: partition does not cover history");

  const std::size_t n = history.size();
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(n);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(w.size());
  for (const auto& zi : history) {
    grads.push_back(loss_grad(kind, w, zt, zi));
    mean += grads.back();
  }
  mean /= static_cast<double>(n);

  VarianceReport report;
  report.t = static_cast<long>(n) + 1;
  for (const auto& g : grads)
    report.v_uniform += (g - mean).squaredNorm();
  report.v_uniform /= static_cast<double>(n);

  const int n_clusters =
      *std::max_element(partition.begin(), partition.end()) + 1;
  std::vector<std::vector<std::size_t>> members(n_clusters);
  for (std::size_t i = 0; i < n; ++i) {
    if (partition[i] < 0)
      throw std::invalid_argument("exact_variance: negative stratum index");
    members[partition[i]].push_back(i);
  }
  for (const auto& cluster : members) {
    if (cluster.empty()) continue;
    Eigen::VectorXd cmean = Eigen::VectorXd::Zero(w.size());
    for (std::size_t i : cluster) cmean += grads[i];
    cmean /= static_cast<double>(cluster.size());
    double var = 0.0;
    for (std::size_t i : cluster) var += (grads[i] - cmean).squaredNorm();
    var /= static_cast<double>(cluster.size());
    const double weight =
        static_cast<double>(cluster.size()) / static_cast<double>(n);
    report.v_stratified += weight * weight * var;
  }
  report.certificate_ok = report.v_stratified <= report.v_uniform + 1e-12;
  return report;
}

double mc_variance(PairLossKind kind, const Eigen::VectorXd& w,
                   const MappedExample& zt,
                   const std::vector<MappedExample>& history,
                   const std::vector<int>& partition, SamplingScheme scheme,
                   long n_samples, std::uint64_t seed) {
  if (n_samples < 2)
    throw std::invalid_argument("mc_variance: n_samples must be >= 2");
  if (partition.size() != history.size())
    throw std::invalid_argument("mc_variance: partition does not cover history");

  const std::size_t n = history.size();
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(n);
  for (const auto& zi : history) grads.push_back(loss_grad(kind, w, zt, zi));

  const int n_clusters =
      *std::max_element(partition.begin(), partition.end()) + 1;
  std::vector<std::vector<std::size_t>> members(n_clusters);
  for (std::size_t i = 0; i < n; ++i) members[partition[i]].push_back(i);

  Rng rng(seed);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(w.size());
  double sum_sq = 0.0;
  for (long s = 0; s < n_samples; ++s) {
    Eigen::VectorXd est = Eigen::VectorXd::Zero(w.size());
    for (const auto& cluster : members) {
      if (cluster.empty()) continue;
      std::size_t pick;
      if (scheme == SamplingScheme::UniformWithinStratum) {
        pick = cluster[rng.below(cluster.size())];
      } else {
        pick = cluster.back();  // most recent member, as FIFO keeps it
      }
      const double weight =
          static_cast<double>(cluster.size()) / static_cast<double>(n);
      est += weight * grads[pick];
    }
    sum += est;
    sum_sq += est.squaredNorm();
  }
  const Eigen::VectorXd m = sum / static_cast<double>(n_samples);
  const double var =
      (sum_sq - static_cast<double>(n_samples) * m.squaredNorm()) /
      static_cast<double>(n_samples - 1);
  return std::max(0.0, var);
}

}  // namespace pairstream
