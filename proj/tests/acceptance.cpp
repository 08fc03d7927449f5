// Acceptance suite: one line per criterion, exit 3 on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <vector>

#include "pairstream/harness.hpp"
#include "pairstream/learner.hpp"
#include "pairstream/metrics.hpp"
#include "pairstream/rng.hpp"

using namespace pairstream;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok,
            const std::string& detail) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << idx << " ("
            << name << "): " << detail << "\n";
  if (!ok) ++failures;
}

void skip(int idx, const std::string& name, const std::string& detail) {
  std::cout << "[SKIP] criterion " << idx << " (" << name << "): " << detail
            << "\n";
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> pow_grid(double base, int lo, int hi) {
  std::vector<double> v;
  for (int e = lo; e <= hi; ++e) v.push_back(std::pow(base, e));
  return v;
}

// ---- criterion 1: diabetes AUC reproduction -------------------------------

void criterion_diabetes(const std::filesystem::path& root) {
  const std::string name = "diabetes auc";
  const std::filesystem::path path = root / "data" / "diabetes.libsvm";
  if (!std::filesystem::exists(path)) {
    // informational stand-in so the grid machinery still gets exercised
    const Dataset synth = synthetic_mixture(300, 1);
    RunConfig base;
    const auto gs = grid_search(synth, base, {0.125, 0.25}, {1e-4, 1e-2}, 3, 1);
    skip(1, name,
         "data/diabetes.libsvm not present in this environment; grid "
         "machinery verified on synthetic data instead (best mean AUC " +
             std::to_string(gs.best_mean_auc) +
             "). Place the LIBSVM diabetes file at data/diabetes.libsvm to "
             "enable this check.");
    return;
  }
  Dataset data = normalize(binarize_labels(parse_libsvm_file(path.string())));
  RunConfig base;  // gamma -> 1/d, D -> rff_count(T, default), squared loss
  const auto gs =
      grid_search(data, base, pow_grid(2.0, -8, -1), pow_grid(10.0, -8, -1), 3, 1);
  const double pct = 100.0 * gs.best_mean_auc;
  report(1, name, std::abs(pct - 81.91) <= 3.0,
         "best mean test AUC " + std::to_string(pct) +
             "%, target 81.91 +/- 3.0");
}

// ---- criterion 2: kernel-error scaling ------------------------------------

void criterion_kernel_scaling() {
  const int d = 20;
  const double gamma = 1.0 / d;
  Rng rng(2024);
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 2 * 10000; ++i) {
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v[j] = rng.gaussian();
    v.normalize();
    xs.push_back(v);
  }
  auto median_err = [&](int D) {
    const FourierMap fm = sample_map(d, D, gamma, 7);
    std::vector<double> errs;
    errs.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
      const Eigen::VectorXd& x = xs[2 * i];
      const Eigen::VectorXd& y = xs[2 * i + 1];
      errs.push_back(
          std::abs(approx_kernel(fm, x, y) - gauss_kernel(x, y, gamma)));
    }
    return median(errs);
  };
  const double m256 = median_err(256);
  const double m4096 = median_err(4096);
  report(2, "kernel-error scaling", m4096 <= 0.5 * m256,
         "median error D=4096 " + std::to_string(m4096) + " vs 0.5 * D=256 " +
             std::to_string(0.5 * m256));
}

// ---- criterion 3: unbiasedness oracle -------------------------------------

void criterion_unbiasedness() {
  const Dataset data = synthetic_mixture(40, 11);
  const auto stream = order_stream(data, StreamOrder::iid_shuffle(11));
  const int D = 16;
  const FourierMap fm = sample_map(data.dim, D, 0.5, 13);
  std::vector<MappedExample> mapped;
  for (const auto& ex : stream) mapped.push_back(map_example(fm, ex));

  Rng rng(301);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const long t = 5 + static_cast<long>(rng.below(26));  // 5..30
    StrataOptions o;
    o.epsilon = 0.3;
    StrataBuffer buf(o);
    buf.init(mapped[0]);
    for (long i = 1; i < t - 1; ++i) buf.absorb(mapped[i]);

    Eigen::VectorXd w(D);
    for (int i = 0; i < D; ++i) w[i] = 0.5 * rng.gaussian();
    const MappedExample& zt = mapped[t - 1];

    // cluster membership from the buffer's own record
    const auto& part = buf.membership();
    const int k = buf.size();
    std::vector<std::vector<long>> members(k);
    for (long i = 0; i < t - 1; ++i) members[part[i]].push_back(i);

    // enumerate every combination of one representative per stratum
    std::vector<std::size_t> pick(k, 0);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(D);
    double total_prob = 0.0;
    while (true) {
      Eigen::VectorXd est = Eigen::VectorXd::Zero(D);
      double prob = 1.0;
      for (int j = 0; j < k; ++j) {
        const double wj = static_cast<double>(members[j].size()) /
                          static_cast<double>(t - 1);
        est += wj * loss_grad(PairLossKind::SquaredAuc, w, zt,
                              mapped[members[j][pick[j]]]);
        prob /= static_cast<double>(members[j].size());
      }
      expect += prob * est;
      total_prob += prob;
      int j = 0;
      while (j < k && ++pick[j] == members[j].size()) pick[j++] = 0;
      if (j == k) break;
    }
    if (std::abs(total_prob - 1.0) > 1e-9) {
      report(3, "unbiasedness oracle", false, "enumeration probabilities");
      return;
    }
    std::vector<MappedExample> history(mapped.begin(),
                                       mapped.begin() + (t - 1));
    const Eigen::VectorXd full =
        full_grad(PairLossKind::SquaredAuc, w, zt, history);
    const double rel = (expect - full).norm() / (full.norm() + 1e-300);
    worst = std::max(worst, rel);
  }
  report(3, "unbiasedness oracle", worst <= 1e-10,
         "worst relative error " + std::to_string(worst) + " over 50 draws");
}

// ---- criterion 4: variance certificate ------------------------------------

void criterion_variance() {
  const long T = 2000;
  const Dataset data = synthetic_mixture(T, 4);
  const auto stream = order_stream(data, StreamOrder::iid_shuffle(4));
  RunConfig cfg;
  cfg.epsilon = 0.3;
  cfg.eta = 0.05;
  cfg.feature_count = 32;
  cfg.snapshot_every = 100;
  cfg.keep_mapped = true;
  const RunResult res = run(stream, cfg, data.dim);

  long checkpoints = 0, cert_ok = 0, rich = 0;
  double sum_strat = 0.0, sum_unif = 0.0;
  for (const auto& [t, w] : res.trajectory.snapshots) {
    const std::vector<MappedExample> history(res.mapped.begin(),
                                             res.mapped.begin() + (t - 1));
    const std::vector<int> partition(res.membership.begin(),
                                     res.membership.begin() + (t - 1));
    const auto rep = exact_variance(PairLossKind::SquaredAuc, w,
                                    res.mapped[t - 1], history, partition);
    ++checkpoints;
    if (rep.certificate_ok) ++cert_ok;
    const long kappa =
        *std::max_element(partition.begin(), partition.end()) + 1;
    if (kappa >= 4) {
      ++rich;
      sum_strat += rep.v_stratified;
      sum_unif += rep.v_uniform;
    }
  }
  const bool all_ok = cert_ok == checkpoints;
  const bool reduced = rich > 0 && sum_strat <= 0.8 * sum_unif;
  report(4, "variance certificate", all_ok && reduced,
         "certificate ok at " + std::to_string(cert_ok) + "/" +
             std::to_string(checkpoints) + " checkpoints; mean ratio " +
             std::to_string(rich > 0 ? (sum_strat / rich) / (sum_unif / rich)
                                     : -1.0) +
             " over " + std::to_string(rich) +
             " checkpoints with kappa >= 4 (target <= 0.8)");
}

// ---- criterion 5: regret sublinearity -------------------------------------

double avg_regret(long T, std::uint64_t seed) {
  const Dataset data = synthetic_mixture(T, seed);
  const auto stream = order_stream(data, StreamOrder::iid_shuffle(seed));
  RunConfig cfg;
  cfg.epsilon = 0.3;
  cfg.eta_schedule = EtaSchedule::InvSqrtT;
  cfg.lambda = 1e-3;
  cfg.gamma = 2.0;  // sharper kernel keeps the mixture well separated
  cfg.feature_count = 64;
  cfg.snapshot_every = T <= 2000 ? 1 : (T + 499) / 500;
  cfg.keep_mapped = true;
  cfg.map_seed = seed * 31 + 1;
  cfg.buffer_seed = seed * 31 + 2;
  const RunResult res = run(stream, cfg, data.dim);
  const Eigen::VectorXd wstar =
      batch_comparator(res.mapped, cfg.loss, cfg.lambda);
  const RegretTrace trace =
      regret(res.trajectory, res.mapped, wstar, cfg.loss);
  return trace.final_regret / static_cast<double>(T);
}

void criterion_regret() {
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double r1 = avg_regret(1000, seed);
    const double r4 = avg_regret(4000, seed);
    ratios.push_back(r4 / r1);
  }
  const double med = median(ratios);
  report(5, "regret sublinearity", med <= 0.6,
         "median R(4000)/4000 over R(1000)/1000 ratio " + std::to_string(med) +
             " across 5 seeds (target <= 0.6)");
}

// ---- criterion 6: baseline equivalences -----------------------------------

void criterion_equivalences() {
  const Dataset data = synthetic_mixture(200, 6);
  const auto stream = order_stream(data, StreamOrder::iid_shuffle(6));
  RunConfig yang;
  yang.mode = AlgoMode::YangFifo1;
  yang.eta = 0.05;
  yang.feature_count = 32;
  RunConfig manual = yang;
  manual.mode = AlgoMode::Fpogd;
  manual.epsilon = 10.0;
  manual.policy = BufferPolicy::Fifo;
  manual.s_max = LONG_MAX;
  const RunResult a = run(stream, yang, data.dim);
  const RunResult b = run(stream, manual, data.dim);
  const bool bitwise = a.model.w == b.model.w;

  RunConfig full = yang;
  full.mode = AlgoMode::FullPairs;
  const RunResult f = run(stream, full, data.dim);
  bool kappa_ok = true;
  for (const auto& rec : f.trajectory.records)
    if (rec.kappa != rec.t - 1) kappa_ok = false;

  report(6, "baseline equivalences", bitwise && kappa_ok,
         std::string("epsilon=10 fpogd vs yang_fifo1 bit-identical: ") +
             (bitwise ? "yes" : "no") +
             "; full_pairs kappa_t = t-1 at every step: " +
             (kappa_ok ? "yes" : "no"));
}

// ---- criterion 7: cluster-bound invariant ---------------------------------

void criterion_cluster_bound() {
  // the per-step cap/partition invariants are asserted inside run(); every
  // run above would have thrown on a violation. Here the closed form.
  Rng rng(700);
  bool ok = true;
  for (int i = 0; i < 100 && ok; ++i) {
    const double R = 0.1 + 2.9 * rng.uniform();
    const double eps = 0.01 + 3.99 * rng.uniform();
    const int d = 1 + static_cast<int>(rng.below(8));
    const long t = 2 + static_cast<long>(rng.below(1000000));
    long direct;
    const double p = std::pow(R / eps, static_cast<double>(d));
    if (!std::isfinite(p) || p >= static_cast<double>(t - 1))
      direct = t - 1;
    else
      direct = std::max<long>(1, static_cast<long>(std::ceil(p)));
    if (max_clusters_bound(R, eps, d, t) != std::min<long>(direct, t - 1))
      ok = false;
  }
  report(7, "cluster-bound invariant", ok,
         "in-loop kappa cap asserted in all runs above; closed form matches "
         "direct evaluation on 100 random (R, eps, d, t)");
}

// ---- criterion 8: gradient correctness ------------------------------------

void criterion_gradient() {
  Rng rng(800);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 6;
    MappedExample a, b;
    a.r = Eigen::VectorXd(d);
    b.r = Eigen::VectorXd(d);
    for (int i = 0; i < d; ++i) {
      a.r[i] = rng.gaussian();
      b.r[i] = rng.gaussian();
    }
    a.r.normalize();
    b.r.normalize();
    a.label = 1.0;
    b.label = -1.0;
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w[i] = rng.gaussian();

    const Eigen::VectorXd g = loss_grad(PairLossKind::SquaredAuc, w, a, b);
    const double h = 1e-6;
    Eigen::VectorXd fd(d);
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      fd[i] = (loss_value(PairLossKind::SquaredAuc, wp, a, b) -
               loss_value(PairLossKind::SquaredAuc, wm, a, b)) /
              (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / (1.0 + fd.norm()));
  }
  report(8, "gradient correctness", worst <= 1e-6,
         "worst relative error vs central differences " +
             std::to_string(worst) + " over 1000 instances");
}

// ---- criterion 9: feature-map normalization -------------------------------

void criterion_normalization() {
  Rng rng(900);
  double worst = 0.0;
  for (int m = 0; m < 100; ++m) {
    const FourierMap fm = sample_map(8, 32, 0.4, 9000 + m);
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd x(8);
      for (int j = 0; j < 8; ++j) x[j] = rng.gaussian();
      worst = std::max(worst,
                       std::abs(map_point(fm, x).squaredNorm() - 1.0));
    }
  }
  report(9, "feature-map normalization", worst <= 1e-12,
         "max |  ||r(x)||^2 - 1 | = " + std::to_string(worst) +
             " over 100000 draws");
}

// ---- criterion 10: reservoir uniformity -----------------------------------

void criterion_reservoir() {
  const int n = 8;
  const long trials = 100000;
  std::vector<long> hits(n, 0);
  for (long trial = 0; trial < trials; ++trial) {
    StrataOptions o;
    o.epsilon = 100.0;
    o.policy = BufferPolicy::Reservoir;
    o.stratify_by_label = false;
    o.seed = static_cast<std::uint64_t>(trial) + 1;
    StrataBuffer buf(o);
    for (int i = 0; i < n; ++i) {
      MappedExample z;
      z.r = Eigen::VectorXd::Zero(2);
      z.r[0] = 1.0 - 0.01 * i;
      z.r[1] = 0.01 * i;
      z.label = 1.0;
      z.id = i;
      if (i == 0)
        buf.init(z);
      else
        buf.absorb(z);
    }
    ++hits[buf.strata()[0].rep.id];
  }
  bool freq_ok = true;
  double worst_dev = 0.0;
  for (long h : hits) {
    const double dev = std::abs(static_cast<double>(h) / trials - 0.125);
    worst_dev = std::max(worst_dev, dev);
    if (dev > 0.005) freq_ok = false;
  }
  const double expect = static_cast<double>(trials) / n;
  double chi2 = 0.0;
  for (long h : hits) chi2 += (h - expect) * (h - expect) / expect;
  // 7 dof, p = 0.01 critical value
  const bool chi_ok = chi2 < 18.475;
  report(10, "reservoir uniformity", freq_ok && chi_ok,
         "worst frequency deviation " + std::to_string(worst_dev) +
             " (tol 0.005), chi-square " + std::to_string(chi2) +
             " (7 dof, crit 18.475)");
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path root = argc > 1 ? argv[1] : ".";
  try {
    criterion_diabetes(root);
    criterion_kernel_scaling();
    criterion_unbiasedness();
    criterion_variance();
    criterion_regret();
    criterion_equivalences();
    criterion_cluster_bound();
    criterion_gradient();
    criterion_normalization();
    criterion_reservoir();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance aborted: " << e.what() << "\n";
    return 3;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 3;
  }
  std::cout << "all criteria satisfied\n";
  return 0;
}
