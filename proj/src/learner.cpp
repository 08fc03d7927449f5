#include "pairstream/learner.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pairstream/metrics.hpp"

namespace pairstream {

RunConfig resolve_mode(RunConfig cfg) {
  switch (cfg.mode) {
    case AlgoMode::Fpogd:
    case AlgoMode::KarReservoir:
      break;
    case AlgoMode::YangFifo1:
      // one stratum (per label key): epsilon past the squared diameter 4
      cfg.epsilon = 10.0;
      cfg.policy = BufferPolicy::Fifo;
      cfg.s_max = LONG_MAX;
      break;
    case AlgoMode::FullPairs:
      cfg.epsilon = 0.0;
      cfg.s_max = LONG_MAX;
      break;
  }
  return cfg;
}

StepRecord fpogd_step(Model& model, StrataBuffer& buffer, const FourierMap& fm,
                      const Example& incoming, long t, PairLossKind kind) {
  const auto start = std::chrono::steady_clock::now();
  const MappedExample zt = map_example(fm, incoming);
  const auto reps = buffer.weights(t);
  StepRecord rec;
  rec.t = t;
  rec.loss = weighted_loss(kind, model.w, zt, reps);
  rec.kappa = buffer.size();
  const Eigen::VectorXd g = weighted_grad(kind, model.w, zt, reps);
  const Eigen::VectorXd v = regularized_direction(g, model.w, model.lambda);
  model.w -= model.eta * v;
  model.t = t;
  buffer.absorb(zt);
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

RunResult run(const std::vector<Example>& stream, const RunConfig& cfg_in,
              const FourierMap& fm) {
  if (stream.size() < 2)
    throw std::invalid_argument("run: stream length must be >= 2");
  const RunConfig cfg = resolve_mode(cfg_in);
  const long T = static_cast<long>(stream.size());

  Model model;
  model.w = Eigen::VectorXd::Zero(fm.feature_count);
  model.lambda = cfg.lambda;
  model.eta = cfg.eta_schedule == EtaSchedule::InvSqrtT
                  ? 1.0 / std::sqrt(static_cast<double>(T))
                  : cfg.eta;

  RunResult out;
  out.trajectory.records.reserve(T - 1);

  StrataOptions sopt;
  sopt.epsilon = cfg.epsilon;
  sopt.max_strata = cfg.s_max;
  sopt.policy = cfg.policy;
  sopt.centroid_step = cfg.centroid_step;
  sopt.running_mean_centroid = cfg.running_mean_centroid;
  sopt.stratify_by_label = cfg.stratify_by_label;
  sopt.seed = cfg.buffer_seed;

  StrataBuffer buffer(sopt);
  KarReservoir kar(static_cast<std::size_t>(cfg.kar_slots), cfg.buffer_seed);
  const bool use_kar = cfg.mode == AlgoMode::KarReservoir;

  const MappedExample first = map_example(fm, stream[0]);
  if (use_kar)
    kar.absorb(first);
  else
    buffer.init(first);
  if (cfg.keep_mapped) out.mapped.push_back(first);

  for (long t = 2; t <= T; ++t) {
    if (cfg.snapshot_every > 0 &&
        (t % cfg.snapshot_every == 0 || t == 2 || t == T))
      out.trajectory.snapshots.emplace_back(t, model.w);

    if (use_kar) {
      const auto start = std::chrono::steady_clock::now();
      const MappedExample zt = map_example(fm, stream[t - 1]);
      const auto reps = kar.weights();
      StepRecord rec;
      rec.t = t;
      rec.loss = weighted_loss(cfg.loss, model.w, zt, reps);
      rec.kappa = kar.size();
      Eigen::VectorXd g = Eigen::VectorXd::Zero(model.w.size());
      for (const auto& [rep, weight] : reps)
        g += weight * loss_grad(cfg.loss, model.w, zt, *rep);
      model.w -= model.eta * regularized_direction(g, model.w, model.lambda);
      model.t = t;
      kar.absorb(zt);
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      if (cfg.keep_mapped) out.mapped.push_back(zt);
      out.trajectory.records.push_back(rec);
    } else {
      // cluster-cap and partition invariants, checked in-loop
      if (buffer.size() > std::min<long>(t - 1, cfg.s_max))
        throw std::logic_error("cluster cap invariant violated at t=" +
                               std::to_string(t));
      if (buffer.total_count() != t - 1)
        throw std::logic_error("partition invariant violated at t=" +
                               std::to_string(t));
      out.trajectory.records.push_back(
          fpogd_step(model, buffer, fm, stream[t - 1], t, cfg.loss));
      if (cfg.keep_mapped) out.mapped.push_back(map_example(fm, stream[t - 1]));
    }

    if (model.w.norm() > 1e3)
      throw std::runtime_error("model norm blow-up at t=" + std::to_string(t));
  }

  if (!use_kar) {
    out.membership = buffer.membership();
    out.final_kappa = buffer.size();
  } else {
    out.final_kappa = kar.size();
  }
  out.model = std::move(model);
  return out;
}

RunResult run(const std::vector<Example>& stream, const RunConfig& cfg,
              int dim) {
  const long T = static_cast<long>(stream.size());
  const double gamma =
      cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(dim);
  const int D = cfg.feature_count > 0
                    ? cfg.feature_count
                    : rff_count(T, cfg.regime, cfg.poly_decay_c);
  const FourierMap fm = sample_map(dim, D, gamma, cfg.map_seed);
  return run(stream, cfg, fm);
}

std::vector<double> score_examples(const Model& model, const FourierMap& fm,
                                   const std::vector<Example>& examples) {
  std::vector<double> scores;
  scores.reserve(examples.size());
  for (const auto& ex : examples)
    scores.push_back(model.w.dot(map_example(fm, ex).r));
  return scores;
}

GridSearchResult grid_search(const Dataset& data, const RunConfig& base,
                             const std::vector<double>& etas,
                             const std::vector<double>& lambdas, int k,
                             std::uint64_t seed) {
  if (etas.empty() || lambdas.empty())
    throw std::invalid_argument("grid_search: empty grid");
  const auto folds = k_folds(data, k, seed);

  GridSearchResult out;
  bool have_best = false;
  for (double eta : etas) {
    for (double lambda : lambdas) {
      GridCell cell;
      cell.eta = eta;
      cell.lambda = lambda;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const Dataset train = subset(data, folds[f].train_ids);
        const Dataset test = subset(data, folds[f].test_ids);
        RunConfig cfg = base;
        cfg.eta = eta;
        cfg.lambda = lambda;
        cfg.stream_seed = base.stream_seed + f;
        cfg.map_seed = base.map_seed + f;
        const auto stream =
            order_stream(train, StreamOrder::iid_shuffle(cfg.stream_seed));
        const long T = static_cast<long>(stream.size());
        const double gamma =
            cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(data.dim);
        const int D = cfg.feature_count > 0
                          ? cfg.feature_count
                          : rff_count(T, cfg.regime, cfg.poly_decay_c);
        const FourierMap fm = sample_map(data.dim, D, gamma, cfg.map_seed);
        const RunResult res = run(stream, cfg, fm);
        std::vector<double> labels;
        labels.reserve(test.size());
        for (const auto& ex : test.examples) labels.push_back(ex.label);
        cell.fold_aucs.push_back(
            auc(score_examples(res.model, fm, test.examples), labels));
      }
      double sum = 0.0;
      for (double a : cell.fold_aucs) sum += a;
      cell.mean_auc = sum / static_cast<double>(cell.fold_aucs.size());
      out.table.push_back(cell);

      const bool better =
          !have_best || cell.mean_auc > out.best_mean_auc ||
          (cell.mean_auc == out.best_mean_auc &&
           (lambda < out.best.lambda ||
            (lambda == out.best.lambda && eta < out.best.eta)));
      if (better) {
        have_best = true;
        out.best = base;
        out.best.eta = eta;
        out.best.lambda = lambda;
        out.best_mean_auc = cell.mean_auc;
      }
    }
  }
  return out;
}

}  // namespace pairstream
