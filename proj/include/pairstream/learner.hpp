#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pairstream/dataio.hpp"
#include "pairstream/losses.hpp"
#include "pairstream/rff.hpp"
#include "pairstream/strata.hpp"

namespace pairstream {

struct Model {
  Eigen::VectorXd w;  // starts at 0, length D
  double eta = 0.1;
  double lambda = 0.0;
  long t = 1;
};

enum class AlgoMode { Fpogd, YangFifo1, KarReservoir, FullPairs };
enum class EtaSchedule { Constant, InvSqrtT };

struct RunConfig {
  AlgoMode mode = AlgoMode::Fpogd;
  double epsilon = 0.1;
  long s_max = LONG_MAX;
  BufferPolicy policy = BufferPolicy::Fifo;
  EtaSchedule eta_schedule = EtaSchedule::Constant;
  double eta = 0.1;
  double lambda = 0.0;
  double gamma = 0.0;        // 0 -> 1/d at resolution time
  int feature_count = 0;     // 0 -> rff_count(T, regime)
  RffRegime regime = RffRegime::Default;
  double poly_decay_c = 1.0;
  PairLossKind loss = PairLossKind::SquaredAuc;
  bool stratify_by_label = true;
  double centroid_step = 0.1;
  bool running_mean_centroid = false;
  int kar_slots = 4;
  std::uint64_t map_seed = 1;
  std::uint64_t buffer_seed = 2;
  std::uint64_t stream_seed = 3;
  long snapshot_every = 0;   // 0 -> no model snapshots
  bool keep_mapped = false;  // retain the mapped stream in the result
};

/// Baseline presets per the buffer-policy equivalences: YangFifo1 is a
/// single FIFO stratum (epsilon past the mapped-space squared diameter),
/// FullPairs keeps every example its own stratum (epsilon 0, no cap),
/// KarReservoir switches to the stream-wide reservoir path.
RunConfig resolve_mode(RunConfig cfg);

struct StepRecord {
  long t = 0;
  double loss = 0.0;  // suffered loss g_t(w_{t-1})
  long kappa = 0;
  double wall_ms = 0.0;
};

struct Trajectory {
  std::vector<StepRecord> records;
  std::vector<std::pair<long, Eigen::VectorXd>> snapshots;  // (t, w_{t-1})
};

struct RunResult {
  Model model;
  Trajectory trajectory;
  std::vector<MappedExample> mapped;       // when keep_mapped
  std::vector<int> membership;             // stratum of each past example
  long final_kappa = 0;
};

/// One FPOGD step: map, suffer the weighted buffer loss at w_{t-1}, take
/// the regularized gradient step, then let the buffer absorb z_t.
StepRecord fpogd_step(Model& model, StrataBuffer& buffer, const FourierMap& fm,
                      const Example& incoming, long t, PairLossKind kind);

/// Drive the full online pass. The first stream example initializes the
/// buffer; steps run for t = 2..T. With EtaSchedule::InvSqrtT the step
/// size is 1/sqrt(T), fixed from the known stream length.
RunResult run(const std::vector<Example>& stream, const RunConfig& cfg,
              const FourierMap& fm);

/// Convenience: resolve gamma/D from the config, sample the map, run.
RunResult run(const std::vector<Example>& stream, const RunConfig& cfg, int dim);

/// Score (w^T r(x)) for every example; used for AUC evaluation.
std::vector<double> score_examples(const Model& model, const FourierMap& fm,
                                   const std::vector<Example>& examples);

struct GridCell {
  double eta = 0.0;
  double lambda = 0.0;
  double mean_auc = 0.0;
  std::vector<double> fold_aucs;
};

struct GridSearchResult {
  RunConfig best;
  double best_mean_auc = 0.0;
  std::vector<GridCell> table;
};

/// k-fold CV over an (eta, lambda) grid; argmax of mean test AUC, ties
/// broken by smaller lambda then smaller eta.
GridSearchResult grid_search(const Dataset& data, const RunConfig& base,
                             const std::vector<double>& etas,
                             const std::vector<double>& lambdas, int k,
                             std::uint64_t seed);

}  // namespace pairstream
