#include "pairstream/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pairstream/metrics.hpp"

namespace pairstream {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// CSV cell for a measurement; absent values are written empty, never 0
std::string cell(double v) {
  if (!std::isfinite(v))
    throw std::runtime_error("refusing to write non-finite value to CSV");
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open output file: " + path.string());
  return out;
}

void write_meta(const ExperimentConfig& cfg,
                const std::filesystem::path& dir,
                const std::vector<std::pair<std::string, std::string>>& extra) {
  auto out = open_output(dir / "meta.txt");
  out << "command=" << cfg.command << "\n";
  out << "prng=" << Rng::kName << "\n";
  for (const auto& [k, v] : cfg.raw.values()) out << k << "=" << v << "\n";
  for (const auto& [k, v] : extra) out << k << "=" << v << "\n";
}

}  // namespace

KeyValueConfig KeyValueConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  KeyValueConfig kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("bad config line " + std::to_string(line_no) + ": " +
                        line);
    kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": " + it->second);
  }
}

long KeyValueConfig::get_long(const std::string& key, long def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean value for " + key + ": " + v);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return {};
  return split(it->second, ',');
}

AlgoMode parse_mode(const std::string& name) {
  if (name == "fpogd") return AlgoMode::Fpogd;
  if (name == "yang_fifo1") return AlgoMode::YangFifo1;
  if (name == "kar_reservoir") return AlgoMode::KarReservoir;
  if (name == "full_pairs") return AlgoMode::FullPairs;
  throw ConfigError("unknown mode: " + name);
}

std::string mode_name(AlgoMode mode) {
  switch (mode) {
    case AlgoMode::Fpogd: return "fpogd";
    case AlgoMode::YangFifo1: return "yang_fifo1";
    case AlgoMode::KarReservoir: return "kar_reservoir";
    case AlgoMode::FullPairs: return "full_pairs";
  }
  return "?";
}

namespace {

StreamOrder parse_stream(const std::string& spec) {
  if (spec == "iid") return StreamOrder::iid_shuffle(0);
  if (spec.rfind("sorted:", 0) == 0) {
    try {
      return StreamOrder::sorted_by_feature(std::stoi(spec.substr(7)));
    } catch (const std::exception&) {
      throw ConfigError("bad stream spec: " + spec);
    }
  }
  throw ConfigError("unknown stream spec: " + spec + " (iid | sorted:<j>)");
}

std::vector<double> default_etas() {
  std::vector<double> v;
  for (int e = -8; e <= -1; ++e) v.push_back(std::pow(2.0, e));
  return v;
}

std::vector<double> default_lambdas() {
  std::vector<double> v;
  for (int e = -8; e <= -1; ++e) v.push_back(std::pow(10.0, e));
  return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv,
                                        const std::string& command) {
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.raw = kv;
  cfg.dataset = kv.get_string("dataset", "");
  cfg.output_dir = kv.get_string("output_dir", "out");
  if (const char* env = std::getenv("PAIRSTREAM_OUTDIR"))
    if (!kv.has("output_dir")) cfg.output_dir = env;

  cfg.seeds.clear();
  for (const auto& s : kv.get_list("seeds")) {
    try {
      cfg.seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("bad seed: " + s);
    }
  }
  if (cfg.seeds.empty()) cfg.seeds = {1};

  cfg.stream_spec = kv.get_string("stream", "iid");
  cfg.stream_order = parse_stream(cfg.stream_spec);
  cfg.stream_order.seed = cfg.seeds[0];

  RunConfig& rc = cfg.run;
  rc.mode = parse_mode(kv.get_string("mode", "fpogd"));
  rc.epsilon = kv.get_double("epsilon", 0.1);
  rc.s_max = kv.get_long("s_max", LONG_MAX);
  const std::string policy = kv.get_string("policy", "fifo");
  if (policy == "fifo")
    rc.policy = BufferPolicy::Fifo;
  else if (policy == "reservoir")
    rc.policy = BufferPolicy::Reservoir;
  else
    throw ConfigError("unknown policy: " + policy);
  const std::string sched = kv.get_string("eta_schedule", "constant");
  if (sched == "constant")
    rc.eta_schedule = EtaSchedule::Constant;
  else if (sched == "inv_sqrt_t")
    rc.eta_schedule = EtaSchedule::InvSqrtT;
  else
    throw ConfigError("unknown eta_schedule: " + sched);
  rc.eta = kv.get_double("eta", 0.1);
  rc.lambda = kv.get_double("lambda", 0.0);
  rc.gamma = kv.get_double("gamma", 0.0);
  rc.feature_count = static_cast<int>(kv.get_long("features", 0));
  const std::string regime = kv.get_string("regime", "default");
  if (regime == "default")
    rc.regime = RffRegime::Default;
  else if (regime == "slow_decay")
    rc.regime = RffRegime::SlowDecay;
  else if (regime == "poly_decay")
    rc.regime = RffRegime::PolyDecay;
  else if (regime == "geometric")
    rc.regime = RffRegime::Geometric;
  else
    throw ConfigError("unknown regime: " + regime);
  rc.poly_decay_c = kv.get_double("poly_c", 1.0);
  const std::string loss = kv.get_string("loss", "squared_auc");
  if (loss == "squared_auc")
    rc.loss = PairLossKind::SquaredAuc;
  else if (loss == "hinge_auc")
    rc.loss = PairLossKind::HingeAuc;
  else
    throw ConfigError("unknown loss: " + loss);
  rc.stratify_by_label = kv.get_bool("stratify_by_label", true);
  rc.centroid_step = kv.get_double("centroid_step", 0.1);
  rc.running_mean_centroid = kv.get_bool("running_mean_centroid", false);
  rc.kar_slots = static_cast<int>(kv.get_long("kar_slots", 4));
  rc.map_seed = cfg.seeds[0] * 1000003 + 1;
  rc.buffer_seed = cfg.seeds[0] * 1000003 + 2;
  rc.stream_seed = cfg.seeds[0];

  cfg.folds = static_cast<int>(kv.get_long("folds", 3));
  cfg.max_examples = kv.get_long("T", 0);
  cfg.eval_every = kv.get_long("eval_every", 10);
  cfg.checkpoint_every = kv.get_long("checkpoint_every", 100);
  cfg.compute_regret = kv.get_bool("compute_regret", false);
  cfg.has_threshold = kv.has("binarize_threshold");
  cfg.binarize_threshold = kv.get_double("binarize_threshold", 0.0);
  cfg.binarize = kv.get_bool("binarize", true);
  cfg.modes = kv.get_list("modes");
  cfg.stream_variants = kv.get_list("stream_variants");
  for (const auto& d : kv.get_list("d_list")) {
    try {
      cfg.d_list.push_back(std::stoi(d));
    } catch (const std::exception&) {
      throw ConfigError("bad d_list entry: " + d);
    }
  }
  cfg.kernel_pairs = kv.get_long("kernel_pairs", 10000);
  cfg.kernel_dim = static_cast<int>(kv.get_long("kernel_dim", 20));
  cfg.kernel_with_auc = kv.get_bool("with_auc", false);
  for (const auto& e : kv.get_list("grid_etas"))
    cfg.grid_etas.push_back(std::stod(e));
  for (const auto& l : kv.get_list("grid_lambdas"))
    cfg.grid_lambdas.push_back(std::stod(l));
  if (cfg.grid_etas.empty()) cfg.grid_etas = default_etas();
  if (cfg.grid_lambdas.empty()) cfg.grid_lambdas = default_lambdas();
  return cfg;
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("missing config key: dataset");
  Dataset data;
  if (cfg.dataset.rfind("synthetic:", 0) == 0) {
    std::size_t n = 0;
    try {
      n = std::stoul(cfg.dataset.substr(10));
    } catch (const std::exception&) {
      throw ConfigError("bad synthetic dataset spec: " + cfg.dataset);
    }
    data = synthetic_mixture(n, cfg.seeds[0]);
  } else if (cfg.dataset == "-") {
    data = parse_libsvm(std::cin);
  } else {
    if (!std::filesystem::exists(cfg.dataset))
      throw ConfigError("dataset path does not exist: " + cfg.dataset);
    data = parse_libsvm_file(cfg.dataset);
  }
  if (cfg.binarize) {
    std::optional<double> th;
    if (cfg.has_threshold) th = cfg.binarize_threshold;
    data = binarize_labels(std::move(data), th);
  }
  return normalize(std::move(data));
}

namespace {

struct PreparedRun {
  Dataset train;
  Dataset test;
  std::vector<Example> stream;
};

PreparedRun prepare(const ExperimentConfig& cfg, const Dataset& data,
                    StreamOrder order) {
  PreparedRun p;
  const auto folds = k_folds(data, cfg.folds, cfg.seeds[0]);
  p.train = subset(data, folds[0].train_ids);
  p.test = subset(data, folds[0].test_ids);
  p.stream = order_stream(p.train, order);
  if (cfg.max_examples > 0 &&
      p.stream.size() > static_cast<std::size_t>(cfg.max_examples))
    p.stream.resize(cfg.max_examples);
  return p;
}

FourierMap make_map(const RunConfig& rc, int dim, long T) {
  const double gamma =
      rc.gamma > 0.0 ? rc.gamma : 1.0 / static_cast<double>(dim);
  const int D = rc.feature_count > 0 ? rc.feature_count
                                     : rff_count(T, rc.regime, rc.poly_decay_c);
  return sample_map(dim, D, gamma, rc.map_seed);
}

constexpr const char* kTraceHeader =
    "t,loss,cum_regret,auc_holdout,kappa,v_stratified,v_uniform,wall_ms";

}  // namespace

int cmd_run(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);

  const auto wall_start = std::chrono::steady_clock::now();
  const Dataset data = load_dataset(cfg);
  StreamOrder order = cfg.stream_order;
  PreparedRun p = prepare(cfg, data, order);

  RunConfig rc = cfg.run;
  rc.snapshot_every = cfg.eval_every;
  rc.keep_mapped = cfg.compute_regret;
  const FourierMap fm =
      make_map(rc, data.dim, static_cast<long>(p.stream.size()));
  const RunResult res = run(p.stream, rc, fm);

  std::vector<double> test_labels;
  for (const auto& ex : p.test.examples) test_labels.push_back(ex.label);

  RegretTrace rtrace;
  if (cfg.compute_regret) {
    const Eigen::VectorXd wstar =
        batch_comparator(res.mapped, rc.loss, rc.lambda);
    rtrace = regret(res.trajectory, res.mapped, wstar, rc.loss);
  }

  auto trace = open_output(dir / "trace.csv");
  trace << kTraceHeader << "\n";
  std::size_t rp = 0;
  for (const auto& [t, w] : res.trajectory.snapshots) {
    const StepRecord& rec = res.trajectory.records[t - 2];
    Model snap;
    snap.w = w;
    const double holdout_auc =
        auc(score_examples(snap, fm, p.test.examples), test_labels);
    std::string regret_cell;
    if (cfg.compute_regret) {
      while (rp < rtrace.points.size() && rtrace.points[rp].t < t) ++rp;
      if (rp < rtrace.points.size() && rtrace.points[rp].t == t)
        regret_cell = cell(rtrace.points[rp].cum_regret);
    }
    trace << t << ',' << cell(rec.loss) << ',' << regret_cell << ','
          << cell(holdout_auc) << ',' << rec.kappa << ",,,"
          << cell(rec.wall_ms) << "\n";
  }

  const double total_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - wall_start)
                              .count();
  const double final_auc =
      auc(score_examples(res.model, fm, p.test.examples), test_labels);

  auto summary = open_output(dir / "summary.csv");
  summary << "final_auc,wall_ms,kappa_T,T,D\n";
  summary << cell(final_auc) << ',' << cell(total_ms) << ','
          << res.final_kappa << ',' << p.stream.size() << ','
          << fm.feature_count << "\n";

  write_meta(cfg, dir,
             {{"resolved_gamma", cell(fm.gamma)},
              {"resolved_features", std::to_string(fm.feature_count)},
              {"resolved_eta", cell(res.model.eta)},
              {"stream_length", std::to_string(p.stream.size())},
              {"dataset_dim", std::to_string(data.dim)}});
  std::cout << "final_auc=" << final_auc << " kappa_T=" << res.final_kappa
            << " T=" << p.stream.size() << "\n";
  return 0;
}

int cmd_grid(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  const Dataset data = load_dataset(cfg);

  const GridSearchResult gs = grid_search(data, cfg.run, cfg.grid_etas,
                                          cfg.grid_lambdas, cfg.folds,
                                          cfg.seeds[0]);
  auto table = open_output(dir / "cv_table.csv");
  table << "eta,lambda,mean_auc";
  for (int f = 0; f < cfg.folds; ++f) table << ",auc_fold" << f;
  table << "\n";
  for (const auto& c : gs.table) {
    table << cell(c.eta) << ',' << cell(c.lambda) << ',' << cell(c.mean_auc);
    for (double a : c.fold_aucs) table << ',' << cell(a);
    table << "\n";
  }
  auto summary = open_output(dir / "summary.csv");
  summary << "best_eta,best_lambda,best_mean_auc\n";
  summary << cell(gs.best.eta) << ',' << cell(gs.best.lambda) << ','
          << cell(gs.best_mean_auc) << "\n";
  write_meta(cfg, dir,
             {{"best_eta", cell(gs.best.eta)},
              {"best_lambda", cell(gs.best.lambda)},
              {"best_mean_auc", cell(gs.best_mean_auc)}});
  std::cout << "best eta=" << gs.best.eta << " lambda=" << gs.best.lambda
            << " mean_auc=" << gs.best_mean_auc << "\n";
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
  if (cfg.modes.size() < 2)
    throw ConfigError("compare requires >= 2 entries in `modes`");
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  const Dataset data = load_dataset(cfg);

  std::vector<std::string> variants = cfg.stream_variants;
  if (variants.empty()) variants = {cfg.stream_spec};

  for (const auto& variant : variants) {
    StreamOrder order = parse_stream(variant);
    order.seed = cfg.seeds[0];
    if (order.kind == StreamOrder::Kind::SortedByFeature &&
        cfg.stream_order.kind == StreamOrder::Kind::SortedByFeature)
      order.feature = cfg.stream_order.feature;
    PreparedRun p = prepare(cfg, data, order);
    const std::string suffix =
        variants.size() > 1
            ? "_" + (variant.rfind("sorted", 0) == 0 ? std::string("sorted")
                                                     : variant)
            : "";

    RunConfig base = cfg.run;
    base.snapshot_every = cfg.checkpoint_every;
    base.keep_mapped = true;
    const FourierMap fm =
        make_map(base, data.dim, static_cast<long>(p.stream.size()));

    struct ModeResult {
      std::string name;
      RunResult res;
      RegretTrace rtrace;
      std::vector<VarianceReport> variance;  // empty for kar
    };
    std::vector<ModeResult> results;
    Eigen::VectorXd wstar;
    bool have_wstar = false;

    for (const auto& mname : cfg.modes) {
      RunConfig rc = base;
      rc.mode = parse_mode(mname);
      ModeResult mr;
      mr.name = mname;
      mr.res = run(p.stream, rc, fm);
      // shared stream seed: the mapped stream is identical across modes
      if (!have_wstar) {
        wstar = batch_comparator(mr.res.mapped, rc.loss, rc.lambda);
        have_wstar = true;
      }
      mr.rtrace = regret(mr.res.trajectory, mr.res.mapped, wstar, rc.loss);
      if (rc.mode != AlgoMode::KarReservoir) {
        for (const auto& [t, w] : mr.res.trajectory.snapshots) {
          const std::vector<MappedExample> history(
              mr.res.mapped.begin(), mr.res.mapped.begin() + (t - 1));
          const std::vector<int> partition(
              mr.res.membership.begin(), mr.res.membership.begin() + (t - 1));
          mr.variance.push_back(exact_variance(rc.loss, w,
                                               mr.res.mapped[t - 1], history,
                                               partition));
        }
      }
      results.push_back(std::move(mr));
    }

    // per-mode traces
    for (const auto& mr : results) {
      auto trace = open_output(dir / ("trace_" + mr.name + suffix + ".csv"));
      trace << kTraceHeader << "\n";
      for (std::size_t k = 0; k < mr.res.trajectory.snapshots.size(); ++k) {
        const long t = mr.res.trajectory.snapshots[k].first;
        const StepRecord& rec = mr.res.trajectory.records[t - 2];
        std::string vs, vu;
        if (!mr.variance.empty()) {
          vs = cell(mr.variance[k].v_stratified);
          vu = cell(mr.variance[k].v_uniform);
        }
        trace << t << ',' << cell(rec.loss) << ','
              << cell(mr.rtrace.points[k].cum_regret) << ",," << rec.kappa
              << ',' << vs << ',' << vu << ',' << cell(rec.wall_ms) << "\n";
      }
    }

    // joined comparison table
    auto joined = open_output(dir / ("compare" + suffix + ".csv"));
    joined << "t";
    for (const auto& mr : results)
      joined << ",regret_" << mr.name << ",v_stratified_" << mr.name
             << ",kappa_" << mr.name;
    joined << "\n";
    joined << "1";
    for (std::size_t m = 0; m < results.size(); ++m) joined << ",0,,";
    joined << "\n";
    const std::size_t rows = results[0].res.trajectory.snapshots.size();
    for (std::size_t k = 0; k < rows; ++k) {
      joined << results[0].res.trajectory.snapshots[k].first;
      for (const auto& mr : results) {
        joined << ',' << cell(mr.rtrace.points[k].cum_regret) << ',';
        if (!mr.variance.empty()) joined << cell(mr.variance[k].v_stratified);
        joined << ','
               << mr.res.trajectory
                      .records[mr.res.trajectory.snapshots[k].first - 2]
                      .kappa;
      }
      joined << "\n";
    }
  }

  write_meta(cfg, dir, {});
  return 0;
}

int cmd_kernel_check(const ExperimentConfig& cfg) {
  if (cfg.d_list.empty())
    throw ConfigError("kernel-check requires `d_list`");
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);

  const int d = cfg.kernel_dim;
  const double gamma =
      cfg.run.gamma > 0.0 ? cfg.run.gamma : 1.0 / static_cast<double>(d);

  auto out = open_output(dir / "kernel_check.csv");
  out << "D,median_err,p95_err,auc\n";
  for (int D : cfg.d_list) {
    const FourierMap fm = sample_map(d, D, gamma, cfg.seeds[0]);
    Rng rng(cfg.seeds[0] + 17);
    std::vector<double> errs;
    errs.reserve(cfg.kernel_pairs);
    for (long i = 0; i < cfg.kernel_pairs; ++i) {
      Eigen::VectorXd x[4];
      for (auto& v : x) {
        v.resize(d);
        for (int j = 0; j < d; ++j) v[j] = rng.gaussian();
        v.normalize();
      }
      const double exact = pairwise_kernel(x[0], x[1], x[2], x[3], gamma);
      const double approx =
          approx_pairwise_kernel(fm, x[0], x[1], x[2], x[3]);
      errs.push_back(std::abs(approx - exact));
    }
    std::sort(errs.begin(), errs.end());
    const double median = errs[errs.size() / 2];
    const double p95 = errs[static_cast<std::size_t>(0.95 * errs.size())];

    std::string auc_cell;
    if (cfg.kernel_with_auc) {
      ExperimentConfig sub = cfg;
      if (sub.dataset.empty()) sub.dataset = "synthetic:600";
      const Dataset data = load_dataset(sub);
      PreparedRun p = prepare(sub, data, sub.stream_order);
      RunConfig rc = sub.run;
      rc.feature_count = D;
      const FourierMap run_fm =
          make_map(rc, data.dim, static_cast<long>(p.stream.size()));
      const RunResult res = run(p.stream, rc, run_fm);
      std::vector<double> labels;
      for (const auto& ex : p.test.examples) labels.push_back(ex.label);
      auc_cell =
          cell(auc(score_examples(res.model, run_fm, p.test.examples), labels));
    }
    out << D << ',' << cell(median) << ',' << cell(p95) << ',' << auc_cell
        << "\n";
  }
  write_meta(cfg, dir, {{"kernel_gamma", cell(gamma)}});
  return 0;
}

int cmd_variance_check(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  const Dataset data = load_dataset(cfg);
  PreparedRun p = prepare(cfg, data, cfg.stream_order);

  RunConfig rc = cfg.run;
  rc.snapshot_every = cfg.checkpoint_every;
  rc.keep_mapped = true;
  if (rc.mode == AlgoMode::KarReservoir)
    throw ConfigError("variance-check requires a strata-based mode");
  const FourierMap fm =
      make_map(rc, data.dim, static_cast<long>(p.stream.size()));
  const RunResult res = run(p.stream, rc, fm);

  auto out = open_output(dir / "variance.csv");
  out << "t,kappa,v_stratified,v_uniform,certificate_ok\n";
  bool violated = false;
  std::string offending;
  for (const auto& [t, w] : res.trajectory.snapshots) {
    const std::vector<MappedExample> history(res.mapped.begin(),
                                             res.mapped.begin() + (t - 1));
    const std::vector<int> partition(res.membership.begin(),
                                     res.membership.begin() + (t - 1));
    const VarianceReport rep =
        exact_variance(rc.loss, w, res.mapped[t - 1], history, partition);
    const long kappa =
        *std::max_element(partition.begin(), partition.end()) + 1;
    out << t << ',' << kappa << ',' << cell(rep.v_stratified) << ','
        << cell(rep.v_uniform) << ',' << (rep.certificate_ok ? 1 : 0) << "\n";
    if (!rep.certificate_ok && !violated) {
      violated = true;
      offending = "t=" + std::to_string(t) +
                  " v_stratified=" + cell(rep.v_stratified) +
                  " v_uniform=" + cell(rep.v_uniform);
    }
  }
  write_meta(cfg, dir, {});
  if (violated)
    throw CertificateViolation("variance certificate violated: " + offending);
  return 0;
}

int run_command(int argc, char** argv) {
  try {
    if (argc < 2) {
      std::cerr << "usage: pairstream <run|grid|compare|kernel-check|"
                   "variance-check> [--config <path>] [--key value ...]\n";
      return 2;
    }
    const std::string command = argv[1];
    KeyValueConfig kv;
    std::vector<std::pair<std::string, std::string>> overrides;
    for (int i = 2; i < argc; ++i) {
      std::string flag = argv[i];
      if (flag.rfind("--", 0) != 0)
        throw ConfigError("expected --key, got: " + flag);
      if (i + 1 >= argc) throw ConfigError("missing value for " + flag);
      overrides.emplace_back(flag.substr(2), argv[++i]);
    }
    for (const auto& [k, v] : overrides) {
      if (k == "config") kv = KeyValueConfig::load_file(v);
    }
    for (const auto& [k, v] : overrides) {
      if (k != "config") kv.set(k, v);  // flags win over the file
    }
    const ExperimentConfig cfg = ExperimentConfig::from(kv, command);

    if (command == "run") return cmd_run(cfg);
    if (command == "grid") return cmd_grid(cfg);
    if (command == "compare") return cmd_compare(cfg);
    if (command == "kernel-check") return cmd_kernel_check(cfg);
    if (command == "variance-check") return cmd_variance_check(cfg);
    throw ConfigError("unknown command: " + command);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CertificateViolation& e) {
    std::cerr << "violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pairstream
