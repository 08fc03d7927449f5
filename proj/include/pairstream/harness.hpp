#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairstream/learner.hpp"

namespace pairstream {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CertificateViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value configuration: file values overridden by CLI flags
/// (flags win). `#` starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig load_file(const std::string& path);

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& def) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  long get_long(const std::string& key, long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
  std::string command;
  std::string dataset;  // path, or "synthetic:<n>"
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds = {1};
  StreamOrder stream_order = StreamOrder::iid_shuffle(0);
  std::string stream_spec = "iid";
  RunConfig run;
  int folds = 3;
  long max_examples = 0;       // 0 -> whole stream
  long eval_every = 10;
  long checkpoint_every = 100;
  bool compute_regret = false;
  bool binarize = true;
  double binarize_threshold = 0.0;
  bool has_threshold = false;
  std::vector<std::string> modes;            // compare
  std::vector<std::string> stream_variants;  // compare
  std::vector<int> d_list;                   // kernel-check
  long kernel_pairs = 10000;
  int kernel_dim = 20;
  bool kernel_with_auc = false;
  std::vector<double> grid_etas;
  std::vector<double> grid_lambdas;

  KeyValueConfig raw;

  static ExperimentConfig from(const KeyValueConfig& kv,
                               const std::string& command);
};

AlgoMode parse_mode(const std::string& name);
std::string mode_name(AlgoMode mode);

/// Full CLI entry: `pairstream <command> [--config <path>] [--key value ...]`.
/// Returns the process exit code (0 ok, 2 config error, 3 certificate or
/// acceptance violation, 1 otherwise).
int run_command(int argc, char** argv);

int cmd_run(const ExperimentConfig& cfg);
int cmd_grid(const ExperimentConfig& cfg);
int cmd_compare(const ExperimentConfig& cfg);
int cmd_kernel_check(const ExperimentConfig& cfg);
int cmd_variance_check(const ExperimentConfig& cfg);

/// Load, binarize, and normalize the configured dataset.
Dataset load_dataset(const ExperimentConfig& cfg);

}  // namespace pairstream
