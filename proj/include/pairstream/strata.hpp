#pragma once

#include <Eigen/Dense>
#include <climits>
#include <cstdint>
#include <optional>
#include <vector>

#include "pairstream/rff.hpp"
#include "pairstream/rng.hpp"

namespace pairstream {

enum class BufferPolicy { Fifo, Reservoir };

/// One epsilon-radius cluster over mapped examples: incremental centroid,
/// member count, and a single buffered representative.
struct Stratum {
  Eigen::VectorXd centroid;
  long count = 0;
  MappedExample rep;
  std::optional<int> label_key;
};

struct StrataOptions {
  double epsilon = 0.1;           // threshold on squared distance
  long max_strata = LONG_MAX;     // hard cap on cluster count
  BufferPolicy policy = BufferPolicy::Fifo;
  double centroid_step = 0.1;
  bool running_mean_centroid = false;  // eta_c = 1/count, exact member mean
  bool stratify_by_label = true;
  std::uint64_t seed = 0;
};

Eigen::VectorXd update_centroid(const Eigen::VectorXd& c,
                                const Eigen::VectorXd& r, double eta_c);

/// min{t-1, ceil((R/eps)^d)}
long max_clusters_bound(double R, double eps, int d, long t);

/// Online stratified-sampling buffer. Single-owner mutable state; every
/// past stream example is assigned to exactly one stratum, so the counts
/// always sum to t-1 at step t.
class StrataBuffer {
 public:
  explicit StrataBuffer(StrataOptions opt) : opt_(opt), rng_(opt.seed) {}

  bool initialized() const { return !strata_.empty(); }

  /// Seed the buffer with the first stream example (B_1 = C_1 = {z_1}).
  void init(const MappedExample& first);

  /// Index of the stratum the example lands in. Opens a new stratum
  /// (count 0; incremented by update) when no centroid is within epsilon
  /// and the cap allows; past the cap the nearest stratum absorbs it.
  int assign(const MappedExample& z);

  /// Apply the configured replacement policy to stratum `index`:
  /// count is incremented, the representative replaced (unconditionally for
  /// FIFO, with probability 1/count for Reservoir), the centroid stepped
  /// toward the incoming example.
  void update(const MappedExample& z, int index);

  void absorb(const MappedExample& z) { update(z, assign(z)); }

  /// (representative, |C_j^t|/(t-1)) per stratum; weights sum to 1.
  std::vector<std::pair<const MappedExample*, double>> weights(long t) const;

  long size() const { return static_cast<long>(strata_.size()); }
  long total_count() const;
  const std::vector<Stratum>& strata() const { return strata_; }
  const StrataOptions& options() const { return opt_; }

  /// Stratum index of each absorbed example, in stream order.
  const std::vector<int>& membership() const { return membership_; }

 private:
  StrataOptions opt_;
  std::vector<Stratum> strata_;
  std::vector<int> membership_;
  Rng rng_;
};

/// Classic stream-wide reservoir of `capacity` slots (the Kar baseline);
/// slots are a uniform subset of the prefix, weighted 1/s each.
class KarReservoir {
 public:
  KarReservoir(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), rng_(seed) {}

  void absorb(const MappedExample& z);
  std::vector<std::pair<const MappedExample*, double>> weights() const;
  long size() const { return static_cast<long>(slots_.size()); }
  const std::vector<MappedExample>& slots() const { return slots_; }

 private:
  std::size_t capacity_;
  long seen_ = 0;
  std::vector<MappedExample> slots_;
  Rng rng_;
};

}  // namespace pairstream
