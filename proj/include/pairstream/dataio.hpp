#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pairstream {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One unit of the online stream: sparse features plus a real label.
/// Feature indices are 1-based and strictly ascending.
struct Example {
  std::vector<std::pair<int, double>> features;
  double label = 0.0;
  int id = 0;

  double feature_value(int index) const;
  double squared_norm() const;
};

struct Dataset {
  std::vector<Example> examples;
  int dim = 0;  // >= largest feature index seen

  std::size_t size() const { return examples.size(); }
  std::size_t count_label(double label) const;
};

/// Parse LIBSVM text: `<label> <idx>:<val> ...` per line, ascending 1-based
/// indices. Throws ParseError naming the offending line.
Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm_file(const std::string& path);
void serialize_libsvm(const Dataset& data, std::ostream& out);

/// Map class ids to {-1,+1}: labels <= threshold become -1, the rest +1.
/// Default threshold is the median distinct class id (even split).
/// Throws if only one class remains.
Dataset binarize_labels(Dataset data, std::optional<double> threshold = {});

/// Scale every example to unit l2 norm; zero vectors stay zero.
Dataset normalize(Dataset data);

struct StreamOrder {
  enum class Kind { IidShuffle, SortedByFeature };
  Kind kind = Kind::IidShuffle;
  std::uint64_t seed = 0;
  int feature = 1;  // for SortedByFeature

  static StreamOrder iid_shuffle(std::uint64_t seed) {
    return {Kind::IidShuffle, seed, 1};
  }
  static StreamOrder sorted_by_feature(int feature) {
    return {Kind::SortedByFeature, 0, feature};
  }
};

/// Produce the ordered example stream. iid_shuffle is a seed-determined
/// uniform permutation; sorted_by_feature orders ascending by the value of
/// one feature (missing = 0), ties broken by original id.
std::vector<Example> order_stream(const Dataset& data, const StreamOrder& order);

struct Fold {
  std::vector<int> train_ids;
  std::vector<int> test_ids;
};

/// Label-stratified k-fold split over example positions, deterministic
/// given the seed. Throws if k exceeds the smaller class count.
std::vector<Fold> k_folds(const Dataset& data, int k, std::uint64_t seed);

Dataset subset(const Dataset& data, const std::vector<int>& ids);

/// Synthetic 2-D Gaussian-mixture dataset: two components per class placed
/// on opposite quadrants, so each class is multimodal and the stream
/// benefits from stratification. Labels are already in {-1,+1}.
Dataset synthetic_mixture(std::size_t n, std::uint64_t seed);

}  // namespace pairstream
