#include "pairstream/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pairstream/rng.hpp"

namespace pairstream {

double Example::feature_value(int index) const {
  auto it = std::lower_bound(
      features.begin(), features.end(), index,
      [](const std::pair<int, double>& f, int idx) { return f.first < idx; });
  if (it != features.end() && it->first == index) return it->second;
  return 0.0;
}

double Example::squared_norm() const {
  double s = 0.0;
  for (const auto& [idx, val] : features) s += val * val;
  return s;
}

std::size_t Dataset::count_label(double label) const {
  std::size_t n = 0;
  for (const auto& e : examples)
    if (e.label == label) ++n;
  return n;
}

Dataset parse_libsvm(std::istream& in) {
  Dataset data;
  std::string line;
  int line_no = 0;
  int id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments and trailing whitespace
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    std::istringstream ls(line);
    Example ex;
    ex.id = id;
    std::string tok;
    if (!(ls >> tok))
      throw ParseError("empty line " + std::to_string(line_no));
    try {
      std::size_t used = 0;
      ex.label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError("bad label '" + tok + "' at line " +
                       std::to_string(line_no));
    }
    int prev_index = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError("malformed token '" + tok + "' at line " +
                         std::to_string(line_no));
      int index = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        index = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(tok);
        std::string vs = tok.substr(colon + 1);
        value = std::stod(vs, &used);
        if (used != vs.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("non-numeric token '" + tok + "' at line " +
                         std::to_string(line_no));
      }
      if (index <= prev_index)
        throw ParseError("non-ascending index at line " +
                         std::to_string(line_no));
      prev_index = index;
      ex.features.emplace_back(index, value);
      data.dim = std::max(data.dim, index);
    }
    data.examples.push_back(std::move(ex));
    ++id;
  }
  return data;
}

Dataset parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(in);
}

void serialize_libsvm(const Dataset& data, std::ostream& out) {
  out.precision(17);
  for (const auto& ex : data.examples) {
    out << ex.label;
    for (const auto& [idx, val] : ex.features) out << ' ' << idx << ':' << val;
    out << '\n';
  }
}

Dataset binarize_labels(Dataset data, std::optional<double> threshold) {
  std::set<double> classes;
  for (const auto& ex : data.examples) classes.insert(ex.label);
  if (classes.empty()) throw std::runtime_error("empty dataset");

  double th;
  if (threshold) {
    th = *threshold;
  } else {
    std::vector<double> sorted(classes.begin(), classes.end());
    th = sorted[(sorted.size() - 1) / 2];
  }
  for (auto& ex : data.examples) ex.label = ex.label <= th ? -1.0 : 1.0;

  if (data.count_label(1.0) == 0 || data.count_label(-1.0) == 0)
    throw std::runtime_error("degenerate dataset: single class after binarization");
  return data;
}

Dataset normalize(Dataset data) {
  for (auto& ex : data.examples) {
    const double norm = std::sqrt(ex.squared_norm());
    if (norm == 0.0) continue;
    for (auto& [idx, val] : ex.features) val /= norm;
  }
  return data;
}

std::vector<Example> order_stream(const Dataset& data,
                                  const StreamOrder& order) {
  std::vector<Example> stream = data.examples;
  if (order.kind == StreamOrder::Kind::IidShuffle) {
    Rng rng(order.seed);
    rng.shuffle(stream);
  } else {
    if (order.feature < 1 || order.feature > data.dim)
      throw std::invalid_argument("invalid feature index for sorted stream: " +
                                  std::to_string(order.feature));
    std::sort(stream.begin(), stream.end(),
              [j = order.feature](const Example& a, const Example& b) {
                const double va = a.feature_value(j), vb = b.feature_value(j);
                if (va != vb) return va < vb;
                return a.id < b.id;
              });
  }
  return stream;
}

std::vector<Fold> k_folds(const Dataset& data, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k_folds requires k >= 2");
  if (data.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("k_folds requires dataset size >= k");

  // group positions by label, shuffle each group, deal round-robin
  std::map<double, std::vector<int>> by_label;
  for (std::size_t i = 0; i < data.size(); ++i)
    by_label[data.examples[i].label].push_back(static_cast<int>(i));

  Rng rng(seed);
  std::vector<std::vector<int>> test_sets(k);
  for (auto& [label, ids] : by_label) {
    if (ids.size() < static_cast<std::size_t>(k))
      throw std::invalid_argument("stratification error: class count " +
                                  std::to_string(ids.size()) + " < k");
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i)
      test_sets[i % k].push_back(ids[i]);
  }

  std::vector<Fold> folds(k);
  for (int f = 0; f < k; ++f) {
    std::sort(test_sets[f].begin(), test_sets[f].end());
    folds[f].test_ids = test_sets[f];
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      folds[f].train_ids.insert(folds[f].train_ids.end(),
                                test_sets[g].begin(), test_sets[g].end());
    }
    std::sort(folds[f].train_ids.begin(), folds[f].train_ids.end());
  }
  return folds;
}

Dataset subset(const Dataset& data, const std::vector<int>& ids) {
  Dataset out;
  out.dim = data.dim;
  out.examples.reserve(ids.size());
  for (int i : ids) out.examples.push_back(data.examples[i]);
  return out;
}

Dataset synthetic_mixture(std::size_t n, std::uint64_t seed) {
  // class +1 around (1,0) and (0,1); class -1 around (-1,0) and (0,-1)
  static const double centers[4][2] = {
      {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  static const double labels[4] = {1.0, 1.0, -1.0, -1.0};
  constexpr double kSpread = 0.15;

  Rng rng(seed);
  Dataset data;
  data.dim = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.below(4);
    Example ex;
    ex.id = static_cast<int>(i);
    ex.label = labels[c];
    ex.features.emplace_back(1, centers[c][0] + kSpread * rng.gaussian());
    ex.features.emplace_back(2, centers[c][1] + kSpread * rng.gaussian());
    data.examples.push_back(std::move(ex));
  }
  return data;
}

}  // namespace pairstream
