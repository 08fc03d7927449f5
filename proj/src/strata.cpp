#include "pairstream/strata.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pairstream {

Eigen::VectorXd update_centroid(const Eigen::VectorXd& c,
                                const Eigen::VectorXd& r, double eta_c) {
  if (eta_c <= 0.0 || eta_c > 1.0)
    throw std::invalid_argument("update_centroid: eta_c must be in (0,1]");
  return c + eta_c * (r - c);
}

long max_clusters_bound(double R, double eps, int d, long t) {
  if (R <= 0.0 || eps <= 0.0 || d < 1)
    throw std::invalid_argument("max_clusters_bound: bad arguments");
  const double balls = std::pow(R / eps, static_cast<double>(d));
  const long cap = t - 1;
  if (!std::isfinite(balls) || balls >= static_cast<double>(cap)) return cap;
  const long n = static_cast<long>(std::ceil(balls));
  return std::min(cap, std::max<long>(n, 1));
}

void StrataBuffer::init(const MappedExample& first) {
  if (initialized()) throw std::logic_error("StrataBuffer already initialized");
  Stratum s;
  s.centroid = first.r;
  s.count = 1;
  s.rep = first;
  if (opt_.stratify_by_label) s.label_key = static_cast<int>(first.label);
  strata_.push_back(std::move(s));
  membership_.push_back(0);
}

int StrataBuffer::assign(const MappedExample& z) {
  if (!initialized())
    throw std::logic_error("StrataBuffer: assign before init");

  const std::optional<int> key =
      opt_.stratify_by_label ? std::optional<int>(static_cast<int>(z.label))
                             : std::nullopt;
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  long matching = 0;
  for (std::size_t j = 0; j < strata_.size(); ++j) {
    if (strata_[j].label_key != key) continue;
    ++matching;
    const double dist = (z.r - strata_[j].centroid).squaredNorm();
    if (dist < best_dist) {  // ties keep the lower index
      best_dist = dist;
      best = static_cast<int>(j);
    }
  }
  if (best >= 0 && best_dist <= opt_.epsilon) return best;
  if (size() < opt_.max_strata || matching == 0) {
    Stratum s;
    s.centroid = z.r;
    s.count = 0;
    s.rep = z;
    s.label_key = key;
    strata_.push_back(std::move(s));
    return static_cast<int>(strata_.size() - 1);
  }
  return best;  // cap reached: nearest stratum absorbs it regardless of eps
}

void StrataBuffer::update(const MappedExample& z, int index) {
  if (index < 0 || index >= size())
    throw std::out_of_range("StrataBuffer: invalid stratum index");
  Stratum& s = strata_[index];
  ++s.count;
  switch (opt_.policy) {
    case BufferPolicy::Fifo:
      s.rep = z;
      break;
    case BufferPolicy::Reservoir:
      if (rng_.uniform() < 1.0 / static_cast<double>(s.count)) s.rep = z;
      break;
  }
  const double eta_c = opt_.running_mean_centroid
                           ? 1.0 / static_cast<double>(s.count)
                           : opt_.centroid_step;
  s.centroid = update_centroid(s.centroid, z.r, eta_c);
  membership_.push_back(index);
}

long StrataBuffer::total_count() const {
  long n = 0;
  for (const auto& s : strata_) n += s.count;
  return n;
}

std::vector<std::pair<const MappedExample*, double>> StrataBuffer::weights(
    long t) const {
  if (t < 2) throw std::invalid_argument("StrataBuffer::weights: t must be >= 2");
  if (total_count() != t - 1)
    throw std::logic_error("StrataBuffer::weights: counts do not sum to t-1");
  std::vector<std::pair<const MappedExample*, double>> out;
  out.reserve(strata_.size());
  for (const auto& s : strata_) {
    if (s.count == 0) continue;
    out.emplace_back(&s.rep,
                     static_cast<double>(s.count) / static_cast<double>(t - 1));
  }
  return out;
}

void KarReservoir::absorb(const MappedExample& z) {
  ++seen_;
  if (slots_.size() < capacity_) {
    slots_.push_back(z);
    return;
  }
  const std::uint64_t j = rng_.below(static_cast<std::uint64_t>(seen_));
  if (j < capacity_) slots_[j] = z;
}

std::vector<std::pair<const MappedExample*, double>> KarReservoir::weights()
    const {
  if (slots_.empty()) throw std::logic_error("KarReservoir: empty buffer");
  std::vector<std::pair<const MappedExample*, double>> out;
  const double w = 1.0 / static_cast<double>(slots_.size());
  for (const auto& s : slots_) out.emplace_back(&s, w);
  return out;
}

}  // namespace pairstream
