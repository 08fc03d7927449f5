#include "pairstream/rff.hpp"

#include <cmath>
#include <stdexcept>

#include "pairstream/rng.hpp"

namespace pairstream {

FourierMap sample_map(int d, int D, double gamma, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_map: d must be >= 1");
  if (D < 2 || D % 2 != 0)
    throw std::invalid_argument("sample_map: D must be even and >= 2");
  if (gamma <= 0.0) throw std::invalid_argument("sample_map: gamma must be > 0");

  FourierMap fm;
  fm.dim = d;
  fm.feature_count = D;
  fm.gamma = gamma;
  fm.seed = seed;
  fm.freq.resize(D / 2, d);
  Rng rng(seed);
  const double scale = std::sqrt(2.0 * gamma);
  for (int i = 0; i < D / 2; ++i)
    for (int j = 0; j < d; ++j) fm.freq(i, j) = scale * rng.gaussian();
  return fm;
}

Eigen::VectorXd map_point(const FourierMap& fm, const Eigen::VectorXd& x) {
  if (x.size() > fm.dim)
    throw std::invalid_argument("map_point: input dimension exceeds map dim");
  Eigen::VectorXd proj;
  if (x.size() == fm.dim) {
    proj = fm.freq * x;
  } else {
    proj = fm.freq.leftCols(x.size()) * x;
  }
  const int half = fm.feature_count / 2;
  const double amp = std::sqrt(2.0 / fm.feature_count);
  Eigen::VectorXd r(fm.feature_count);
  for (int i = 0; i < half; ++i) {
    r[2 * i] = amp * std::cos(proj[i]);
    r[2 * i + 1] = amp * std::sin(proj[i]);
  }
  return r;
}

MappedExample map_example(const FourierMap& fm, const Example& ex) {
  if (!ex.features.empty() && ex.features.back().first > fm.dim)
    throw std::invalid_argument("map_example: feature index exceeds map dim");
  const int half = fm.feature_count / 2;
  Eigen::VectorXd proj = Eigen::VectorXd::Zero(half);
  for (const auto& [idx, val] : ex.features)
    proj += val * fm.freq.col(idx - 1);
  const double amp = std::sqrt(2.0 / fm.feature_count);
  MappedExample z;
  z.r.resize(fm.feature_count);
  for (int i = 0; i < half; ++i) {
    z.r[2 * i] = amp * std::cos(proj[i]);
    z.r[2 * i + 1] = amp * std::sin(proj[i]);
  }
  z.label = ex.label;
  z.id = ex.id;
  return z;
}

double gauss_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    double gamma) {
  if (x.size() != y.size())
    throw std::invalid_argument("gauss_kernel: dimension mismatch");
  return std::exp(-gamma * (x - y).squaredNorm());
}

double approx_kernel(const FourierMap& fm, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y) {
  return map_point(fm, x).dot(map_point(fm, y));
}

double pairwise_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                       const Eigen::VectorXd& x1p, const Eigen::VectorXd& x2p,
                       double gamma) {
  return gauss_kernel(x1, x1p, gamma) + gauss_kernel(x2, x2p, gamma) -
         gauss_kernel(x1, x2p, gamma) - gauss_kernel(x2, x1p, gamma);
}

double approx_pairwise_kernel(const FourierMap& fm, const Eigen::VectorXd& x1,
                              const Eigen::VectorXd& x2,
                              const Eigen::VectorXd& x1p,
                              const Eigen::VectorXd& x2p) {
  const Eigen::VectorXd left = map_point(fm, x1) - map_point(fm, x2);
  const Eigen::VectorXd right = map_point(fm, x1p) - map_point(fm, x2p);
  return left.dot(right);
}

namespace {
int round_up_even(double v) {
  long n = static_cast<long>(std::ceil(v));
  if (n < 2) n = 2;
  if (n % 2 != 0) ++n;
  return static_cast<int>(n);
}
}  // namespace

int rff_count(long T, RffRegime regime, double c) {
  if (T < 2) throw std::invalid_argument("rff_count: T must be >= 2");
  const double t = static_cast<double>(T);
  switch (regime) {
    case RffRegime::Default:
      return round_up_even(std::sqrt(t) * std::log(t));
    case RffRegime::SlowDecay:
      return round_up_even(5.0 * t * std::log(2.0 * t));
    case RffRegime::PolyDecay:
      if (c <= 0.0) throw std::invalid_argument("rff_count: c must be > 0");
      return round_up_even(std::pow(t, 1.0 / (2.0 * c)) * std::log(t));
    case RffRegime::Geometric: {
      const double l = std::log(t);
      return round_up_even(l * l);
    }
  }
  throw std::invalid_argument("rff_count: unknown regime");
}

Eigen::VectorXd to_dense(const Example& ex, int dim) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  for (const auto& [idx, val] : ex.features) {
    if (idx > dim) throw std::invalid_argument("to_dense: index out of range");
    x[idx - 1] = val;
  }
  return x;
}

}  // namespace pairstream
