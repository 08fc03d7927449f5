#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "pairstream/dataio.hpp"

namespace pairstream {

/// Random Fourier frequencies for the Gaussian kernel
/// G(x,x') = exp(-gamma ||x-x'||^2). Rows of `freq` are drawn i.i.d. from
/// N(0, 2*gamma*I), which makes E[cos(q^T d)] = exp(-gamma ||d||^2).
/// Immutable after construction; reconstructible from (dim, D, gamma, seed).
struct FourierMap {
  Eigen::MatrixXd freq;  // (D/2) x dim
  double gamma = 1.0;
  int dim = 0;
  int feature_count = 0;  // D, even
  std::uint64_t seed = 0;
};

struct MappedExample {
  Eigen::VectorXd r;  // length D, unit norm
  double label = 0.0;
  int id = 0;
};

FourierMap sample_map(int d, int D, double gamma, std::uint64_t seed);

/// r(x)[2i] = sqrt(2/D) cos(q_i^T x), r(x)[2i+1] = sqrt(2/D) sin(q_i^T x).
/// ||r(x)||^2 = 1 up to rounding for every x.
Eigen::VectorXd map_point(const FourierMap& fm, const Eigen::VectorXd& x);
MappedExample map_example(const FourierMap& fm, const Example& ex);

double gauss_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    double gamma);

/// <r(x), r(x')>; equals (2/D) sum_i cos(q_i^T (x - x')) by the
/// angle-difference identity.
double approx_kernel(const FourierMap& fm, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y);

/// Pairwise kernel built from the univariate Gaussian kernel:
/// G(x1,x1') + G(x2,x2') - G(x1,x2') - G(x2,x1').
double pairwise_kernel(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                       const Eigen::VectorXd& x1p, const Eigen::VectorXd& x2p,
                       double gamma);

/// <r(x1) - r(x2), r(x1') - r(x2')>
double approx_pairwise_kernel(const FourierMap& fm, const Eigen::VectorXd& x1,
                              const Eigen::VectorXd& x2,
                              const Eigen::VectorXd& x1p,
                              const Eigen::VectorXd& x2p);

enum class RffRegime { Default, SlowDecay, PolyDecay, Geometric };

/// Feature-count schedules by eigenvalue decay regime, rounded up to even:
/// Default ceil(sqrt(T) ln T), SlowDecay ceil(5T ln 2T),
/// PolyDecay(c) ceil(T^(1/2c) ln T), Geometric ceil(ln^2 T).
int rff_count(long T, RffRegime regime, double c = 1.0);

Eigen::VectorXd to_dense(const Example& ex, int dim);

}  // namespace pairstream
