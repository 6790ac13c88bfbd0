#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "kplane/abel.hpp"
#include "kplane/kernels.hpp"
#include "kplane/numerics.hpp"

namespace kplane {

/// Orthonormal frame splitting R^n into a k-dimensional subspace (basis)
/// and its orthogonal complement.
struct Frame {
    Eigen::MatrixXd basis;       // n x k
    Eigen::MatrixXd complement;  // n x (n-k)
};

/// A k-plane: subspace frame plus an offset given in complement coordinates.
struct FlatParam {
    Frame frame;
    Eigen::VectorXd offset;  // length n-k
};

enum class PhantomKind { Gaussian, Ball };

/// Radial test function with closed-form point values and k-plane transform.
struct Phantom {
    PhantomKind kind = PhantomKind::Gaussian;
    int n = 2;
    double sigma = 1.0;   // Gaussian: exp(-|x|^2 / sigma^2)
    double radius = 1.0;  // Ball: height * indicator(|x| <= radius)
    double height = 1.0;

    double value(double r) const;
    double value_at(const Eigen::VectorXd& x) const;
};

/// Estimates of lambda^{-1} (W*_a f)(x) along a decreasing scale schedule.
struct SweepResult {
    std::vector<double> schedule;
    std::vector<double> estimates;
    std::vector<double> errors;
    std::vector<double> observed_orders;
    std::vector<bool> ok;
};

enum class SweepEngine { Reduced, MC };

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Frame whose subspace follows the rotation-invariant measure on G_{n,k}:
/// QR of an n x n standard normal draw with the R-diagonal sign fix.
Frame haar_frame(int n, int k, std::uint64_t seed);

/// Euclidean distance from a point to a k-plane.
double point_flat_distance(const Eigen::VectorXd& x, const FlatParam& flat);

/// Closed-form k-plane transform of a radial phantom at plane distance d.
double phantom_hat(const Phantom& phantom, int k, double d);

/// Transform by direct quadrature in plane coordinates; cross-check for
/// phantom_hat.
double kplane_numeric(const Phantom& phantom, const FlatParam& flat,
                      const QuadratureSpec& spec = QuadratureSpec::transform_level());

/// Backprojection a^{-n} int fhat(tau) w(|x-tau|/a) dtau by Monte Carlo over
/// subspace draws with deterministic quadrature in the offset variable.
McEstimate backproject_mc(const PiecewiseRadialKernel& kernel, const Phantom& phantom,
                          const Dims& dims, const Eigen::VectorXd& x, double a,
                          int samples, std::uint64_t seed,
                          const QuadratureSpec& spec = QuadratureSpec::transform_level());

/// Deterministic backprojection: the subspace average reduces to a Beta law
/// in t = |P_{perp} x|^2 / |x|^2, leaving a radial double quadrature.
double backproject_reduced(const PiecewiseRadialKernel& kernel, const Phantom& phantom,
                           const Dims& dims, const Eigen::VectorXd& x, double a,
                           const QuadratureSpec& spec = QuadratureSpec::transform_level());

/// Right side of the convolution identity: int f(x-ay) psi(|y|) dy by
/// radius-angle quadrature. Independent oracle for the backprojection.
double convolve_oracle(const Phantom& phantom, const RadialProfile& profile,
                       const Eigen::VectorXd& x, double a,
                       const QuadratureSpec& spec = QuadratureSpec::transform_level());

SweepResult invert_sweep(const Phantom& phantom, const Dims& dims,
                         const PiecewiseRadialKernel& kernel, const RadialProfile& profile,
                         const Eigen::VectorXd& x, double a_start, double factor, int steps,
                         SweepEngine engine, int mc_samples = 20000, std::uint64_t seed = 0,
                         const QuadratureSpec& spec = QuadratureSpec::transform_level());

/// Nievergelt's 2-plane filter G_a; equals w(|t|/a)/(pi a^2) with the n=2
/// X-ray kernel by construction.
double nievergelt_Ga(double t, double a);

}  // namespace kplane
