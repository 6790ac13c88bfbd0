#pragma once

#include <vector>

#include "kplane/kernels.hpp"
#include "kplane/numerics.hpp"

namespace kplane {

/// Pointwise record of both sides of the Abel equation over a radial grid.
/// Grid points whose quadrature failed are kept with ok = false and NaN
/// entries; max errors are taken over the successful points.
struct ResidualReport {
    Dims dims;
    std::vector<double> grid;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<bool> ok;
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
};

/// Riemann-Liouville fractional integral (I^alpha_{a+} g)(u).
double riemann_liouville(const RealFn& g, double alpha, double a, double u,
                         const QuadratureSpec& spec = QuadratureSpec::kernel_level());

/// Left side of the Abel equation:
/// c r^(2-n) int_0^r s^(n-k-1) w(s) (r^2-s^2)^(k/2-1) ds.
/// The integral is split at s = 1 when r > 1 so both the s = r endpoint and
/// the kernel's behavior at s = 1 receive singularity-aware treatment.
double abel_lhs(const PiecewiseRadialKernel& kernel, const Dims& dims, double r,
                const QuadratureSpec& spec = QuadratureSpec::kernel_level());

ResidualReport residual_check(const PiecewiseRadialKernel& kernel,
                              const RadialProfile& profile, const Dims& dims,
                              const std::vector<double>& grid,
                              const QuadratureSpec& spec = QuadratureSpec::kernel_level());

/// Obstruction constant -Gamma((n-k)/2)/Gamma(n/2): the nonzero limit that
/// rules out an indicator mollifier for k >= 2.
double indicator_infeasibility(const Dims& dims);

/// Quadrature of the defining integral of the obstruction constant;
/// independent route for the closed form above.
double indicator_infeasibility_quadrature(
    const Dims& dims, const QuadratureSpec& spec = QuadratureSpec::kernel_level());

/// (I^{k/2}_{0+} w~)(u) with the integration split at v = 1; the fractional
/// form of abel_lhs, used as the second route to the same identity.
double fractional_lhs(const PiecewiseRadialKernel& kernel, const Dims& dims, double u,
                      const QuadratureSpec& spec = QuadratureSpec::kernel_level());

/// 30-point log-spaced grid on [lo,hi] with points near 1 pushed to 1 +/- offset.
std::vector<double> residual_grid(double lo, double hi, int points, double offset = 1e-3);

}  // namespace kplane
