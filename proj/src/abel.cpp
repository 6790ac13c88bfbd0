#include "kplane/abel.hpp"

#include <cmath>
#include <limits>

#include "detail/quad.hpp"

namespace kplane {

namespace {

// w(s) / (s^2-1)^am at s = sqrt(1+t), with t = s^2-1 supplied exactly and
// am the edge exponent of the kernel. Bounded near t = 0, so the singular
// factor can be handled by the quadrature weight.
double w_reduced(const PiecewiseRadialKernel& kernel, double am, double t) {
    if (kernel.family == KernelFamily::TheoremA)
        return std::pow(t, -am) * kernel_eval_shifted(kernel, t);
    double sum = 0.0;
    for (const auto& term : kernel.outside_terms)
        sum += term.coef * std::pow(t, term.alpha - am) * std::pow(1.0 + t, 0.5 * term.beta);
    return sum;
}

}  // namespace

double riemann_liouville(const RealFn& g, double alpha, double a, double u,
                         const QuadratureSpec& spec) {
    if (!(alpha > 0.0)) throw std::domain_error("riemann_liouville: alpha must be positive");
    if (!(u > a)) throw std::domain_error("riemann_liouville: u must exceed a");
    return singular_quad(g, a, u, {alpha - 1.0, 0.0}, spec) / gamma_fn(alpha);
}

double abel_lhs(const PiecewiseRadialKernel& kernel, const Dims& dims, double r,
                const QuadratureSpec& spec) {
    dims.validate();
    if (!(r > 0.0)) throw std::domain_error("abel_lhs: r must be positive");
    const double e = 0.5 * dims.k - 1.0;
    const int p = dims.n - dims.k - 1;
    const double c = abel_constant(dims);

    double inner = 0.0;
    if (r <= 1.0) {
        if (kernel.inside_value != 0.0) {
            // (r^2-s^2)^e = (r-s)^e (r+s)^e; the (r-s)^e factor is the weight.
            auto smooth = [p, r, e](double s) {
                return std::pow(s, p) * std::pow(r + s, e);
            };
            inner = kernel.inside_value * singular_quad(smooth, 0.0, r, {e, 0.0}, spec);
        }
    } else {
        const double q = (r - 1.0) * (r + 1.0);
        if (kernel.inside_value != 0.0) {
            // s = 1 - t keeps the near-sphere factor q + t(2-t) exact.
            auto f = [p, q, e](double t) {
                return std::pow(1.0 - t, p) * std::pow(q + t * (2.0 - t), e);
            };
            inner = kernel.inside_value * detail::ts_integrate(f, 0.0, 1.0, spec).value;
        }
        // Outer piece in t = s^2 - 1, so both the kernel edge singularity
        // (weight t^am at 0) and the (r^2-s^2)^e factor (weight (q-t)^e at q)
        // are handled by the quadrature without cancellation.
        const double am = kernel_edge_exponent(kernel);
        auto outer = [&kernel, p, am](double t) {
            return 0.5 * std::pow(1.0 + t, 0.5 * (p - 1.0)) * w_reduced(kernel, am, t);
        };
        inner += singular_quad(outer, 0.0, q, {e, am}, spec);
    }
    return c * std::pow(r, 2.0 - dims.n) * inner;
}

double fractional_lhs(const PiecewiseRadialKernel& kernel, const Dims& dims, double u,
                      const QuadratureSpec& spec) {
    dims.validate();
    if (!(u > 0.0)) throw std::domain_error("fractional_lhs: u must be positive");
    const double alpha = 0.5 * dims.k;
    const double inner_exp = 0.5 * (dims.n - dims.k) - 1.0;

    double total = 0.0;
    if (u <= 1.0) {
        if (kernel.inside_value != 0.0)
            total = kernel.inside_value *
                    singular_quad([](double) { return 1.0; }, 0.0, u,
                                  {alpha - 1.0, inner_exp}, spec);
    } else {
        if (kernel.inside_value != 0.0) {
            auto g = [u, alpha](double v) { return std::pow(u - v, alpha - 1.0); };
            total = kernel.inside_value *
                    singular_quad(g, 0.0, 1.0, {0.0, inner_exp}, spec);
        }
        // Tail in t = v - 1: weight (u-1-t)^(alpha-1) at the right endpoint and
        // t^am (the kernel edge singularity) at the left.
        const double am = kernel_edge_exponent(kernel);
        auto tail = [&kernel, inner_exp, am](double t) {
            return std::pow(1.0 + t, inner_exp) * w_reduced(kernel, am, t);
        };
        total += singular_quad(tail, 0.0, u - 1.0, {alpha - 1.0, am}, spec);
    }
    return total / gamma_fn(alpha);
}

ResidualReport residual_check(const PiecewiseRadialKernel& kernel,
                              const RadialProfile& profile, const Dims& dims,
                              const std::vector<double>& grid,
                              const QuadratureSpec& spec) {
    ResidualReport report;
    report.dims = dims;
    report.grid = grid;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double r : grid) {
        const double rhs = psi_eval(profile, r);
        double lhs = nan;
        bool ok = true;
        try {
            lhs = abel_lhs(kernel, dims, r, spec);
        } catch (const accuracy_error&) {
            ok = false;  // recorded as a missing entry; the sweep continues
        }
        report.lhs.push_back(lhs);
        report.rhs.push_back(rhs);
        report.ok.push_back(ok);
        if (ok) {
            const double abs_err = std::abs(lhs - rhs);
            report.max_abs_err = std::max(report.max_abs_err, abs_err);
            if (std::abs(rhs) > 0.0)
                report.max_rel_err = std::max(report.max_rel_err, abs_err / std::abs(rhs));
        }
    }
    return report;
}

double indicator_infeasibility(const Dims& dims) {
    dims.validate();
    if (dims.k < 2)
        throw std::domain_error(
            "indicator_infeasibility: no obstruction for k = 1 (Theorem A applies)");
    return -gamma_fn(0.5 * (dims.n - dims.k)) / gamma_fn(0.5 * dims.n);
}

double indicator_infeasibility_quadrature(const Dims& dims, const QuadratureSpec& spec) {
    dims.validate();
    if (dims.k < 2)
        throw std::domain_error(
            "indicator_infeasibility: no obstruction for k = 1 (Theorem A applies)");
    const double integral =
        singular_quad([](double) { return 1.0; }, 0.0, 1.0,
                      {0.5 * dims.k - 1.0, 0.5 * (dims.n - dims.k) - 1.0}, spec);
    return -integral / gamma_fn(0.5 * dims.k);
}

std::vector<double> residual_grid(double lo, double hi, int points, double offset) {
    std::vector<double> grid;
    grid.reserve(points);
    const double step = (std::log(hi) - std::log(lo)) / (points - 1);
    for (int i = 0; i < points; ++i) {
        double r = std::exp(std::log(lo) + i * step);
        if (std::abs(r - 1.0) < offset) r = (r < 1.0) ? 1.0 - offset : 1.0 + offset;
        grid.push_back(r);
    }
    return grid;
}

}  // namespace kplane
