#include "kplane/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "detail/interp.hpp"
#include "detail/quad.hpp"

namespace kplane {

namespace {
constexpr double pi = 3.14159265358979323846;

// Radius beyond which the phantom (or its transform) is negligible.
double support_radius(const Phantom& phantom) {
    return phantom.kind == PhantomKind::Ball ? phantom.radius : 9.0 * phantom.sigma;
}

bool compact_support(const Phantom& phantom) { return phantom.kind == PhantomKind::Ball; }

// Point value from the squared radius; all phantoms are functions of |x|^2,
// so angular integrands built on this stay smooth across theta.
double point2(const Phantom& phantom, double r2) {
    if (phantom.kind == PhantomKind::Gaussian)
        return std::exp(-r2 / (phantom.sigma * phantom.sigma));
    return r2 <= phantom.radius * phantom.radius ? phantom.height : 0.0;
}

// k-plane transform value from the squared plane distance.
double hat2(const Phantom& phantom, int k, double d2) {
    if (phantom.kind == PhantomKind::Gaussian) {
        const double s2 = phantom.sigma * phantom.sigma;
        return std::pow(pi * s2, 0.5 * k) * std::exp(-d2 / s2);
    }
    const double r2 = phantom.radius * phantom.radius;
    if (d2 >= r2) return 0.0;
    const double vk = std::pow(pi, 0.5 * k) / gamma_fn(0.5 * k + 1.0);
    return phantom.height * vk * std::pow(r2 - d2, 0.5 * k);
}

std::vector<std::pair<double, double>> panels(std::vector<double> knots, double cut) {
    knots.push_back(0.0);
    knots.push_back(cut);
    std::erase_if(knots, [cut](double v) { return !(v > 0.0) || v >= cut; });
    knots.push_back(cut);
    knots.push_back(0.0);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                knots.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) out.emplace_back(knots[i], knots[i + 1]);
    return out;
}

// One subspace-conditional backprojection integral:
//   G(z) = int_{R^m} fhat(|y|) w(|z e1 - y|/a) dy,  m = n-k,
// evaluated around the kernel center so the w singularity at radius a stays
// on a panel boundary.
class BackprojectionEngine {
  public:
    BackprojectionEngine(const PiecewiseRadialKernel& kernel, const Phantom& phantom,
                         const Dims& dims, double a, QuadratureSpec spec)
        : kernel_(kernel), phantom_(phantom), dims_(dims), a_(a), spec_(spec) {
        // inner integrals run tighter than the layer that consumes them
        spec_.abs_tol *= 1e-2;
        spec_.rel_tol = std::max(1e-13, spec_.rel_tol * 1e-2);
    }

    double g(double z) const {
        const int m = dims_.n - dims_.k;
        const double cut = z + support_radius(phantom_);
        std::vector<double> knots = {a_, 2.0 * a_};
        if (compact_support(phantom_)) {
            // both |z-u| = R and z+u = R produce kinks in the integrand
            knots.push_back(std::abs(z - phantom_.radius));
            knots.push_back(z + phantom_.radius);
        }
        double total = 0.0;
        if (m == 1) {
            auto rest = [this, z](double u) {
                const double dm = z - u, dp = z + u;
                return hat2(phantom_, dims_.k, dm * dm) + hat2(phantom_, dims_.k, dp * dp);
            };
            for (auto [lo, hi] : panels(knots, cut))
                total += panel_integral(lo, hi, rest);
            return total;
        }
        auto rest = [this, z, m](double rho) {
            return std::pow(rho, m - 1) * angular(z, rho, m);
        };
        for (auto [lo, hi] : panels(knots, cut))
            total += panel_integral(lo, hi, rest);
        return sphere_area(m - 1) * total;
    }

  private:
    // Kernel value at radius u, with the scaled argument's distance to the
    // singular radius a formed by exact subtraction.
    double kernel_at(double u) const {
        if (u <= a_) return kernel_.inside_value;
        const double s = (u - a_) / a_;
        return kernel_eval_shifted(kernel_, s * (2.0 + s));
    }

    // Integrate kernel(u/a) * rest(u) over [lo, hi]. A panel starting at the
    // singular radius is integrated in the offset t = u - a so the quadrature
    // sees exact small distances to the kernel edge.
    template <class Rest>
    double panel_integral(double lo, double hi, const Rest& rest) const {
        if (lo == a_) {
            auto f = [this, &rest](double t) {
                const double s = t / a_;
                return kernel_eval_shifted(kernel_, s * (2.0 + s)) * rest(a_ + t);
            };
            return detail::ts_integrate(f, 0.0, hi - a_, spec_).value;
        }
        auto f = [this, &rest](double u) { return kernel_at(u) * rest(u); };
        return detail::ts_integrate(f, lo, hi, spec_).value;
    }

    // int_0^pi fhat(dist(theta)) sin^(m-2)(theta) dtheta at fixed radii.
    double angular(double z, double rho, int m) const {
        const double s2 = z * z + rho * rho;
        double theta_hi = pi;
        if (compact_support(phantom_)) {
            const double r2 = phantom_.radius * phantom_.radius;
            if (z * rho == 0.0) {
                if (s2 >= r2) return 0.0;
            } else {
                const double c = (s2 - r2) / (2.0 * z * rho);
                if (c >= 1.0) return 0.0;
                if (c > -1.0) theta_hi = std::acos(c);
            }
        }
        auto f = [this, z, rho, s2, m](double theta) {
            const double d2 = s2 - 2.0 * z * rho * std::cos(theta);
            const double w = m == 2 ? 1.0 : std::pow(std::sin(theta), m - 2);
            return hat2(phantom_, dims_.k, d2) * w;
        };
        return detail::gl_integrate(f, 0.0, theta_hi);
    }

    const PiecewiseRadialKernel& kernel_;
    const Phantom& phantom_;
    const Dims& dims_;
    double a_;
    QuadratureSpec spec_;
};

void check_backprojection_args(const Dims& dims, const Eigen::VectorXd& x, double a) {
    dims.validate();
    if (x.size() != dims.n) throw std::domain_error("backprojection: x has wrong dimension");
    if (!(a > 0.0)) throw std::domain_error("backprojection: scale a must be positive");
}

}  // namespace

double Phantom::value(double r) const {
    if (r < 0.0) throw std::domain_error("Phantom::value: r must be >= 0");
    return point2(*this, r * r);
}

double Phantom::value_at(const Eigen::VectorXd& x) const { return value(x.norm()); }

Frame haar_frame(int n, int k, std::uint64_t seed) {
    Dims::checked(n, k);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    // sign fix: make the R diagonal positive so Q follows the invariant measure
    for (int j = 0; j < n; ++j)
        if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
    Frame frame;
    frame.basis = q.leftCols(k);
    frame.complement = q.rightCols(n - k);
    return frame;
}

double point_flat_distance(const Eigen::VectorXd& x, const FlatParam& flat) {
    const auto& comp = flat.frame.complement;
    if (x.size() != comp.rows() || flat.offset.size() != comp.cols())
        throw std::domain_error("point_flat_distance: dimension mismatch");
    return (comp.transpose() * x - flat.offset).norm();
}

double phantom_hat(const Phantom& phantom, int k, double d) {
    if (d < 0.0) throw std::domain_error("phantom_hat: d must be >= 0");
    if (k < 1) throw std::domain_error("phantom_hat: k must be >= 1");
    return hat2(phantom, k, d * d);
}

double kplane_numeric(const Phantom& phantom, const FlatParam& flat,
                      const QuadratureSpec& spec) {
    const int k = static_cast<int>(flat.frame.basis.cols());
    const double d = flat.offset.norm();
    const double d2 = d * d;
    double cut;
    if (compact_support(phantom)) {
        const double r2 = phantom.radius * phantom.radius;
        if (d2 >= r2) return 0.0;
        cut = std::sqrt(r2 - d2);
    } else {
        cut = support_radius(phantom);
    }
    auto f = [&phantom, d2, k](double s) {
        return point2(phantom, d2 + s * s) * (k == 1 ? 1.0 : std::pow(s, k - 1));
    };
    const double radial = detail::ts_integrate(f, 0.0, cut, spec).value;
    return (k == 1 ? 2.0 : sphere_area(k)) * radial;
}

double backproject_reduced(const PiecewiseRadialKernel& kernel, const Phantom& phantom,
                           const Dims& dims, const Eigen::VectorXd& x, double a,
                           const QuadratureSpec& spec) {
    check_backprojection_args(dims, x, a);
    const BackprojectionEngine engine(kernel, phantom, dims, a, spec);
    const double scale = std::pow(a, -dims.n);
    const double xn = x.norm();
    if (xn == 0.0) return scale * engine.g(0.0);

    // Beta projection law: t = |P_perp x|^2/|x|^2 ~ Beta(m/2, k/2).
    // G is even in z, so G(|x| sqrt(t)) is smooth in t; a Chebyshev fit keeps
    // the outer weighted quadrature free of inner-quadrature noise.
    const int m = dims.n - dims.k;
    const int degree = compact_support(phantom) ? 128 : 48;
    const auto h = detail::ChebInterp::fit([&engine, xn](double t) {
        return engine.g(xn * std::sqrt(t));
    }, 0.0, 1.0, degree);
    const double beta_norm =
        gamma_fn(0.5 * m) * gamma_fn(0.5 * dims.k) / gamma_fn(0.5 * dims.n);
    const double avg =
        singular_quad([&h](double t) { return h(t); }, 0.0, 1.0,
                      {0.5 * dims.k - 1.0, 0.5 * m - 1.0}, spec) /
        beta_norm;
    return scale * avg;
}

McEstimate backproject_mc(const PiecewiseRadialKernel& kernel, const Phantom& phantom,
                          const Dims& dims, const Eigen::VectorXd& x, double a,
                          int samples, std::uint64_t seed, const QuadratureSpec& spec) {
    check_backprojection_args(dims, x, a);
    if (samples < 1000) throw std::domain_error("backproject_mc: samples must be >= 1000");
    const BackprojectionEngine engine(kernel, phantom, dims, a, spec);
    const double scale = std::pow(a, -dims.n);
    const double xn = x.norm();
    if (xn == 0.0) return {scale * engine.g(0.0), 0.0};

    const int degree = compact_support(phantom) ? 256 : 48;
    const auto h = detail::ChebInterp::fit([&engine, xn](double t) {
        return engine.g(xn * std::sqrt(t));
    }, 0.0, 1.0, degree);

    std::mt19937_64 master(seed);
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < samples; ++i) {
        const Frame frame = haar_frame(dims.n, dims.k, master());
        const double z = (frame.complement.transpose() * x).norm();
        const double v = scale * h(std::min(1.0, (z * z) / (xn * xn)));
        const double delta = v - mean;
        mean += delta / (i + 1);
        m2 += delta * (v - mean);
    }
    const double variance = m2 / (samples - 1);
    return {mean, std::sqrt(variance / samples)};
}

double convolve_oracle(const Phantom& phantom, const RadialProfile& profile,
                       const Eigen::VectorXd& x, double a, const QuadratureSpec& spec) {
    const int n = phantom.n;
    if (x.size() != n) throw std::domain_error("convolve_oracle: x has wrong dimension");
    if (!(a > 0.0)) throw std::domain_error("convolve_oracle: scale a must be positive");
    QuadratureSpec inner = spec;
    inner.abs_tol *= 1e-2;
    inner.rel_tol = std::max(1e-13, spec.rel_tol * 1e-2);

    const double z = x.norm();
    const double fr2 = phantom.radius * phantom.radius;

    auto angular = [&phantom, z, n, fr2](double rho) {
        const double s2 = z * z + rho * rho;
        double theta_hi = pi;
        if (compact_support(phantom)) {
            if (z * rho == 0.0) {
                if (s2 >= fr2) return 0.0;
            } else {
                const double c = (s2 - fr2) / (2.0 * z * rho);
                if (c >= 1.0) return 0.0;
                if (c > -1.0) theta_hi = std::acos(c);
            }
        }
        auto f = [&phantom, z, rho, s2, n](double theta) {
            const double d2 = s2 - 2.0 * z * rho * std::cos(theta);
            const double w = n == 2 ? 1.0 : std::pow(std::sin(theta), n - 2);
            return point2(phantom, d2) * w;
        };
        return detail::gl_integrate(f, 0.0, theta_hi);
    };
    auto integrand = [&profile, &angular, a, n](double s) {
        return psi_eval(profile, s) * std::pow(s, n - 1) * angular(a * s);
    };

    // psi support: [0,1] for the indicator, [1, inf) for the power tail; the
    // phantom side cuts the radial range at (z + support)/a.
    const double far = (z + support_radius(phantom)) / a;
    std::vector<double> knots;
    double lo, hi;
    if (profile.family == ProfileFamily::IndicatorBall) {
        lo = 0.0;
        hi = 1.0;
        if (compact_support(phantom)) hi = std::min(hi, far);
    } else {
        lo = 1.0;
        hi = std::max(2.0, far);
        knots.push_back(2.0);
    }
    if (compact_support(phantom)) {
        knots.push_back((z + phantom.radius) / a);
        knots.push_back(std::abs(z - phantom.radius) / a);
    }
    if (!(hi > lo)) return 0.0;

    knots.push_back(lo);
    std::erase_if(knots, [lo, hi](double v) { return !(v > lo) || v >= hi; });
    knots.push_back(lo);
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    double radial = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        radial += detail::ts_integrate(integrand, knots[i], knots[i + 1], inner).value;
    return sphere_area(n - 1) * radial;
}

SweepResult invert_sweep(const Phantom& phantom, const Dims& dims,
                         const PiecewiseRadialKernel& kernel, const RadialProfile& profile,
                         const Eigen::VectorXd& x, double a_start, double factor, int steps,
                         SweepEngine engine, int mc_samples, std::uint64_t seed,
                         const QuadratureSpec& spec) {
    if (steps < 1) throw std::domain_error("invert_sweep: steps must be >= 1");
    if (!(factor > 0.0 && factor < 1.0))
        throw std::domain_error("invert_sweep: factor must lie in (0,1)");
    if (!(a_start > 0.0)) throw std::domain_error("invert_sweep: a_start must be positive");

    const double lambda = lambda_psi(profile);
    const double truth = phantom.value(x.norm());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    SweepResult result;
    double a = a_start;
    for (int i = 0; i < steps; ++i, a *= factor) {
        result.schedule.push_back(a);
        double estimate = nan;
        bool ok = true;
        try {
            if (engine == SweepEngine::Reduced)
                estimate = backproject_reduced(kernel, phantom, dims, x, a, spec) / lambda;
            else
                estimate =
                    backproject_mc(kernel, phantom, dims, x, a, mc_samples, seed + i, spec)
                        .estimate / lambda;
        } catch (const accuracy_error&) {
            ok = false;
        }
        result.estimates.push_back(estimate);
        result.errors.push_back(ok ? std::abs(estimate - truth) : nan);
        result.ok.push_back(ok);
    }
    for (int i = 0; i + 1 < steps; ++i) {
        const double e0 = result.errors[i], e1 = result.errors[i + 1];
        const bool usable = result.ok[i] && result.ok[i + 1] && e0 > 0.0 && e1 > 0.0;
        result.observed_orders.push_back(
            usable ? std::log(e0 / e1) / std::log(1.0 / factor) : nan);
    }
    return result;
}

double nievergelt_Ga(double t, double a) {
    if (!(a > 0.0)) throw std::domain_error("nievergelt_Ga: a must be positive");
    return w_xray_eval(2, std::abs(t) / a, XrayMethod::ClosedForm) / (pi * a * a);
}

}  // namespace kplane
