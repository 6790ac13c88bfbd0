#include "kplane/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail/special.hpp"

namespace kplane {

namespace {
constexpr double pi = 3.14159265358979323846;
constexpr double merge_tol = 1e-14;  // alpha, beta are half-integers; matching is exact

double factorial(int m) {
    double f = 1.0;
    for (int j = 2; j <= m; ++j) f *= j;
    return f;
}

// r^2 - 1 without cancellation for r near 1.
double rsq_minus_one(double r) { return (r - 1.0) * (r + 1.0); }
}  // namespace

void Dims::validate() const {
    if (n < 2) throw std::domain_error("Dims: n must be >= 2");
    if (k < 1 || k >= n) throw std::domain_error("Dims: k must satisfy 1 <= k < n");
    const int l = ell();
    if (l < 0) throw std::domain_error("Dims: ell must be >= 0");
    // Guards for the Gamma arguments of the Theorem B constants; both are
    // implied by k < n.
    if (k_even() && !(n / 2.0 - l > 0.0))
        throw std::domain_error("Dims: n/2 - ell must be positive");
    if (!k_even() && !((n - 1) / 2.0 - l > 0.0))
        throw std::domain_error("Dims: (n-1)/2 - ell must be positive");
}

double sphere_area(int m) {
    if (m < 1) throw std::domain_error("sphere_area: m must be >= 1");
    return 2.0 * std::pow(pi, 0.5 * m) / gamma_fn(0.5 * m);
}

double abel_constant(const Dims& dims) {
    dims.validate();
    return sphere_area(dims.k) * sphere_area(dims.n - dims.k) / sphere_area(dims.n);
}

double psi_eval(const RadialProfile& profile, double r) {
    if (r < 0.0) throw std::domain_error("psi_eval: r must be >= 0");
    switch (profile.family) {
        case ProfileFamily::IndicatorBall:
            return r <= 1.0 ? 1.0 : 0.0;
        case ProfileFamily::PowerTail: {
            if (r <= 1.0) return 0.0;
            const int ell = profile.dims.ell();
            const int n = profile.dims.n;
            // (r^2-1)^ell r^-(n+2ell+1) written as ((r^2-1)/r^2)^ell r^-(n+1)
            // so neither factor overflows for large r.
            const double ratio =
                (r > 2.0) ? 1.0 - 1.0 / (r * r) : rsq_minus_one(r) / (r * r);
            return std::pow(ratio, ell) * std::pow(r, -(n + 1.0));
        }
    }
    return 0.0;
}

double w_xray_eval(int n, double r, XrayMethod method) {
    if (n < 2) throw std::domain_error("w_xray_eval: n must be >= 2");
    if (r < 0.0) throw std::domain_error("w_xray_eval: r must be >= 0");
    if (r <= 1.0) return 1.0;

    const double q = rsq_minus_one(r);
    switch (method) {
        case XrayMethod::ClosedForm:
            switch (n) {
                case 2:
                    return 1.0 - r / std::sqrt(q);
                case 3:
                    return (2.0 / pi) * (std::asin(1.0 / r) - 1.0 / std::sqrt(q));
                case 4:
                    return 1.0 - (2.0 * r * r - 1.0) / (2.0 * r * std::sqrt(q));
                default:
                    throw std::invalid_argument(
                        "w_xray_eval: closed form only available for n in {2,3,4}");
            }
        case XrayMethod::Hypergeometric: {
            const double z = 1.0 / (r * r);
            const double omz = q / (r * r);
            const double f =
                detail::hyp2f1_with_complement(1.5, 0.5 * n, 0.5 * n + 1.0, z, omz);
            return -gamma_fn(0.5 * (n - 1)) * std::pow(r, -n) * f /
                   (2.0 * std::sqrt(pi) * gamma_fn(0.5 * n + 1.0));
        }
        case XrayMethod::Quadrature: {
            // int_0^1 v^(n/2-1) (r^2-v)^(-3/2) dv with v = 1-t, so the peak
            // at v -> 1 sits at t = 0 and r^2-v = q+t is computed exactly.
            auto g = [q](double t) { return std::pow(q + t, -1.5); };
            const double integral =
                singular_quad(g, 0.0, 1.0, {0.5 * n - 1.0, 0.0});
            return -gamma_fn(0.5 * (n - 1)) * std::pow(r, 3.0 - n) * integral /
                   (2.0 * std::sqrt(pi) * gamma_fn(0.5 * n));
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::vector<KernelTerm> halfd_apply(const std::vector<KernelTerm>& terms) {
    std::vector<KernelTerm> out;
    auto push = [&out](double coef, double alpha, double beta) {
        if (coef == 0.0) return;
        for (auto& t : out) {
            if (std::abs(t.alpha - alpha) < merge_tol && std::abs(t.beta - beta) < merge_tol) {
                t.coef += coef;
                return;
            }
        }
        out.push_back({coef, alpha, beta});
    };
    // (1/(2r)) d/dr [(r^2-1)^a r^b] = a (r^2-1)^(a-1) r^b + (b/2) (r^2-1)^a r^(b-2)
    for (const auto& t : terms) {
        push(t.coef * t.alpha, t.alpha - 1.0, t.beta);
        push(t.coef * t.beta / 2.0, t.alpha, t.beta - 2.0);
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const KernelTerm& t) { return t.coef == 0.0; }),
              out.end());
    return out;
}

PiecewiseRadialKernel w_theoremB_build(const Dims& dims) {
    dims.validate();
    const int n = dims.n;
    const int ell = dims.ell();

    PiecewiseRadialKernel kernel;
    kernel.inside_value = 0.0;
    kernel.dims = dims;

    std::vector<KernelTerm> terms;
    double scale;
    double beta_shift;
    int applications;
    if (dims.k_even()) {
        kernel.family = KernelFamily::TheoremBEven;
        terms = {{1.0, static_cast<double>(ell), -(2.0 * ell + 3.0)}};
        applications = ell;
        beta_shift = 2.0 + 2.0 * ell - n;
        scale = gamma_fn(0.5 * n - ell) / gamma_fn(0.5 * n);
    } else {
        kernel.family = KernelFamily::TheoremBOdd;
        terms = {{1.0, ell + 0.5, -(2.0 * ell + 2.0)}};
        applications = ell + 1;
        beta_shift = 3.0 + 2.0 * ell - n;
        scale = gamma_fn(0.5 * (n - 1) - ell) * factorial(ell) /
                (gamma_fn(0.5 * n) * gamma_fn(ell + 1.5));
    }
    for (int j = 0; j < applications; ++j) terms = halfd_apply(terms);
    for (auto& t : terms) {
        t.beta += beta_shift;
        t.coef *= scale;
    }
    kernel.outside_terms = std::move(terms);
    return kernel;
}

PiecewiseRadialKernel w_theoremA_kernel(const Dims& dims) {
    dims.validate();
    if (dims.k != 1)
        throw std::domain_error("w_theoremA_kernel: Theorem A applies to k = 1 only");
    PiecewiseRadialKernel kernel;
    kernel.inside_value = 1.0;
    kernel.family = KernelFamily::TheoremA;
    kernel.dims = dims;
    return kernel;
}

PiecewiseRadialKernel make_kernel(ProfileFamily family, const Dims& dims) {
    dims.validate();
    if (family == ProfileFamily::IndicatorBall) {
        if (dims.k >= 2)
            throw std::domain_error(
                "make_kernel: the indicator mollifier admits no kernel for k >= 2");
        return w_theoremA_kernel(dims);
    }
    return w_theoremB_build(dims);
}

double kernel_eval(const PiecewiseRadialKernel& kernel, double r) {
    if (r < 0.0) throw std::domain_error("kernel_eval: r must be >= 0");
    if (r <= 1.0) return kernel.inside_value;
    return kernel_eval_shifted(kernel, rsq_minus_one(r));
}

double kernel_eval_shifted(const PiecewiseRadialKernel& kernel, double q) {
    if (q < 0.0) throw std::domain_error("kernel_eval_shifted: q must be >= 0");
    if (q == 0.0) return kernel.inside_value;
    if (kernel.family == KernelFamily::TheoremA) {
        const int n = kernel.dims.n;
        const double r = std::sqrt(1.0 + q);
        switch (n) {
            case 2:
                return 1.0 - r / std::sqrt(q);
            case 3:
                return (2.0 / pi) * (std::asin(1.0 / r) - 1.0 / std::sqrt(q));
            case 4:
                return 1.0 - (1.0 + 2.0 * q) / (2.0 * r * std::sqrt(q));
            default: {
                const double z = 1.0 / (1.0 + q);
                const double omz = q / (1.0 + q);
                const double f =
                    detail::hyp2f1_with_complement(1.5, 0.5 * n, 0.5 * n + 1.0, z, omz);
                return -gamma_fn(0.5 * (n - 1)) * std::pow(1.0 + q, -0.5 * n) * f /
                       (2.0 * std::sqrt(pi) * gamma_fn(0.5 * n + 1.0));
            }
        }
    }
    double sum = 0.0;
    for (const auto& t : kernel.outside_terms)
        sum += t.coef * std::pow(q, t.alpha) * std::pow(1.0 + q, 0.5 * t.beta);
    if (!std::isfinite(sum)) {
        // Overflow of a (r^2-1)^alpha factor with alpha < 0 as r -> 1+:
        // report a signed unbounded value taken from the dominant terms.
        const double min_alpha = kernel_edge_exponent(kernel);
        double lead = 0.0;
        for (const auto& t : kernel.outside_terms)
            if (std::abs(t.alpha - min_alpha) < merge_tol)
                lead += t.coef * std::pow(1.0 + q, 0.5 * t.beta);
        return std::copysign(std::numeric_limits<double>::infinity(), lead);
    }
    return sum;
}

double kernel_edge_exponent(const PiecewiseRadialKernel& kernel) {
    if (kernel.family == KernelFamily::TheoremA) return -0.5;
    double min_alpha = 0.0;
    for (const auto& t : kernel.outside_terms) min_alpha = std::min(min_alpha, t.alpha);
    return min_alpha;
}

double lambda_psi(const RadialProfile& profile) {
    const int n = profile.dims.n;
    switch (profile.family) {
        case ProfileFamily::IndicatorBall:
            return std::pow(pi, 0.5 * n) / gamma_fn(0.5 * n + 1.0);
        case ProfileFamily::PowerTail: {
            const int ell = profile.dims.ell();
            return sphere_area(n) * std::sqrt(pi) * factorial(ell) /
                   (2.0 * gamma_fn(ell + 1.5));
        }
    }
    return 0.0;
}

double lambda_psi_quadrature(const RadialProfile& profile, const QuadratureSpec& spec) {
    const int n = profile.dims.n;
    auto f = [&profile, n](double r) {
        const double p = psi_eval(profile, r);
        // psi underflows long before r^(n-1) overflows; avoid 0 * inf
        return p == 0.0 ? 0.0 : p * std::pow(r, n - 1);
    };
    const double upper = std::numeric_limits<double>::infinity();
    return sphere_area(n) * adaptive_quad(f, 0.0, upper, spec);
}

RadialProfile make_profile(ProfileFamily family, const Dims& dims) {
    dims.validate();
    RadialProfile profile;
    profile.family = family;
    profile.dims = dims;
    profile.lambda = lambda_psi(profile);
    return profile;
}

TildePair tilde_pair(const PiecewiseRadialKernel& kernel, const RadialProfile& profile) {
    if (kernel.dims.n != profile.dims.n || kernel.dims.k != profile.dims.k)
        throw std::invalid_argument("tilde_pair: kernel and profile must share dims");
    const Dims dims = kernel.dims;
    const double c = abel_constant(dims);
    const double gk2 = gamma_fn(0.5 * dims.k);
    TildePair pair;
    pair.w_tilde = [kernel, dims](double u) {
        if (u <= 0.0) throw std::domain_error("w_tilde: u must be positive");
        return std::pow(u, 0.5 * (dims.n - dims.k) - 1.0) * kernel_eval(kernel, std::sqrt(u));
    };
    pair.psi_tilde = [profile, dims, c, gk2](double u) {
        if (u <= 0.0) throw std::domain_error("psi_tilde: u must be positive");
        return 2.0 * std::pow(u, 0.5 * dims.n - 1.0) * psi_eval(profile, std::sqrt(u)) /
               (c * gk2);
    };
    return pair;
}

}  // namespace kplane
