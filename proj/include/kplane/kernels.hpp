#pragma once

#include <functional>
#include <vector>

#include "kplane/numerics.hpp"

namespace kplane {

/// Problem dimensions: ambient dimension n, plane dimension k.
/// ell is k/2 for k even and (k-1)/2 for k odd.
struct Dims {
    int n = 2;
    int k = 1;

    bool k_even() const noexcept { return k % 2 == 0; }
    int ell() const noexcept { return k_even() ? k / 2 : (k - 1) / 2; }
    void validate() const;
    static Dims checked(int n, int k) {
        Dims d{n, k};
        d.validate();
        return d;
    }
};

enum class KernelFamily { TheoremA, TheoremBEven, TheoremBOdd, Custom };

/// One term coef * (r^2-1)^alpha * r^beta of a kernel's outside branch.
struct KernelTerm {
    double coef;
    double alpha;
    double beta;
};

/// Reconstruction kernel w: a constant on [0,1] plus a finite term sum
/// beyond. The TheoremA family has no term list; its outside branch is
/// evaluated by w_xray_eval.
struct PiecewiseRadialKernel {
    double inside_value = 0.0;
    std::vector<KernelTerm> outside_terms;
    KernelFamily family = KernelFamily::Custom;
    Dims dims;
};

enum class ProfileFamily { IndicatorBall, PowerTail };

/// Mollifier psi: the unit-ball indicator, or the power-tail family
/// (r^2-1)^ell / r^(n+2*ell+1) supported on r > 1.
struct RadialProfile {
    ProfileFamily family = ProfileFamily::IndicatorBall;
    Dims dims;
    double lambda = 0.0;  // integral of psi(|x|) over R^n, set by make_profile
};

enum class XrayMethod { ClosedForm, Hypergeometric, Quadrature };

/// Area of the unit sphere S^(m-1) in R^m.
double sphere_area(int m);

/// The constant c = sigma_{k-1} sigma_{n-k-1} / sigma_{n-1} of the Abel
/// equation tying w to psi.
double abel_constant(const Dims& dims);

double psi_eval(const RadialProfile& profile, double r);

/// X-ray (k=1) kernel of any dimension n >= 2. ClosedForm is available for
/// n in {2,3,4} only; Hypergeometric and Quadrature work for all n.
double w_xray_eval(int n, double r, XrayMethod method);

/// One application of (1/(2r)) d/dr to a term list, merging equal
/// (alpha,beta) pairs.
std::vector<KernelTerm> halfd_apply(const std::vector<KernelTerm>& terms);

/// Kernel for general plane dimension k via the ell-fold derivative
/// recurrence; even and odd k take separate paths.
PiecewiseRadialKernel w_theoremB_build(const Dims& dims);

/// X-ray kernel wrapped in the piecewise representation (delegates to
/// w_xray_eval when evaluated).
PiecewiseRadialKernel w_theoremA_kernel(const Dims& dims);

/// Kernel matching the given mollifier family.
PiecewiseRadialKernel make_kernel(ProfileFamily family, const Dims& dims);

double kernel_eval(const PiecewiseRadialKernel& kernel, double r);

/// Evaluate w at r = sqrt(1 + q), taking q = r^2 - 1 >= 0 as the exact input.
/// Avoids the cancellation in forming r^2 - 1 near the unit sphere, where the
/// kernels are singular.
double kernel_eval_shifted(const PiecewiseRadialKernel& kernel, double q);

/// Leading power of r^2 - 1 in w(r) as r -> 1+ (e.g. -1/2 for the x-ray
/// kernels); 0 when w stays bounded.
double kernel_edge_exponent(const PiecewiseRadialKernel& kernel);

/// Normalization lambda = integral of psi(|x|) dx, in closed form.
double lambda_psi(const RadialProfile& profile);

/// Same normalization by direct quadrature of sigma_{n-1} * int psi(r) r^(n-1) dr;
/// cross-check route for lambda_psi.
double lambda_psi_quadrature(const RadialProfile& profile,
                             const QuadratureSpec& spec = QuadratureSpec::kernel_level());

RadialProfile make_profile(ProfileFamily family, const Dims& dims);

/// Substituted pair for the fractional-integral form of the Abel equation:
/// w~(u) = u^((n-k)/2-1) w(sqrt u), psi~(u) = 2 u^(n/2-1) psi(sqrt u) / (c Gamma(k/2)).
struct TildePair {
    std::function<double(double)> w_tilde;
    std::function<double(double)> psi_tilde;
};

TildePair tilde_pair(const PiecewiseRadialKernel& kernel, const RadialProfile& profile);

}  // namespace kplane
