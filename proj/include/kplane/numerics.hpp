#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace kplane {

/// Thrown when a quadrature routine cannot reach the requested tolerance.
/// Carries the best estimate obtained so far and the estimated error bound.
class accuracy_error : public std::runtime_error {
  public:
    accuracy_error(const std::string& what, double best_estimate, double error_bound)
        : std::runtime_error(what), best_(best_estimate), bound_(error_bound) {}

    double best_estimate() const noexcept { return best_; }
    double error_bound() const noexcept { return bound_; }

  private:
    double best_;
    double bound_;
};

/// Tolerances and limits shared by all quadrature engines.
/// endpoint_exponents, when present, describe algebraic endpoint
/// singularities (b-x)^alpha (x-a)^beta of the integrand.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 15;
    std::optional<std::pair<double, double>> endpoint_exponents;

    void validate() const;

    // kernel-level integrals (single integrals over kernel expressions)
    static QuadratureSpec kernel_level() { return QuadratureSpec{1e-10, 1e-10, 15, {}}; }
    // transform-level multiple integrals (backprojection, convolution)
    static QuadratureSpec transform_level() { return QuadratureSpec{1e-8, 1e-8, 15, {}}; }
};

using RealFn = std::function<double(double)>;

/// Gamma function for positive arguments.
double gamma_fn(double x);

/// Gauss hypergeometric function F(a,b;c;z) for z in [0,1).
/// Power series for z <= 1/2, the 1-z linear transformation otherwise.
double gauss_2f1(double a, double b, double c, double z);

/// Adaptive integration of f over [a,b]; b may be +infinity, in which
/// case the tail is mapped by r = 1/t.
double adaptive_quad(const RealFn& f, double a, double b,
                     const QuadratureSpec& spec = QuadratureSpec::kernel_level());

/// Integrates (b-x)^alpha (x-a)^beta g(x) over [a,b] for alpha,beta > -1.
double singular_quad(const RealFn& g, double a, double b,
                     std::pair<double, double> exponents,
                     const QuadratureSpec& spec = QuadratureSpec::kernel_level());

}  // namespace kplane
