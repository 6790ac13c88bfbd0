#pragma once

// Internal tanh-sinh backend shared by the public quadrature entry points
// and the transform integrals. Not installed.

#include <boost/math/policies/policy.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "kplane/numerics.hpp"

namespace kplane::detail {

// Keep going on non-convergence; we inspect the error estimate ourselves
// and raise accuracy_error with the best estimate attached.
using quad_policy = boost::math::policies::policy<
    boost::math::policies::evaluation_error<boost::math::policies::errno_on_error>>;

using ts_integrator = boost::math::quadrature::tanh_sinh<double, quad_policy>;

inline ts_integrator& integrator_for(int max_levels) {
    thread_local std::map<int, ts_integrator> cache;
    auto it = cache.find(max_levels);
    if (it == cache.end())
        it = cache.emplace(max_levels, ts_integrator(static_cast<std::size_t>(max_levels))).first;
    return it->second;
}

struct ts_result {
    double value;
    double abs_err;
};

// Integrate f over a finite interval [a,b]; throws accuracy_error when the
// requested tolerance is demonstrably missed.
template <class F>
ts_result ts_integrate(F&& f, double a, double b, const QuadratureSpec& spec) {
    if (a == b) return {0.0, 0.0};
    const double tol = std::max(std::min(spec.rel_tol, spec.abs_tol), 5e-15);
    const int levels = std::clamp(spec.max_subdivisions, 1, 20);
    double err = 0.0, l1 = 0.0;
    const double value = integrator_for(levels).integrate(std::forward<F>(f), a, b, tol, &err, &l1);
    const double hw = 0.5 * std::abs(b - a);
    const double abs_err = err * hw;
    const bool converged = (err <= tol * l1) || (abs_err <= spec.abs_tol);
    // Cancellation near endpoints puts a noise floor under the level-to-level
    // differences; only report failure when the estimate misses the target by
    // a clear margin.
    if (!converged && abs_err > 100.0 * std::max(spec.abs_tol, spec.rel_tol * std::abs(value)))
        throw accuracy_error("quadrature failed to converge", value, abs_err);
    return {value, abs_err};
}

// Integrate f over [a, +inf): the tail beyond max(a,1) is mapped by r = 1/t,
// which turns algebraically decaying integrands into polynomial ones.
template <class F>
ts_result ts_integrate_to_inf(F&& f, double a, const QuadratureSpec& spec) {
    const double cut = std::max(a, 1.0);
    ts_result head{0.0, 0.0};
    if (cut > a) head = ts_integrate(f, a, cut, spec);
    auto mapped = [&f](double t) {
        const double r = 1.0 / t;
        const double fv = f(r);
        // avoid 0 * inf when f underflows while r^2 overflows
        if (fv == 0.0) return 0.0;
        return fv * r * r;
    };
    const ts_result tail = ts_integrate(mapped, 0.0, 1.0 / cut, spec);
    return {head.value + tail.value, head.abs_err + tail.abs_err};
}

}  // namespace kplane::detail
