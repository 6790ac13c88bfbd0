#pragma once

// Small internal helpers: Gauss-Legendre nodes and Chebyshev fits used by
// the transform integrals. Not installed.

#include <cmath>
#include <utility>
#include <vector>

namespace kplane::detail {

struct GaussLegendre {
    std::vector<double> nodes;    // on (-1,1)
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        nodes.resize(n);
        weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int j = 2; j <= n; ++j) {
                    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

inline const GaussLegendre& gl64() {
    static const GaussLegendre rule(64);
    return rule;
}

// Integrate f over [lo,hi] with the cached 64-point rule; for smooth
// integrands only.
template <class F>
double gl_integrate(F&& f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const auto& rule = gl64();
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(c + h * rule.nodes[i]);
    return h * sum;
}

// Chebyshev-Lobatto fit on [a,b]; evaluation by direct T_k recurrence.
class ChebInterp {
  public:
    template <class F>
    static ChebInterp fit(F&& f, double a, double b, int degree) {
        ChebInterp c;
        c.a_ = a;
        c.b_ = b;
        const int n = degree;
        std::vector<double> v(n + 1);
        for (int j = 0; j <= n; ++j) {
            const double t = std::cos(M_PI * j / n);
            v[j] = f(0.5 * (a + b) + 0.5 * (b - a) * t);
        }
        c.coef_.assign(n + 1, 0.0);
        for (int k = 0; k <= n; ++k) {
            double s = 0.5 * (v[0] + (k % 2 == 0 ? v[n] : -v[n]));
            for (int j = 1; j < n; ++j) s += v[j] * std::cos(M_PI * j * k / n);
            c.coef_[k] = 2.0 * s / n;
        }
        return c;
    }

    double operator()(double x) const {
        const int n = static_cast<int>(coef_.size()) - 1;
        const double t = (2.0 * x - a_ - b_) / (b_ - a_);
        double sum = 0.5 * coef_[0];
        double t0 = 1.0, t1 = t;
        for (int k = 1; k <= n; ++k) {
            const double w = (k == n) ? 0.5 : 1.0;
            sum += w * coef_[k] * t1;
            const double t2 = 2.0 * t * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        return sum;
    }

  private:
    double a_ = 0.0, b_ = 1.0;
    std::vector<double> coef_;
};

}  // namespace kplane::detail
