#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace sphgse {

/// Bisection on a bracketing interval [lo, hi] with f(lo)*f(hi) <= 0.
/// Returns the midpoint of the final bracket of width <= tol.
template <typename F>
double bisect(const F& f, double lo, double hi, double tol, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::invalid_argument("bisect: root not bracketed");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

/// Newton iteration safeguarded by a maintained bracket; falls back to
/// bisection steps whenever Newton leaves the bracket or stalls.
template <typename F, typename DF>
double newton_bisect(const F& f, const DF& df, double lo, double hi, double x0,
                     double tol, int max_iter = 100) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo * fhi > 0.0) throw std::invalid_argument("newton_bisect: root not bracketed");
    double x = x0;
    for (int i = 0; i < max_iter; ++i) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (flo * fx < 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        const double d = df(x);
        double next = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= tol) return next;
        x = next;
    }
    return x;
}

} // namespace sphgse
