#include "sphgse/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "sphgse/roots.hpp"

namespace sphgse {

MixedModel::MixedModel(std::vector<ModelTerm> terms, std::string label)
    : terms_(std::move(terms)), label_(std::move(label)) {
    if (terms_.empty()) throw std::invalid_argument("model: no terms");
    std::sort(terms_.begin(), terms_.end(),
              [](const ModelTerm& a, const ModelTerm& b) { return a.degree < b.degree; });
    double total = 0.0;
    std::set<int> degrees;
    for (const auto& term : terms_) {
        if (term.degree < 2) throw std::invalid_argument("model: degree must be >= 2");
        if (!(term.weight >= 0.0) || !std::isfinite(term.weight))
            throw std::invalid_argument("model: weights must be finite and >= 0");
        if (!degrees.insert(term.degree).second)
            throw std::invalid_argument("model: duplicate degree");
        total += term.weight;
    }
    if (!(total > 0.0)) throw std::invalid_argument("model: all weights are zero");
}

double MixedModel::eval(double t, int order) const {
    if (order < 0 || order > 4) throw std::invalid_argument("model: order must be in 0..4");
    if (t < 0.0) throw std::domain_error("model: t must be >= 0");
    double sum = 0.0;
    for (const auto& term : terms_) {
        const int p = term.degree;
        if (p < order) continue;
        double factor = term.weight;
        for (int k = 0; k < order; ++k) factor *= static_cast<double>(p - k);
        const int e = p - order;
        // t^e with the 0^0 = 1 convention
        double power = 1.0;
        if (e > 0) power = std::pow(t, e);
        sum += factor * power;
    }
    return sum;
}

double MixedModel::dfrak(double t) const {
    const double x2 = eval(t, 2);
    if (!(x2 > 0.0))
        throw std::domain_error("dfrak: xi''(t) vanishes (pure p-spin at t=0)");
    const double x3 = eval(t, 3);
    const double x4 = eval(t, 4);
    return 0.75 * std::pow(x2, -2.5) * x3 * x3 - 0.5 * std::pow(x2, -1.5) * x4;
}

bool MixedModel::quadratic_weight() const {
    for (const auto& term : terms_)
        if (term.degree == 2) return term.weight > 0.0;
    return false;
}

bool MixedModel::is_pure_quadratic() const {
    for (const auto& term : terms_)
        if (term.degree != 2 && term.weight > 0.0) return false;
    return quadratic_weight();
}

MixedModel MixedModel::scaled(double lambda_sq) const {
    auto terms = terms_;
    for (auto& term : terms) term.weight *= lambda_sq;
    return MixedModel(std::move(terms), label_);
}

bool SignProfile::all_nonpositive() const {
    for (const auto& iv : intervals)
        if (iv.sign == IntervalSign::positive) return false;
    return true;
}

bool SignProfile::all_nonnegative() const {
    for (const auto& iv : intervals)
        if (iv.sign == IntervalSign::negative) return false;
    return true;
}

SignProfile sign_intervals(const MixedModel& model, double resolution, double refine_tol) {
    if (!(resolution > 0.0) || resolution > 1e-3)
        throw std::invalid_argument("sign_intervals: resolution must be in (0, 1e-3]");
    if (!(refine_tol > 0.0) || refine_tol > resolution)
        throw std::invalid_argument("sign_intervals: refine_tol must be in (0, resolution]");

    // dfrak is singular at 0 when there is no degree-2 term.
    const double t0 = model.quadratic_weight() ? 0.0 : resolution;

    const auto d = [&](double t) { return model.dfrak(t); };

    const int n = static_cast<int>(std::ceil((1.0 - t0) / resolution));
    std::vector<double> ts, vals;
    ts.reserve(n + 1);
    vals.reserve(n + 1);
    double max_abs = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = (i == n) ? 1.0 : t0 + i * resolution;
        ts.push_back(t);
        vals.push_back(d(t));
        max_abs = std::max(max_abs, std::abs(vals.back()));
    }

    const double zero_floor = 1e-12 * (1.0 + max_abs);
    const auto sgn = [&](double v) -> int {
        if (std::abs(v) < zero_floor) return 0;
        return v > 0.0 ? 1 : -1;
    };

    SignProfile profile;
    profile.resolution = resolution;
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        const int sa = sgn(vals[i]);
        const int sb = sgn(vals[i + 1]);
        if (sa != 0 && sb != 0 && sa != sb) {
            const double r = bisect(d, ts[i], ts[i + 1], refine_tol);
            if (r > 0.0 && r < 1.0) profile.boundaries.push_back(r);
        }
    }

    // Build the tiling from the detected boundaries; the sign of each piece
    // comes from re-evaluating dfrak at its midpoint.
    std::vector<double> cuts;
    cuts.push_back(0.0);
    cuts.insert(cuts.end(), profile.boundaries.begin(), profile.boundaries.end());
    cuts.push_back(1.0);
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        SignInterval iv;
        iv.left = cuts[i];
        iv.right = cuts[i + 1];
        const double mid = std::max(0.5 * (iv.left + iv.right), t0);
        const int s = sgn(d(mid));
        // an interval counts as zero only if |dfrak| stays below the floor
        // across the whole piece
        bool all_zero = (s == 0);
        if (all_zero) {
            for (int k = 1; k < 8 && all_zero; ++k) {
                const double t = std::max(iv.left + k * (iv.right - iv.left) / 8.0, t0);
                all_zero = sgn(d(t)) == 0;
            }
        }
        if (all_zero)
            iv.sign = IntervalSign::zero;
        else
            iv.sign = (s >= 0) ? IntervalSign::positive : IntervalSign::negative;
        profile.intervals.push_back(iv);
    }
    return profile;
}

MixedModel sk_model() { return MixedModel({{2, 1.0}}, "sk"); }

MixedModel pure_model(int p) {
    if (p < 2) throw std::invalid_argument("pure_model: p must be >= 2");
    return MixedModel({{p, 1.0}}, "pure-" + std::to_string(p));
}

MixedModel two_plus_p_model(int p, double mu) {
    if (p < 3) throw std::invalid_argument("two_plus_p_model: p must be >= 3");
    if (!(mu >= 0.0) || !(mu <= 1.0))
        throw std::invalid_argument("two_plus_p_model: mu must be in [0,1]");
    std::vector<ModelTerm> terms;
    if (mu > 0.0) terms.push_back({2, mu});
    if (mu < 1.0) terms.push_back({p, 1.0 - mu});
    return MixedModel(std::move(terms), "2+" + std::to_string(p));
}

MixedModel sinh_minus_linear_model(double tail_bound) {
    return truncate_series({SeriesRule::Kind::sinh_minus_linear, 0, 0.0}, tail_bound);
}

MixedModel truncate_series(const SeriesRule& rule, double tail_bound, int max_degree) {
    if (!(tail_bound > 0.0)) throw std::invalid_argument("truncate_series: tail_bound must be > 0");
    switch (rule.kind) {
        case SeriesRule::Kind::pure_p:
            return pure_model(rule.p);
        case SeriesRule::Kind::two_plus_p:
            return two_plus_p_model(rule.p, rule.mu);
        case SeriesRule::Kind::sinh_minus_linear: {
            // sinh(t) - t = sum_{k>=1} t^{2k+1} / (2k+1)!
            std::vector<ModelTerm> terms;
            double coeff = 1.0 / 6.0;  // 1/3!
            int degree = 3;
            while (degree <= max_degree) {
                terms.push_back({degree, coeff});
                // tail sum from the next degree on; bounded by a geometric
                // series with ratio coeff_{k+1}/coeff_k < 1/(deg+2)(deg+3)
                const double next = coeff / ((degree + 2.0) * (degree + 3.0));
                const double ratio = 1.0 / ((degree + 4.0) * (degree + 5.0));
                const double tail = next / (1.0 - ratio);
                if (tail < tail_bound) return MixedModel(std::move(terms), "sinh-minus-linear");
                coeff = next;
                degree += 2;
            }
            throw std::runtime_error("truncate_series: tail_bound not reachable within max_degree");
        }
    }
    throw std::invalid_argument("truncate_series: unknown rule");
}

} // namespace sphgse
