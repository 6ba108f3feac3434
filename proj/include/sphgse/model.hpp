#pragma once

#include <string>
#include <vector>

namespace sphgse {

struct ModelTerm {
    int degree = 0;     // p >= 2
    double weight = 0;  // beta_p^2 >= 0
};

/// Mixed p-spin mixture xi(t) = sum_p beta_p^2 t^p with derivatives up to
/// order 4 evaluated in closed form.
class MixedModel {
public:
    MixedModel(std::vector<ModelTerm> terms, std::string label = "");

    /// order-th derivative of xi at t, order in 0..4.
    double eval(double t, int order = 0) const;

    /// Structure function d(t) = (xi''^{-1/2})''(t) in closed form:
    ///   (3/4) xi''^{-5/2} xi'''^2 - (1/2) xi''^{-3/2} xi''''.
    /// Throws when xi''(t) = 0 (pure p-spin at t = 0).
    double dfrak(double t) const;

    const std::vector<ModelTerm>& terms() const { return terms_; }
    const std::string& label() const { return label_; }

    double xi1() const { return eval(1.0, 0); }
    double xi1_prime() const { return eval(1.0, 1); }
    double xi1_second() const { return eval(1.0, 2); }
    double xi0_second() const { return eval(0.0, 2); }

    /// True when xi'' (0) = 0, i.e. no degree-2 term.
    bool quadratic_weight() const;

    /// Pure degree-2 model (scaled SK).
    bool is_pure_quadratic() const;

    /// Model with every weight multiplied by lambda_sq.
    MixedModel scaled(double lambda_sq) const;

private:
    std::vector<ModelTerm> terms_;  // sorted by degree, distinct, weight >= 0
    std::string label_;
};

enum class IntervalSign { negative, positive, zero };

struct SignInterval {
    double left = 0;
    double right = 0;
    IntervalSign sign = IntervalSign::zero;
};

/// Sign decomposition of dfrak over [0,1]: boundaries are detected roots,
/// intervals tile [0,1] with alternating (or zero) signs.
struct SignProfile {
    std::vector<double> boundaries;  // interior roots, increasing
    std::vector<SignInterval> intervals;
    double resolution = 0;

    bool all_nonpositive() const;  // N = [0,1]
    bool all_nonnegative() const;  // P = [0,1]
};

/// Grid scan of dfrak at the given resolution, every sign change refined by
/// bisection to refine_tol. Intervals on which |dfrak| stays below
/// 1e-12*(1+max|dfrak|) are labeled zero. The scan starts at `resolution`
/// when xi''(0) = 0.
SignProfile sign_intervals(const MixedModel& model, double resolution = 1e-4,
                           double refine_tol = 1e-10);

/// Named analytic coefficient rules admitted through polynomial truncation.
struct SeriesRule {
    enum class Kind { sinh_minus_linear, pure_p, two_plus_p } kind;
    int p = 0;        // pure_p / two_plus_p
    double mu = 0;    // two_plus_p: mu t^2 + (1-mu) t^p
};

/// Truncates the rule's power series so the omitted tail has total weight
/// below tail_bound on [0,1]; exact rules (pure_p, two_plus_p) pass through.
MixedModel truncate_series(const SeriesRule& rule, double tail_bound,
                           int max_degree = 200);

MixedModel sk_model();                         // t^2
MixedModel pure_model(int p);                  // t^p
MixedModel two_plus_p_model(int p, double mu); // mu t^2 + (1-mu) t^p
MixedModel sinh_minus_linear_model(double tail_bound = 1e-30);

} // namespace sphgse
