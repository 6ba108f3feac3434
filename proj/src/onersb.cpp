#include "sphgse/onersb.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sphgse/roots.hpp"

namespace sphgse {

double a_of_y(double y) {
    if (!(y > 1.0)) throw std::domain_error("a_of_y: y must be > 1");
    const double eps = y - 1.0;
    if (eps < 1e-4) {
        // a(1+eps) = sum_k (-eps)^k / ((k+1)(k+2))
        return 0.5 - eps / 6.0 + eps * eps / 12.0 - eps * eps * eps / 20.0;
    }
    return (1.0 / eps) * ((y / eps) * std::log(y) - 1.0);
}

double a_of_y_prime(double y) {
    if (!(y > 1.0)) throw std::domain_error("a_of_y_prime: y must be > 1");
    const double eps = y - 1.0;
    if (eps < 1e-4) {
        return -1.0 / 6.0 + eps / 6.0 - 0.15 * eps * eps;
    }
    const double L = std::log(y);
    return (L + 2.0) / (eps * eps) - 2.0 * y * L / (eps * eps * eps);
}

OneRsbSolution solve_master(const MixedModel& model) {
    OneRsbSolution sol;
    const double xi1 = model.xi1();
    const double xi1p = model.xi1_prime();
    const double target = xi1 / xi1p;
    if (!(target > 0.0) || target > 0.5 + 1e-12)
        throw std::domain_error("solve_master: xi(1)/xi'(1) must lie in (0, 1/2]");

    if (target >= 0.5 - 1e-14) {
        sol.y = 1.0;
        sol.m = 0.0;
        sol.c = 1.0 / std::sqrt(xi1p);
        sol.converged = true;
        sol.sk_degenerate = true;
        return sol;
    }

    double lo = 1.0 + 1e-12;
    double hi = 2.0;
    while (a_of_y(hi) > target) hi *= 2.0;
    const auto f = [&](double y) { return a_of_y(y) - target; };
    double y = newton_bisect(f, a_of_y_prime, lo, hi, 0.5 * (lo + hi), 1e-15);
    for (int k = 0; k < 4; ++k) {
        const double step = f(y) / a_of_y_prime(y);
        if (!std::isfinite(step)) break;
        y -= step;
    }
    sol.y = y;
    sol.c = 1.0 / std::sqrt(y * xi1p);
    sol.m = sol.c * (y - 1.0);
    sol.master_residual = a_of_y(y) - target;
    sol.fp_residual_value =
        xi1 - (1.0 / sol.m) * ((1.0 / sol.m) * std::log((sol.c + sol.m) / sol.c) -
                               1.0 / (sol.c + sol.m));
    sol.fp_residual_slope = 1.0 / xi1p - sol.c * (sol.c + sol.m);
    sol.converged = std::abs(sol.master_residual) < 1e-13;
    return sol;
}

double aba_value(double nu_prime, double nu_second) {
    const double d = nu_second - nu_prime;
    return std::log(nu_second / nu_prime) -
           d * (d + nu_prime * nu_prime) / (nu_second * nu_prime * nu_prime);
}

CriteriaReport criteria(const MixedModel& model, const OneRsbSolution& sol) {
    if (!sol.converged) throw std::invalid_argument("criteria: unconverged solution");
    CriteriaReport rep;
    const double xi2_0 = model.xi0_second();
    const double xi2_1 = model.xi1_second();
    const double xi1p = model.xi1_prime();
    rep.replicon = 1.0 / ((sol.m + sol.c) * (sol.m + sol.c)) - xi2_0;
    rep.purelike_margin = 1.0 / (sol.c * sol.c) - xi2_1;
    rep.y_lower = xi2_1 / xi1p;
    rep.y_upper = xi2_0 > 0.0 ? xi1p / xi2_0 : std::numeric_limits<double>::infinity();
    rep.replicon_nonneg = sol.y <= rep.y_upper * (1.0 + 1e-12);
    rep.purelike_or_critical = sol.y >= rep.y_lower * (1.0 - 1e-12);
    if (std::abs(model.xi1() - 1.0) < 1e-12)
        rep.aba = aba_value(xi1p, xi2_1);
    return rep;
}

ZReport z_sign_changes(const MixedModel& model, const OneRsbSolution& sol) {
    double b2 = 0.0, bp = 0.0;
    int p = 0;
    for (const auto& term : model.terms()) {
        if (term.weight == 0.0) continue;
        if (term.degree == 2) {
            b2 = term.weight;
        } else if (p == 0) {
            p = term.degree;
            bp = term.weight;
        } else {
            throw std::invalid_argument("z_sign_changes: model must have degrees {2, p}");
        }
    }
    if (p == 0) throw std::domain_error("z_sign_changes: degenerate quadratic model");
    if (sol.sk_degenerate)
        throw std::domain_error("z_sign_changes: degenerate quadratic solution");

    const double y = sol.y;
    const double x = y / (y - 1.0);
    const double C = (y - 1.0) * (y - 1.0) / (model.xi1_prime() * y);
    const double K = static_cast<double>(p) * static_cast<double>(p - 1) * bp;

    ZReport rep;
    auto add = [&](int deg, double v) { rep.coefficients[deg] += v; };
    add(0, 1.0);
    if (b2 > 0.0) {
        add(0, -2.0 * C * b2 * x * x);
        add(1, 4.0 * C * b2 * x);
        add(2, -2.0 * C * b2);
    }
    add(p - 2, -C * K * x * x);
    add(p - 1, 2.0 * C * K * x);
    add(p, -C * K);

    double max_abs = 0.0;
    for (const auto& [deg, v] : rep.coefficients) max_abs = std::max(max_abs, std::abs(v));
    const double floor = 1e-14 * max_abs;
    int prev = 0;
    for (const auto& [deg, v] : rep.coefficients) {
        if (std::abs(v) < floor) continue;
        const int s = v > 0.0 ? 1 : -1;
        if (prev != 0 && s != prev) ++rep.sign_changes;
        prev = s;
    }

    const auto Z = [&](double t) {
        const double d = x - t;
        return 1.0 - C * d * d * model.eval(t, 2);
    };
    const int n = 2000;
    double tl = 0.0, vl = Z(0.0);
    for (int i = 1; i <= n; ++i) {
        const double tr = static_cast<double>(i) / n;
        const double vr = Z(tr);
        if (vl == 0.0 && tl > 0.0) rep.roots_in_01.push_back(tl);
        if (vl * vr < 0.0)
            rep.roots_in_01.push_back(bisect(Z, tl, tr, 1e-10));
        tl = tr;
        vl = vr;
    }
    return rep;
}

std::string to_string(ModelClass c) {
    switch (c) {
        case ModelClass::SK_RS: return "SK_RS";
        case ModelClass::ONE_RSB: return "ONE_RSB";
        case ModelClass::NOT_ONE_RSB: return "NOT_ONE_RSB";
        case ModelClass::FRSB_CANDIDATE: return "FRSB_CANDIDATE";
    }
    return "UNKNOWN";
}

Classification classify_2p(const MixedModel& model) {
    Classification out;
    out.sol = solve_master(model);
    if (out.sol.sk_degenerate) {
        out.model_class = ModelClass::SK_RS;
        out.gse = std::sqrt(model.xi1_prime());
        return out;
    }
    out.report = criteria(model, out.sol);

    OrderParamAnsatz phi(out.sol.c, {{0.0, out.sol.m}}, {}, model);
    const auto gap = duality_gap(phi, model, 0.0);
    const auto obstacle = obstacle_check(gap.cert, model, true);
    out.obstacle_margin = obstacle.margin;
    out.obstacle_argmin = obstacle.argmin;
    out.gap = gap.gap;
    out.gse = 0.5 * gap.primal;

    const bool feasible = obstacle.margin >= -obstacle_feasibility_tol(model);
    if (out.report.replicon_nonneg && out.report.purelike_or_critical && feasible) {
        out.model_class = ModelClass::ONE_RSB;
        return out;
    }
    if (!out.report.replicon_nonneg) out.failing_flags.push_back("replicon");
    if (!out.report.purelike_or_critical) out.failing_flags.push_back("purelike");
    if (!feasible) out.failing_flags.push_back("obstacle");

    const auto profile = sign_intervals(model);
    out.model_class = profile.all_nonpositive() ? ModelClass::FRSB_CANDIDATE
                                                : ModelClass::NOT_ONE_RSB;
    return out;
}

bool rs_check(const MixedModel& model) { return model.is_pure_quadratic(); }

} // namespace sphgse
