#include "sphgse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace sphgse {

namespace {

size_t thread_cap() {
    if (const char* s = std::getenv("SPHGSE_THREADS")) {
        const long v = std::strtol(s, nullptr, 10);
        if (v >= 1) return static_cast<size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

constexpr double kCFloor = 1e-8;

// Precomputed grid data for the ray-coordinate objective.
struct GridWorkspace {
    size_t G;
    double h;
    double dt;
    std::vector<double> t, xi2, w;  // nodes, xi'' at nodes, trapezoid weights

    GridWorkspace(const MixedModel& model, double h_, size_t G_) : G(G_), h(h_) {
        dt = 1.0 / static_cast<double>(G);
        t.resize(G + 1);
        xi2.resize(G + 1);
        w.resize(G + 1);
        for (size_t i = 0; i <= G; ++i) {
            t[i] = static_cast<double>(i) * dt;
            xi2[i] = model.eval(t[i], 2);
            w[i] = (i == 0 || i == G) ? 0.5 * dt : dt;
        }
    }

    // phi_i = c + (1 - t_i) S_i + T_i with S_i = sum_{j<=i} rho_j and
    // T_i = sum_{j>i} rho_j (1 - t_j); rho lives on knots t_0..t_{G-1}.
    void phi_of(double c, const std::vector<double>& rho, std::vector<double>& phi) const {
        phi.resize(G + 1);
        std::vector<double> T(G + 1, 0.0);
        for (size_t j = G; j-- > 0;)
            T[j] = T[j + 1] + rho[j] * (1.0 - t[j]);
        double S = 0.0;
        for (size_t i = 0; i <= G; ++i) {
            if (i < G) S += rho[i];
            phi[i] = c + (1.0 - t[i]) * S + (i < G ? T[i + 1] : 0.0);
        }
    }

    double objective(double c, const std::vector<double>& rho,
                     std::vector<double>& phi) const {
        phi_of(c, rho, phi);
        double sum = 0.0;
        for (size_t i = 0; i <= G; ++i) sum += w[i] * (xi2[i] * phi[i] + 1.0 / phi[i]);
        return sum + h * h * phi[0];
    }

    void gradient(const std::vector<double>& phi, double& dc,
                  std::vector<double>& drho) const {
        std::vector<double> g(G + 1);
        for (size_t i = 0; i <= G; ++i)
            g[i] = w[i] * (xi2[i] - 1.0 / (phi[i] * phi[i]));
        g[0] += h * h;
        dc = std::accumulate(g.begin(), g.end(), 0.0);
        // d/drho_j = sum_{i>=j} g_i (1 - t_i) + (1 - t_j) sum_{i<j} g_i
        drho.assign(G, 0.0);
        std::vector<double> U(G + 2, 0.0);
        for (size_t i = G + 1; i-- > 0;) U[i] = g[i] * (1.0 - t[i]) + U[i + 1];
        double V = 0.0;
        for (size_t j = 0; j < G; ++j) {
            drho[j] = U[j] + (1.0 - t[j]) * V;
            V += g[j];
        }
    }
};

SolveResult finish_grid_result(const MixedModel& model, double h, GridFunction phi,
                               long iterations, const std::string& method,
                               bool converged) {
    SolveResult out;
    out.phi = std::move(phi);
    out.certificate = formal_conjugate(out.phi, model, h);
    out.P_value = primal_energy(out.phi, model, h);
    out.D_value = dual_energy(out.certificate, model);
    out.gap = out.P_value - out.D_value;
    out.gse = 0.5 * out.P_value;
    const auto obstacle = obstacle_check(out.certificate, model, true);
    out.obstacle_margin = obstacle.margin;
    out.obstacle_argmin = obstacle.argmin;
    out.iterations = iterations;
    out.method = method;
    out.converged = converged;
    return out;
}

} // namespace

namespace detail {

double grid_objective(const MixedModel& model, double h, size_t G, double c,
                      const std::vector<double>& rho) {
    GridWorkspace ws(model, h, G);
    std::vector<double> phi;
    return ws.objective(c, rho, phi);
}

void grid_gradient(const MixedModel& model, double h, size_t G, double c,
                   const std::vector<double>& rho, double& dc,
                   std::vector<double>& drho) {
    GridWorkspace ws(model, h, G);
    std::vector<double> phi;
    ws.phi_of(c, rho, phi);
    ws.gradient(phi, dc, drho);
}

void isotonic_nondecreasing(std::vector<double>& v) {
    const size_t n = v.size();
    if (n < 2) return;
    std::vector<double> level(n), weight(n);
    std::vector<size_t> count(n);
    size_t top = 0;
    for (size_t i = 0; i < n; ++i) {
        level[top] = v[i];
        weight[top] = 1.0;
        count[top] = 1;
        while (top > 0 && level[top - 1] > level[top]) {
            const double w = weight[top - 1] + weight[top];
            level[top - 1] = (weight[top - 1] * level[top - 1] +
                              weight[top] * level[top]) / w;
            weight[top - 1] = w;
            count[top - 1] += count[top];
            --top;
        }
        ++top;
    }
    size_t i = 0;
    for (size_t b = 0; b < top; ++b)
        for (size_t k = 0; k < count[b]; ++k) v[i++] = level[b];
}

} // namespace detail

SolveResult closed_form_rs(const MixedModel& model, size_t G) {
    if (!model.is_pure_quadratic())
        throw std::invalid_argument("closed_form_rs: model is not pure quadratic");
    const double c = 1.0 / std::sqrt(model.xi1_prime());
    GridFunction phi;
    phi.values.assign(G + 1, c);
    auto out = finish_grid_result(model, 0.0, std::move(phi), 0, "closed-form", true);
    out.ansatz = OrderParamAnsatz(c, {}, {}, model);
    return out;
}

SolveResult grid_minimize(const MixedModel& model, double h, size_t G, double tol,
                          long max_iter) {
    if (G < 500) throw std::invalid_argument("grid_minimize: G must be >= 500");
    GridWorkspace ws(model, h, G);

    // warm start from the one-step closed form
    const auto sol = solve_master(model);
    double c = sol.c;
    std::vector<double> rho(G, 0.0);
    if (!sol.sk_degenerate) rho[0] = sol.m;

    const auto project = [&](double& cc, std::vector<double>& rr) {
        cc = std::max(cc, kCFloor);
        for (auto& r : rr) r = std::max(r, 0.0);
    };

    std::vector<double> phi, phi_y, grad_rho;
    double grad_c = 0.0;

    double fx = ws.objective(c, rho, phi);
    double yc = c;
    std::vector<double> yrho = rho;
    double tk = 1.0;
    double L = 100.0;
    long iter = 0;
    bool converged = false;
    double window_best = fx;
    long window_mark = 0;

    for (; iter < max_iter; ++iter) {
        const double fy = ws.objective(yc, yrho, phi_y);
        ws.gradient(phi_y, grad_c, grad_rho);

        double nc = 0.0;
        std::vector<double> nrho;
        double fn = 0.0;
        for (;;) {
            nc = yc - grad_c / L;
            nrho.resize(G);
            for (size_t j = 0; j < G; ++j) nrho[j] = yrho[j] - grad_rho[j] / L;
            project(nc, nrho);
            fn = ws.objective(nc, nrho, phi);
            double lin = grad_c * (nc - yc);
            double quad = (nc - yc) * (nc - yc);
            for (size_t j = 0; j < G; ++j) {
                const double d = nrho[j] - yrho[j];
                lin += grad_rho[j] * d;
                quad += d * d;
            }
            if (fn <= fy + lin + 0.5 * L * quad + 1e-15 * (1.0 + std::abs(fy))) break;
            L *= 2.0;
            if (L > 1e18) break;
        }

        if (fn > fx + 1e-16 * (1.0 + std::abs(fx))) {  // momentum restart
            yc = c;
            yrho = rho;
            tk = 1.0;
            if (iter - window_mark >= 50) {
                converged = true;
                ++iter;
                break;
            }
            continue;
        }

        const double tnew = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        const double beta = (tk - 1.0) / tnew;
        yc = nc + beta * (nc - c);
        yrho.resize(G);
        for (size_t j = 0; j < G; ++j) yrho[j] = nrho[j] + beta * (nrho[j] - rho[j]);
        project(yc, yrho);
        c = nc;
        rho = std::move(nrho);
        fx = fn;
        tk = tnew;
        L *= 0.9;

        if (fx < window_best - tol * (1.0 + std::abs(fx))) {
            window_best = fx;
            window_mark = iter;
        } else if (iter - window_mark >= 50) {
            converged = true;
            ++iter;
            break;
        }
    }

    ws.phi_of(c, rho, phi);
    GridFunction out_phi;
    out_phi.values = std::move(phi);
    auto out = finish_grid_result(model, h, std::move(out_phi), iter, "grid", converged);
    return out;
}

namespace {

// Finite-dimensional parameter space for the structured search.
struct AnsatzSpace {
    struct Box { double lo, hi; };
    // layout: [0]=c, [1]=mass at pinned q=0, then per slot
    std::vector<Box> boxes;
    struct AtomSlot { size_t iq, im; };
    struct SegSlot { size_t ia, ib; };
    std::vector<AtomSlot> atom_slots;
    std::vector<SegSlot> seg_slots;

    size_t n() const { return boxes.size(); }

    static AnsatzSpace build(const SignProfile& profile) {
        AnsatzSpace sp;
        sp.boxes.push_back({kCFloor, 10.0});  // c
        sp.boxes.push_back({0.0, 50.0});      // mass at 0
        for (const auto& iv : profile.intervals) {
            const double lo = iv.left;
            const double hi = iv.right;
            if (hi - lo < 1e-6) continue;
            const double qhi = std::min(hi, 1.0 - 1e-9);
            for (int k = 0; k < 2; ++k) {
                AtomSlot slot{sp.boxes.size(), sp.boxes.size() + 1};
                sp.boxes.push_back({std::max(lo, 1e-9), qhi});
                sp.boxes.push_back({0.0, 50.0});
                sp.atom_slots.push_back(slot);
            }
            if (iv.sign == IntervalSign::negative) {
                SegSlot slot{sp.boxes.size(), sp.boxes.size() + 1};
                sp.boxes.push_back({lo, hi});
                sp.boxes.push_back({lo, hi});
                sp.seg_slots.push_back(slot);
            }
        }
        return sp;
    }

    void project(std::vector<double>& x) const {
        for (size_t i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], boxes[i].lo, boxes[i].hi);
        for (const auto& s : seg_slots) {
            if (x[s.ia] > x[s.ib]) {
                const double mid = 0.5 * (x[s.ia] + x[s.ib]);
                x[s.ia] = mid;
                x[s.ib] = mid;
            }
        }
    }

    OrderParamAnsatz make(const std::vector<double>& x, const MixedModel& model) const {
        std::vector<Atom> atoms;
        if (x[1] >= 1e-12) atoms.push_back({0.0, x[1]});
        for (const auto& s : atom_slots)
            if (x[s.im] >= 1e-12) atoms.push_back({x[s.iq], x[s.im]});
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& a, const Atom& b) { return a.q < b.q; });
        // merge colliding locations
        std::vector<Atom> merged;
        for (const auto& a : atoms) {
            if (!merged.empty() && a.q - merged.back().q < 1e-9)
                merged.back().m += a.m;
            else
                merged.push_back(a);
        }
        std::vector<Segment> segs;
        for (const auto& s : seg_slots)
            if (x[s.ib] - x[s.ia] >= 1e-7) segs.push_back({x[s.ia], x[s.ib]});
        return OrderParamAnsatz(x[0], std::move(merged), std::move(segs), model);
    }
};

} // namespace

SolveResult ansatz_minimize(const MixedModel& model, const SignProfile& profile,
                            double h, unsigned seed, size_t cert_G) {
    const auto space = AnsatzSpace::build(profile);
    const size_t n = space.n();

    const auto F = [&](const std::vector<double>& x) -> double {
        try {
            return primal_energy(space.make(x, model), model, h);
        } catch (const std::exception&) {
            return 1e9;
        }
    };
    const auto fd_grad = [&](const std::vector<double>& x, std::vector<double>& g) {
        g.assign(n, 0.0);
        for (size_t k = 0; k < n; ++k) {
            const double step = 1e-6 * (1.0 + std::abs(x[k]));
            auto xp = x;
            auto xm = x;
            xp[k] = std::min(x[k] + step, space.boxes[k].hi);
            xm[k] = std::max(x[k] - step, space.boxes[k].lo);
            const double denom = xp[k] - xm[k];
            if (denom <= 0.0) continue;
            g[k] = (F(xp) - F(xm)) / denom;
        }
    };

    const auto polish = [&](std::vector<double> x, long& iters, long max_it) {
        space.project(x);
        double fx = F(x);
        std::vector<double> g, gnew;
        fd_grad(x, g);
        double step = 1e-2;
        int stall = 0;
        for (long it = 0; it < max_it; ++it) {
            ++iters;
            std::vector<double> xn(n);
            double fn = 0.0;
            double ls = step;
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt) {
                for (size_t k = 0; k < n; ++k) xn[k] = x[k] - ls * g[k];
                space.project(xn);
                double descent = 0.0, dist2 = 0.0;
                for (size_t k = 0; k < n; ++k) {
                    descent += g[k] * (x[k] - xn[k]);
                    dist2 += (x[k] - xn[k]) * (x[k] - xn[k]);
                }
                if (dist2 < 1e-28) break;
                fn = F(xn);
                if (fn <= fx - 1e-4 * descent) {
                    moved = true;
                    break;
                }
                ls *= 0.5;
            }
            if (!moved) break;
            fd_grad(xn, gnew);
            double sy = 0.0, ss = 0.0;
            for (size_t k = 0; k < n; ++k) {
                const double s = xn[k] - x[k];
                ss += s * s;
                sy += s * (gnew[k] - g[k]);
            }
            step = (sy > 1e-16) ? std::clamp(ss / sy, 1e-8, 1e2) : std::min(step * 2.0, 1e2);
            const bool tiny = fx - fn < 1e-14 * (1.0 + std::abs(fx));
            x = std::move(xn);
            fx = fn;
            g = gnew;
            stall = tiny ? stall + 1 : 0;
            if (stall >= 5) break;
        }
        return std::make_pair(x, fx);
    };

    // candidate starts, in deterministic preference order
    std::vector<std::vector<double>> starts;
    std::vector<double> base(n);
    for (size_t k = 0; k < n; ++k) base[k] = space.boxes[k].lo;
    for (const auto& s : space.atom_slots)
        base[s.iq] = 0.5 * (space.boxes[s.iq].lo + space.boxes[s.iq].hi);
    for (const auto& s : space.seg_slots) {
        const double mid = 0.5 * (space.boxes[s.ia].lo + space.boxes[s.ia].hi);
        base[s.ia] = mid;
        base[s.ib] = mid;
    }

    const auto sol = solve_master(model);
    {
        auto x = base;
        x[0] = sol.c;
        x[1] = sol.sk_degenerate ? 0.0 : sol.m;
        starts.push_back(std::move(x));  // one-step closed form (kept unpolished too)
    }
    if (!space.seg_slots.empty()) {
        auto x = base;
        x[0] = 1.0 / std::sqrt(model.xi1_second());
        for (const auto& s : space.seg_slots) {
            x[s.ia] = space.boxes[s.ia].lo;
            x[s.ib] = space.boxes[s.ib].hi;
        }
        starts.push_back(std::move(x));  // full segments
    }
    {
        auto x = base;
        x[0] = 1.0 / std::sqrt(model.xi1_prime());
        starts.push_back(std::move(x));  // constant
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int r = 0; r < 16; ++r) {
        auto x = base;
        x[0] = 0.05 + 1.45 * uni(rng);
        x[1] = 2.0 * uni(rng);
        for (const auto& s : space.atom_slots) {
            x[s.iq] = space.boxes[s.iq].lo +
                      uni(rng) * (space.boxes[s.iq].hi - space.boxes[s.iq].lo);
            x[s.im] = uni(rng);
        }
        for (const auto& s : space.seg_slots) {
            double a = space.boxes[s.ia].lo +
                       uni(rng) * (space.boxes[s.ia].hi - space.boxes[s.ia].lo);
            double b = space.boxes[s.ib].lo +
                       uni(rng) * (space.boxes[s.ib].hi - space.boxes[s.ib].lo);
            if (a > b) std::swap(a, b);
            x[s.ia] = a;
            x[s.ib] = b;
        }
        starts.push_back(std::move(x));
    }

    long iterations = 0;
    std::vector<double> best_x;
    double best_f = std::numeric_limits<double>::infinity();
    // the unpolished closed-form start competes on equal footing, so exact
    // one-step parameters survive ties against their own polished drift
    {
        auto x0 = starts[0];
        space.project(x0);
        const double f0 = F(x0);
        best_x = x0;
        best_f = f0;
    }
    // coarse pass over every start, then refine the most promising few
    std::vector<std::pair<double, std::vector<double>>> coarse;
    for (const auto& x0 : starts) {
        auto [x, fx] = polish(x0, iterations, 60);
        coarse.emplace_back(fx, std::move(x));
    }
    std::stable_sort(coarse.begin(), coarse.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const size_t keep = std::min<size_t>(3, coarse.size());
    for (size_t k = 0; k < keep; ++k) {
        auto [x, fx] = polish(coarse[k].second, iterations, 400);
        if (fx < best_f - 1e-12 * (1.0 + std::abs(best_f))) {
            best_f = fx;
            best_x = x;
        }
    }

    const auto ansatz = space.make(best_x, model);
    SolveResult out;
    out.ansatz = ansatz;
    out.phi = to_grid(ansatz, cert_G);
    const auto gap = duality_gap(ansatz, model, h);
    out.certificate = gap.cert;
    out.P_value = gap.primal;
    out.D_value = gap.dual;
    out.gap = gap.gap;
    out.gse = 0.5 * gap.primal;
    const auto obstacle = obstacle_check(out.certificate, model, true);
    out.obstacle_margin = obstacle.margin;
    out.obstacle_argmin = obstacle.argmin;
    out.iterations = iterations;
    out.method = "ansatz";
    out.converged = true;
    out.inconclusive = obstacle.margin < -1e-6;
    return out;
}

FiniteBetaResult finite_beta_minimize(const MixedModel& model, double beta, double h,
                                      size_t G, long max_iter) {
    if (!(beta > 0.0)) throw std::invalid_argument("finite_beta_minimize: beta must be > 0");
    if (G < 500) throw std::invalid_argument("finite_beta_minimize: G must be >= 500");
    const double dt = 1.0 / static_cast<double>(G);
    const size_t nfree = G - 1;  // F_{G-1} and F_G pinned at 1

    // warm start from the zero-temperature density
    std::vector<double> F(G + 1, 1.0);
    {
        const auto gs = grid_minimize(model, h, 500, 1e-11, 50000);
        const auto nu = to_measure(gs.phi);
        const double c1 = gs.phi.values.back();
        const double q0 = std::max(0.0, 1.0 - c1 / beta);
        for (size_t i = 0; i < nfree; ++i) {
            const double t = static_cast<double>(i) * dt;
            F[i] = (t >= q0) ? 1.0 : std::min(1.0, nu.mass_density(t) / beta);
        }
        std::vector<double> head(F.begin(), F.begin() + nfree);
        detail::isotonic_nondecreasing(head);
        for (size_t i = 0; i < nfree; ++i) F[i] = std::clamp(head[i], 0.0, 1.0);
    }

    std::vector<double> dxi(G), tmid(G), one_minus_smid(G);
    for (size_t i = 0; i < G; ++i) {
        const double tl = static_cast<double>(i) * dt;
        const double tr = tl + dt;
        dxi[i] = model.eval(tr, 0) - model.eval(tl, 0);
        tmid[i] = 0.5 * (tl + tr);
        one_minus_smid[i] = 1.0 - tmid[i];
    }
    const double b2 = beta * beta;

    std::vector<double> hat(G + 1);
    const auto compute_hat = [&](const std::vector<double>& cdf) {
        hat[G] = 0.0;
        for (size_t i = G; i-- > 0;) hat[i] = hat[i + 1] + dt * cdf[i];
    };
    const auto objective = [&](const std::vector<double>& cdf) {
        compute_hat(cdf);
        double sum = h * h * hat[0];
        for (size_t i = 0; i < G; ++i) {
            const double mid = 0.5 * (hat[i] + hat[i + 1]);
            sum += b2 * cdf[i] * dxi[i] + dt * (1.0 / mid - 1.0 / one_minus_smid[i]);
        }
        return 0.5 * sum;
    };
    const auto gradient = [&](const std::vector<double>& cdf, std::vector<double>& g) {
        compute_hat(cdf);
        g.assign(nfree, 0.0);
        std::vector<double> r(G);
        for (size_t i = 0; i < G; ++i) {
            const double mid = 0.5 * (hat[i] + hat[i + 1]);
            r[i] = 1.0 / (mid * mid);
        }
        double prefix = 0.0;
        for (size_t k = 0; k < nfree; ++k) {
            g[k] = 0.5 * (b2 * dxi[k] + h * h * dt - dt * dt * (prefix + 0.5 * r[k]));
            prefix += r[k];
        }
    };
    const auto project = [&](std::vector<double>& cdf) {
        std::vector<double> head(cdf.begin(), cdf.begin() + nfree);
        detail::isotonic_nondecreasing(head);
        for (size_t i = 0; i < nfree; ++i) cdf[i] = std::clamp(head[i], 0.0, 1.0);
        cdf[G - 1] = 1.0;
        cdf[G] = 1.0;
    };

    project(F);
    double fx = objective(F);
    std::vector<double> g, gn;
    gradient(F, g);
    double step = 1.0;
    long iter = 0;
    bool converged = false;
    double window_best = fx;
    long window_mark = 0;

    for (; iter < max_iter; ++iter) {
        std::vector<double> Fn = F;
        double fn = 0.0;
        double ls = step;
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (size_t k = 0; k < nfree; ++k) Fn[k] = F[k] - ls * g[k];
            project(Fn);
            double descent = 0.0, dist2 = 0.0;
            for (size_t k = 0; k < nfree; ++k) {
                const double d = F[k] - Fn[k];
                descent += g[k] * d;
                dist2 += d * d;
            }
            if (dist2 < 1e-30) break;
            fn = objective(Fn);
            if (fn <= fx - 1e-4 * descent) {
                moved = true;
                break;
            }
            ls *= 0.5;
        }
        if (!moved) {
            converged = true;
            break;
        }
        gradient(Fn, gn);
        double ss = 0.0, sy = 0.0;
        for (size_t k = 0; k < nfree; ++k) {
            const double s = Fn[k] - F[k];
            ss += s * s;
            sy += s * (gn[k] - g[k]);
        }
        step = (sy > 1e-18) ? std::clamp(ss / sy, 1e-6, 1e6) : std::min(step * 2.0, 1e6);
        F = std::move(Fn);
        fx = fn;
        g = gn;
        if (fx < window_best - 1e-13 * (1.0 + std::abs(fx))) {
            window_best = fx;
            window_mark = iter;
        } else if (iter - window_mark >= 50) {
            converged = true;
            break;
        }
    }

    FiniteBetaResult out;
    out.mu.cdf = F;
    out.mu.beta = beta;
    out.mu.h = h;
    out.energy = cs_energy(out.mu, model);
    out.free_energy = out.energy / beta;
    out.qstar = out.mu.qstar();
    out.beta_one_minus_qstar = beta * (1.0 - out.qstar);
    out.atom_at_zero_rescaled = beta * F[0];
    {
        const size_t istar = out.mu.qstar_index();
        const double qs = out.qstar;
        double num = 0.0, den = 0.0;
        for (size_t j = 1; j <= G; ++j) {
            const double t = static_cast<double>(j) * dt;
            if (t < qs) continue;
            const double mass = F[j] - F[j - 1];
            num += (1.0 - t) * mass;
            den += mass;
        }
        if (istar == 0) {  // whole measure counts
            num += (1.0 - 0.0) * F[0];
            den += F[0];
        }
        out.atom_estimate = den > 0.0 ? beta * num / den : 0.0;
    }
    out.iterations = iter;
    out.converged = converged;
    return out;
}

namespace {

double poly_eval(const std::vector<double>& coeffs, double t) {
    double v = 0.0;
    for (size_t k = coeffs.size(); k-- > 0;) v = v * t + coeffs[k];
    return v;
}

double poly_deriv_eval(const std::vector<double>& coeffs, double t) {
    double v = 0.0;
    for (size_t k = coeffs.size(); k-- > 1;)
        v = v * t + static_cast<double>(k) * coeffs[k];
    return v;
}

} // namespace

ModerateDeviationRow moderate_deviation_report(const FiniteBetaResult& fb,
                                               const SolveResult& gs,
                                               const std::vector<double>& f_coeffs) {
    ModerateDeviationRow row;
    row.beta = fb.mu.beta;
    const auto& F = fb.mu.cdf;
    const size_t G = fb.mu.G();
    const double dt = 1.0 / static_cast<double>(G);

    // beta [f(1) - int f dmu]; the discrete measure has mass F_0 at 0 and
    // jumps F_j - F_{j-1} at the grid nodes
    double int_f = poly_eval(f_coeffs, 0.0) * F[0];
    for (size_t j = 1; j <= G; ++j)
        int_f += poly_eval(f_coeffs, static_cast<double>(j) * dt) * (F[j] - F[j - 1]);
    row.lhs = fb.mu.beta * (poly_eval(f_coeffs, 1.0) - int_f);

    // int f' dnu against the zero-temperature measure
    const auto nu = gs.ansatz ? to_measure(*gs.ansatz) : to_measure(gs.phi);
    if (gs.ansatz) {
        double acc = nu.atom_at_one * poly_deriv_eval(f_coeffs, 1.0);
        for (const auto& atom : nu.atoms)
            acc += atom.m * (poly_eval(f_coeffs, 1.0) - poly_eval(f_coeffs, atom.q));
        for (const auto& seg : nu.segments) {
            // segment density integrated against f' via fine midpoint sums
            const int n = 4000;
            const double w = (seg.b - seg.a) / n;
            for (int i = 0; i < n; ++i) {
                const double t = seg.a + (i + 0.5) * w;
                const double mass = nu.mass_density(seg.a + (i + 1.0) * w) -
                                    nu.mass_density(seg.a + i * w);
                acc += mass * (poly_eval(f_coeffs, 1.0) - poly_eval(f_coeffs, t));
            }
        }
        row.rhs = acc;
    } else {
        double acc = nu.atom_at_one * poly_deriv_eval(f_coeffs, 1.0);
        const size_t n = nu.grid_density.size();
        const double w = 1.0 / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            const double tl = static_cast<double>(i) * w;
            acc += nu.grid_density[i] *
                   (poly_eval(f_coeffs, tl + w) - poly_eval(f_coeffs, tl));
        }
        row.rhs = acc;
    }

    // sup_t |beta F(t) - m(t)| on [0.05, 0.95], skipping +-0.02 around the
    // discontinuities of either side: the atoms of the limit and the edge of
    // the finite-temperature support (whose jump only reaches 1 as beta grows)
    std::vector<double> jumps{0.0};
    if (gs.ansatz)
        for (const auto& atom : gs.ansatz->atoms) jumps.push_back(atom.q);
    double sup = 0.0;
    for (size_t i = 0; i <= G; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (t < 0.05 || t > std::min(0.95, fb.qstar - 0.02)) continue;
        bool near_jump = false;
        for (double q : jumps)
            if (std::abs(t - q) < 0.02) near_jump = true;
        if (near_jump) continue;
        const double m_zero = gs.ansatz ? gs.ansatz->density(t) : nu.mass_density(t);
        sup = std::max(sup, std::abs(fb.mu.beta * F[i] - m_zero));
    }
    row.sup_distance = sup;

    row.atom_estimate = fb.atom_estimate;
    row.atom_target = gs.ansatz ? gs.ansatz->c : gs.phi.values.back();
    row.atom_flagged =
        std::abs(row.atom_estimate - row.atom_target) > 0.5 * std::abs(row.atom_target);
    return row;
}

std::vector<SweepRow> sweep_2p(int p, const std::vector<double>& mu_grid) {
    std::vector<SweepRow> rows(mu_grid.size());
    const size_t nthreads = std::min(thread_cap(), std::max<size_t>(1, mu_grid.size()));
    const auto work = [&](size_t t0) {
        for (size_t i = t0; i < mu_grid.size(); i += nthreads) {
            const double mu = mu_grid[i];
            SweepRow row;
            row.mu = mu;
            const auto cls = classify_2p(two_plus_p_model(p, mu));
            row.y = cls.sol.y;
            row.m = cls.sol.m;
            row.c = cls.sol.c;
            row.replicon = cls.report.replicon;
            row.purelike_margin = cls.report.purelike_margin;
            row.gse = cls.gse;
            row.gap = cls.gap;
            row.obstacle_margin = cls.obstacle_margin;
            row.model_class = cls.model_class;
            rows[i] = row;
        }
    };
    if (nthreads <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (size_t t0 = 0; t0 < nthreads; ++t0) pool.emplace_back(work, t0);
        for (auto& th : pool) th.join();
    }
    return rows;
}

double locate_purelike_boundary(int p, double tol) {
    const auto flag = [&](double mu) {
        const auto model = two_plus_p_model(p, mu);
        return criteria(model, solve_master(model)).purelike_or_critical;
    };
    double lo = 0.05, hi = 0.99;
    if (!flag(lo) || flag(hi))
        throw std::runtime_error("locate_purelike_boundary: flag does not flip on [0.05, 0.99]");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (flag(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace sphgse
