#include "sphgse/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sphgse/quad.hpp"

namespace sphgse {

namespace {

constexpr double kPhiFloor = 1e-8;

struct Piece {
    double l = 0;
    double r = 0;
    bool in_segment = false;
};

// Pieces between consecutive breakpoints; phi is linear off segments and
// (xi'')^{-1/2} + affine on them.
std::vector<Piece> pieces_of(const OrderParamAnsatz& ansatz) {
    std::vector<Piece> out;
    const auto pts = ansatz.breakpoints();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        Piece p{pts[i], pts[i + 1], false};
        const double mid = 0.5 * (p.l + p.r);
        for (const auto& seg : ansatz.frsb_segments)
            if (mid > seg.a && mid < seg.b) p.in_segment = true;
        out.push_back(p);
    }
    return out;
}

// int_l^r dt / (phi_l + s (t - l)); phi linear with slope s.
double int_inv_linear(double l, double r, double phi_l, double slope) {
    const double w = r - l;
    const double phi_r = phi_l + slope * w;
    if (std::abs(slope) * w < 1e-14 * phi_l) return w / (0.5 * (phi_l + phi_r));
    return std::log(phi_r / phi_l) / slope;
}

// int_l^r xi''(t) (alpha + beta t) dt via antiderivatives xi' and t xi' - xi.
double int_xi2_linear(const MixedModel& model, double l, double r, double alpha,
                      double beta) {
    const double A = model.eval(r, 1) - model.eval(l, 1);
    const double B = (r * model.eval(r, 1) - model.eval(r, 0)) -
                     (l * model.eval(l, 1) - model.eval(l, 0));
    return alpha * A + beta * B;
}

// int_l^r phi^{-2} for an ansatz whose pieces are already split at l and r.
double int_phi_inv2(const OrderParamAnsatz& ansatz, double l, double r) {
    if (r <= l) return 0.0;
    const double mid = 0.5 * (l + r);
    bool in_segment = false;
    for (const auto& seg : ansatz.frsb_segments)
        if (mid > seg.a && mid < seg.b) in_segment = true;
    if (in_segment) {
        return adaptive_simpson(
            [&](double t) {
                const double p = ansatz.phi(t);
                return 1.0 / (p * p);
            },
            l, r, 1e-14);
    }
    const double phi_l = ansatz.phi(l);
    const double slope = -ansatz.density(mid);
    const double phi_r = phi_l + slope * (r - l);
    if (std::abs(slope) * (r - l) < 1e-14 * phi_l) {
        const double p = 0.5 * (phi_l + phi_r);
        return (r - l) / (p * p);
    }
    // antiderivative of 1/(phi_l + s(t-l))^2 is -1/(s phi)
    return (1.0 / phi_l - 1.0 / phi_r) / slope;
}

// splits [l, r] at ansatz breakpoints before integrating phi^{-2}
double int_phi_inv2_split(const OrderParamAnsatz& ansatz, const std::vector<double>& pts,
                          double l, double r) {
    double total = 0.0;
    double cur = l;
    for (double p : pts) {
        if (p <= cur) continue;
        if (p >= r) break;
        total += int_phi_inv2(ansatz, cur, p);
        cur = p;
    }
    total += int_phi_inv2(ansatz, cur, r);
    return total;
}

void fill_reports(DualCertificate& cert, const MixedModel& model) {
    const size_t G = cert.phi.G();
    double margin = std::numeric_limits<double>::infinity();
    double argmin = 0.0;
    for (size_t i = 0; i <= G; ++i) {
        const double d = cert.eta[i] - model.eval(cert.phi.t(i), 0);
        if (d < margin) {
            margin = d;
            argmin = cert.phi.t(i);
        }
    }
    cert.reports.obstacle_margin = margin;
    cert.reports.obstacle_argmin = argmin;
    cert.reports.bc_eta_at_one = cert.eta[G] - model.xi1();
    cert.reports.bc_slope_at_zero = cert.eta_prime[0] - (0.0 - cert.h * cert.h);
    cert.reports.bc_slope_at_one = cert.eta_prime[G] - model.xi1_prime();
    cert.reports.bc_eta_at_zero = cert.eta[0] - 0.0;
}

// golden-section minimization of a unimodal-ish restriction
template <typename F>
std::pair<double, double> golden_min(const F& f, double lo, double hi, double tol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

} // namespace

double primal_energy(const GridFunction& phi, const MixedModel& model, double h) {
    const size_t G = phi.G();
    if (G < 2) throw std::invalid_argument("primal_energy: grid too small");
    const double dt = phi.dt();
    double sum = 0.0;
    for (size_t i = 0; i <= G; ++i) {
        const double v = phi.at(i);
        if (!(v >= kPhiFloor)) throw std::invalid_argument("primal_energy: phi below floor");
        const double w = (i == 0 || i == G) ? 0.5 * dt : dt;
        sum += w * (model.eval(phi.t(i), 2) * v + 1.0 / v);
    }
    return sum + h * h * phi.at(0);
}

double primal_energy(const OrderParamAnsatz& ansatz, const MixedModel& model, double h) {
    double sum = 0.0;
    for (const auto& piece : pieces_of(ansatz)) {
        if (piece.in_segment) {
            sum += adaptive_simpson(
                [&](double t) {
                    const double p = ansatz.phi(t);
                    return model.eval(t, 2) * p + 1.0 / p;
                },
                piece.l, piece.r, 1e-12);
        } else {
            const double mid = 0.5 * (piece.l + piece.r);
            const double phi_l = ansatz.phi(piece.l);
            const double slope = -ansatz.density(mid);
            // phi(t) = (phi_l - slope*l) + slope*t on the piece
            sum += int_xi2_linear(model, piece.l, piece.r, phi_l - slope * piece.l, slope);
            sum += int_inv_linear(piece.l, piece.r, phi_l, slope);
        }
    }
    return sum + h * h * ansatz.phi(0.0);
}

DualCertificate formal_conjugate(const GridFunction& phi, const MixedModel& model,
                                 double h, size_t /*grid_G*/) {
    const size_t G = phi.G();
    const double dt = phi.dt();
    for (double v : phi.values)
        if (!(v >= kPhiFloor)) throw std::invalid_argument("formal_conjugate: phi below floor");

    DualCertificate cert;
    cert.phi = phi;
    cert.h = h;
    std::vector<double> inv2(G + 1);
    for (size_t i = 0; i <= G; ++i) inv2[i] = 1.0 / (phi.at(i) * phi.at(i));
    // A_i = int_0^{t_i} phi^{-2}
    std::vector<double> A(G + 1, 0.0);
    for (size_t i = 1; i <= G; ++i) A[i] = A[i - 1] + 0.5 * dt * (inv2[i - 1] + inv2[i]);
    // B_i = int_{t_i}^1 A
    std::vector<double> B(G + 1, 0.0);
    for (size_t i = G; i-- > 0;) B[i] = B[i + 1] + 0.5 * dt * (A[i] + A[i + 1]);

    cert.eta.resize(G + 1);
    cert.eta_prime.resize(G + 1);
    const double xi1 = model.xi1();
    for (size_t i = 0; i <= G; ++i) {
        const double t = phi.t(i);
        cert.eta[i] = xi1 - B[i] + h * h * (1.0 - t);
        cert.eta_prime[i] = A[i] - h * h;
    }
    fill_reports(cert, model);
    return cert;
}

DualCertificate formal_conjugate(const OrderParamAnsatz& ansatz, const MixedModel& model,
                                 double h, size_t grid_G) {
    DualCertificate cert;
    cert.phi = to_grid(ansatz, grid_G);
    cert.h = h;
    cert.source = ansatz;
    const size_t G = grid_G;
    cert.eta.resize(G + 1);
    cert.eta_prime.resize(G + 1);
    const double xi1 = model.xi1();

    if (ansatz.is_one_rsb()) {
        const double m = ansatz.atoms[0].m;
        const double c = ansatz.c;
        for (size_t i = 0; i <= G; ++i) {
            const double t = cert.phi.t(i);
            const double u = 1.0 - t;
            const double R = (1.0 / m) * ((1.0 / m) * std::log((c + m * u) / c) -
                                          u / (c + m));
            const double A = (1.0 / m) * (1.0 / (c + m * u) - 1.0 / (c + m));
            cert.eta[i] = xi1 - R + h * h * u;
            cert.eta_prime[i] = A - h * h;
        }
    } else {
        const auto pts = ansatz.breakpoints();
        std::vector<double> A(G + 1, 0.0);
        for (size_t i = 1; i <= G; ++i)
            A[i] = A[i - 1] +
                   int_phi_inv2_split(ansatz, pts, cert.phi.t(i - 1), cert.phi.t(i));
        std::vector<double> B(G + 1, 0.0);
        for (size_t i = G; i-- > 0;) {
            const double l = cert.phi.t(i);
            const double r = cert.phi.t(i + 1);
            const double mid = 0.5 * (l + r);
            const double A_mid = A[i] + int_phi_inv2_split(ansatz, pts, l, mid);
            B[i] = B[i + 1] + (r - l) / 6.0 * (A[i] + 4.0 * A_mid + A[i + 1]);
        }
        for (size_t i = 0; i <= G; ++i) {
            const double t = cert.phi.t(i);
            cert.eta[i] = xi1 - B[i] + h * h * (1.0 - t);
            cert.eta_prime[i] = A[i] - h * h;
        }
    }
    fill_reports(cert, model);
    return cert;
}

double DualCertificate::eta_at(double t, const MixedModel& model) const {
    if (source) {
        const auto& a = *source;
        if (a.is_one_rsb()) {
            const double m = a.atoms[0].m;
            const double c = a.c;
            const double u = 1.0 - t;
            const double R = (1.0 / m) * ((1.0 / m) * std::log((c + m * u) / c) -
                                          u / (c + m));
            return model.xi1() - R + h * h * u;
        }
        // R(t) = int_0^1 phi^{-2}(tau) (1 - max(tau, t)) dtau, piecewise
        auto pts = a.breakpoints();
        pts.push_back(t);
        std::sort(pts.begin(), pts.end());
        double R = 0.0;
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            const double l = pts[i];
            const double r = pts[i + 1];
            if (r <= l) continue;
            R += adaptive_simpson(
                [&](double tau) {
                    const double p = a.phi(tau);
                    return (1.0 - std::max(tau, t)) / (p * p);
                },
                l, r, 1e-13);
        }
        return model.xi1() - R + h * h * (1.0 - t);
    }
    const size_t G = phi.G();
    if (t <= 0.0) return eta.front();
    if (t >= 1.0) return eta.back();
    const double x = t * static_cast<double>(G);
    const size_t i = std::min(static_cast<size_t>(x), G - 1);
    const double frac = x - static_cast<double>(i);
    return eta[i] * (1.0 - frac) + eta[i + 1] * frac;
}

double dual_energy(const DualCertificate& cert, const MixedModel& /*model*/) {
    if (cert.source) {
        const auto& a = *cert.source;
        double sum = 0.0;
        for (const auto& piece : pieces_of(a)) {
            if (piece.in_segment) {
                sum += adaptive_simpson([&](double t) { return 2.0 / a.phi(t); },
                                        piece.l, piece.r, 1e-12);
            } else {
                const double mid = 0.5 * (piece.l + piece.r);
                const double phi_l = a.phi(piece.l);
                const double slope = -a.density(mid);
                sum += 2.0 * int_inv_linear(piece.l, piece.r, phi_l, slope);
            }
        }
        return sum;
    }
    const size_t G = cert.phi.G();
    const double dt = cert.phi.dt();
    double sum = 0.0;
    for (size_t i = 0; i <= G; ++i) {
        const double w = (i == 0 || i == G) ? 0.5 * dt : dt;
        sum += w * 2.0 / cert.phi.at(i);
    }
    return sum;
}

GapResult duality_gap(const GridFunction& phi, const MixedModel& model, double h) {
    GapResult out;
    out.cert = formal_conjugate(phi, model, h);
    out.primal = primal_energy(phi, model, h);
    out.dual = dual_energy(out.cert, model);
    out.gap = out.primal - out.dual;
    return out;
}

GapResult duality_gap(const OrderParamAnsatz& phi, const MixedModel& model, double h) {
    GapResult out;
    out.cert = formal_conjugate(phi, model, h);
    out.primal = primal_energy(phi, model, h);
    out.dual = dual_energy(out.cert, model);
    out.gap = out.primal - out.dual;
    return out;
}

double obstacle_feasibility_tol(const MixedModel& model) {
    return 1e-9 * (1.0 + model.xi1());
}

ObstacleReport obstacle_check(const DualCertificate& cert, const MixedModel& model,
                              bool refine) {
    const size_t G = cert.phi.G();
    size_t imin = 0;
    double margin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i <= G; ++i) {
        const double d = cert.eta[i] - model.eval(cert.phi.t(i), 0);
        if (d < margin) {
            margin = d;
            imin = i;
        }
    }
    ObstacleReport report{margin, cert.phi.t(imin)};
    if (!refine || imin == 0 || imin == G) return report;

    const double tl = cert.phi.t(imin - 1);
    const double tr = cert.phi.t(imin + 1);
    if (cert.source) {
        auto [x, fx] = golden_min(
            [&](double t) { return cert.eta_at(t, model) - model.eval(t, 0); }, tl, tr,
            1e-10);
        if (fx < report.margin) report = {fx, x};
        return report;
    }
    // parabola through the three grid samples of eta - xi
    const double dl = cert.eta[imin - 1] - model.eval(tl, 0);
    const double dm = margin;
    const double dr = cert.eta[imin + 1] - model.eval(tr, 0);
    const double denom = dl - 2.0 * dm + dr;
    if (denom > 0.0) {
        const double dt = cert.phi.dt();
        const double shift = 0.5 * (dl - dr) / denom;  // in grid cells
        if (std::abs(shift) <= 1.0) {
            const double vertex = dm - 0.25 * (dl - dr) * shift;
            if (vertex < report.margin) report = {vertex, cert.phi.t(imin) + shift * dt};
        }
    }
    return report;
}

BcResiduals natural_bc_check(const DualCertificate& cert, const MixedModel& model,
                             double /*h*/) {
    BcResiduals out;
    const size_t G = cert.phi.G();
    out.slope_at_one = std::abs(cert.eta_prime[G] - model.xi1_prime());
    out.eta_at_zero = std::abs(cert.eta[0] - 0.0);
    if (cert.source) {
        out.phi_slope_at_zero = std::abs(-cert.source->density(0.0));
    } else {
        out.phi_slope_at_zero =
            std::abs((cert.phi.at(1) - cert.phi.at(0)) / cert.phi.dt());
    }
    out.contact_at_zero = std::min(out.eta_at_zero, out.phi_slope_at_zero);
    return out;
}

size_t FiniteBetaMeasure::qstar_index() const {
    for (size_t i = 0; i < cdf.size(); ++i)
        if (cdf[i] >= 1.0 - 1e-12) return i;
    return cdf.size() - 1;
}

double FiniteBetaMeasure::qstar() const {
    return static_cast<double>(qstar_index()) / static_cast<double>(G());
}

std::vector<double> FiniteBetaMeasure::hat() const {
    const size_t n = G();
    const double dt = 1.0 / static_cast<double>(n);
    std::vector<double> out(n + 1, 0.0);
    for (size_t i = n; i-- > 0;) out[i] = out[i + 1] + dt * cdf[i];
    return out;
}

namespace {

void check_measure(const FiniteBetaMeasure& mu) {
    if (mu.cdf.size() < 3) throw std::invalid_argument("measure: grid too small");
    if (std::abs(mu.cdf.back() - 1.0) > 1e-9)
        throw std::invalid_argument("measure: cdf must end at 1");
    for (size_t i = 0; i + 1 < mu.cdf.size(); ++i) {
        if (mu.cdf[i] < -1e-12 || mu.cdf[i + 1] - mu.cdf[i] < -1e-12)
            throw std::invalid_argument("measure: cdf must be non-decreasing in [0,1]");
    }
    if (!(mu.beta > 0.0)) throw std::invalid_argument("measure: beta must be > 0");
}

// int over one cell of 1/(linear from a to b), cell width dt
double cell_inv(double a, double b, double dt) {
    const double r = (a - b) / a;
    if (std::abs(r) < 1e-4)
        return dt / a * (1.0 + r * (0.5 + r * (1.0 / 3.0 + r * 0.25)));
    return dt * (std::log(a) - std::log(b)) / (a - b);
}

} // namespace

double cs_energy(const FiniteBetaMeasure& mu, const MixedModel& model) {
    check_measure(mu);
    const size_t n = mu.G();
    const double dt = 1.0 / static_cast<double>(n);
    const size_t istar = mu.qstar_index();
    if (istar >= n)
        throw std::domain_error("cs_energy: support reaches 1 only at the last grid point");

    const double b2 = mu.beta * mu.beta;
    double term_xi = 0.0;
    for (size_t j = 0; j < n; ++j) {
        const double tl = static_cast<double>(j) * dt;
        const double tr = tl + dt;
        term_xi += mu.cdf[j] * (model.eval(tr, 0) - model.eval(tl, 0));
    }
    const auto hat = mu.hat();
    double term_inv = 0.0;
    for (size_t i = 0; i < istar; ++i) term_inv += cell_inv(hat[i], hat[i + 1], dt);
    const double qstar = static_cast<double>(istar) * dt;
    term_inv += std::log(1.0 - qstar);
    return 0.5 * (b2 * term_xi + mu.h * mu.h * hat[0] + term_inv);
}

double cs_energy_lsc(const FiniteBetaMeasure& mu, const MixedModel& model) {
    check_measure(mu);
    const size_t n = mu.G();
    const double dt = 1.0 / static_cast<double>(n);
    const size_t istar = mu.qstar_index();
    if (istar >= n)
        throw std::domain_error("cs_energy: support reaches 1 only at the last grid point");

    const auto hat = mu.hat();
    const double b2 = mu.beta * mu.beta;
    double term_xi = 0.0;
    double term_inv = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double tl = static_cast<double>(i) * dt;
        const double tr = tl + dt;
        const double slope = (hat[i + 1] - hat[i]) / dt;
        term_xi += int_xi2_linear(model, tl, tr, hat[i] - slope * tl, slope);
        if (i >= istar) continue;  // there hat == 1 - t, the counterterm cancels
        term_inv += cell_inv(hat[i], hat[i + 1], dt) - std::log((1.0 - tl) / (1.0 - tr));
    }
    return 0.5 * (b2 * term_xi + mu.h * mu.h * hat[0] + term_inv);
}

double gs_energy(const MeasureA& nu, const MixedModel& model, double h) {
    double sum = 0.0;
    if (!nu.grid_density.empty()) {
        const size_t G = nu.grid_density.size();
        const double dt = 1.0 / static_cast<double>(G);
        double phi_r = nu.atom_at_one;
        std::vector<double> phis(G + 1);
        phis[G] = phi_r;
        for (size_t i = G; i-- > 0;) phis[i] = phis[i + 1] + nu.grid_density[i] * dt;
        for (size_t i = 0; i < G; ++i) {
            const double tl = static_cast<double>(i) * dt;
            const double tr = tl + dt;
            const double slope = (phis[i + 1] - phis[i]) / dt;
            sum += int_xi2_linear(model, tl, tr, phis[i] - slope * tl, slope);
            sum += int_inv_linear(tl, tr, phis[i], slope);
        }
        return sum + h * h * phis[0];
    }
    std::vector<double> pts{0.0, 1.0};
    for (const auto& atom : nu.atoms) pts.push_back(atom.q);
    for (const auto& seg : nu.segments) {
        pts.push_back(seg.a);
        pts.push_back(seg.b);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        sum += adaptive_simpson(
            [&](double s) {
                const double p = nu.phi(s);
                return model.eval(s, 2) * p + 1.0 / p;
            },
            pts[i], pts[i + 1], 1e-11);
    }
    return sum + h * h * nu.phi(0.0);
}

} // namespace sphgse
