#include "sphgse/order_param.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sphgse {

namespace {

// g = (xi'')^{-1/2} and g' in closed form; segment contributions to phi and
// to the density reduce to differences of g and g'.
double g_of(const MixedModel& model, double t) {
    return 1.0 / std::sqrt(model.eval(t, 2));
}

double gp_of(const MixedModel& model, double t) {
    const double x2 = model.eval(t, 2);
    return -0.5 * std::pow(x2, -1.5) * model.eval(t, 3);
}

// int_a^b (-g'')(tau) * (1 - max(tau, t)) dtau, by parts.
double segment_phi_contribution(const MixedModel& model, const Segment& seg, double t) {
    const double a = seg.a;
    const double b = seg.b;
    if (a >= b) return 0.0;
    if (t >= b) {
        return (1.0 - t) * (gp_of(model, a) - gp_of(model, b));
    }
    const double s = std::max(t, a);
    // (1-t) * int_a^s (-g'') + int_s^b (-g'')(1-tau) dtau
    return (1.0 - t) * (gp_of(model, a) - gp_of(model, s)) +
           (gp_of(model, s) * (1.0 - s) - gp_of(model, b) * (1.0 - b) +
            g_of(model, s) - g_of(model, b));
}

} // namespace

double GridFunction::interp(double t) const {
    const size_t n = G();
    if (t <= 0.0) return values.front();
    if (t >= 1.0) return values.back();
    const double x = t * static_cast<double>(n);
    const size_t i = std::min(static_cast<size_t>(x), n - 1);
    const double frac = x - static_cast<double>(i);
    return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

OrderParamAnsatz::OrderParamAnsatz(double c_, std::vector<Atom> atoms_,
                                   std::vector<Segment> segments_, MixedModel model_)
    : c(c_), atoms(std::move(atoms_)), frsb_segments(std::move(segments_)),
      model(std::move(model_)) {
    if (!(c > 0.0)) throw std::invalid_argument("ansatz: c must be > 0");
    std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.q < y.q; });
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].q < 0.0 || atoms[i].q >= 1.0)
            throw std::invalid_argument("ansatz: atom location must be in [0,1)");
        if (!(atoms[i].m > 0.0)) throw std::invalid_argument("ansatz: atom mass must be > 0");
        if (i > 0 && !(atoms[i].q > atoms[i - 1].q))
            throw std::invalid_argument("ansatz: atom locations must be strictly increasing");
    }
    std::sort(frsb_segments.begin(), frsb_segments.end(),
              [](const Segment& x, const Segment& y) { return x.a < y.a; });
    for (size_t i = 0; i < frsb_segments.size(); ++i) {
        const auto& s = frsb_segments[i];
        if (!(s.a < s.b) || s.a < 0.0 || s.b > 1.0)
            throw std::invalid_argument("ansatz: segment must satisfy 0 <= a < b <= 1");
        if (i > 0 && s.a < frsb_segments[i - 1].b)
            throw std::invalid_argument("ansatz: segments must be disjoint");
        // curvature density -dfrak must be nonnegative on the segment
        for (double t : {s.a, 0.5 * (s.a + s.b), s.b}) {
            if (t == 0.0 && !model.quadratic_weight()) continue;
            if (model.dfrak(std::max(t, 1e-12)) > 1e-10)
                throw std::invalid_argument("ansatz: segment lies in a positive region of dfrak");
        }
    }
}

double OrderParamAnsatz::phi(double t) const {
    double value = c;
    for (const auto& atom : atoms) value += atom.m * (1.0 - std::max(atom.q, t));
    for (const auto& seg : frsb_segments) value += segment_phi_contribution(model, seg, t);
    return value;
}

double OrderParamAnsatz::density(double s) const {
    double m = 0.0;
    for (const auto& atom : atoms)
        if (atom.q <= s) m += atom.m;
    for (const auto& seg : frsb_segments) {
        if (s <= seg.a) continue;
        const double hi = std::min(s, seg.b);
        m += gp_of(model, seg.a) - gp_of(model, hi);
    }
    return m;
}

std::vector<double> OrderParamAnsatz::breakpoints() const {
    std::vector<double> pts{0.0, 1.0};
    for (const auto& atom : atoms) pts.push_back(atom.q);
    for (const auto& seg : frsb_segments) {
        pts.push_back(seg.a);
        pts.push_back(seg.b);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-15; }),
              pts.end());
    return pts;
}

bool OrderParamAnsatz::is_one_rsb() const {
    return frsb_segments.empty() && atoms.size() == 1 && atoms[0].q == 0.0;
}

GridFunction to_grid(const OrderParamAnsatz& ansatz, size_t G) {
    if (G < 100) throw std::invalid_argument("to_grid: G must be >= 100");
    GridFunction grid;
    grid.values.resize(G + 1);
    for (size_t i = 0; i <= G; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(G);
        const double value = ansatz.phi(t);
        if (!(value > 0.0)) throw std::invalid_argument("to_grid: phi must stay positive");
        grid.values[i] = value;
    }
    return grid;
}

MeasureA to_measure(const OrderParamAnsatz& ansatz) {
    MeasureA nu;
    nu.atoms = ansatz.atoms;
    nu.segments = ansatz.frsb_segments;
    nu.model = ansatz.model;
    nu.atom_at_one = ansatz.c;
    return nu;
}

MeasureA to_measure(const GridFunction& phi) {
    const size_t G = phi.G();
    if (G < 2) throw std::invalid_argument("to_measure: grid too small");
    const double dt = phi.dt();
    MeasureA nu;
    nu.atom_at_one = phi.values.back();
    nu.grid_density.resize(G);
    double max_density = 0.0;
    for (size_t i = 0; i < G; ++i) {
        nu.grid_density[i] = -(phi.values[i + 1] - phi.values[i]) / dt;
        max_density = std::max(max_density, std::abs(nu.grid_density[i]));
    }
    // atoms of dm show up as jumps between adjacent cell densities
    const double jump_floor = 1e-5 * (1.0 + max_density);
    double prev = 0.0;
    for (size_t i = 0; i < G; ++i) {
        const double jump = nu.grid_density[i] - prev;
        if (jump > jump_floor) nu.atoms.push_back({phi.t(i), jump});
        prev = nu.grid_density[i];
    }
    return nu;
}

double MeasureA::mass_density(double s) const {
    if (!grid_density.empty()) {
        const size_t G = grid_density.size();
        const size_t i = std::min(static_cast<size_t>(s * static_cast<double>(G)), G - 1);
        return grid_density[i];
    }
    double m = 0.0;
    for (const auto& atom : atoms)
        if (atom.q <= s) m += atom.m;
    for (const auto& seg : segments) {
        if (s <= seg.a || !model) continue;
        const double hi = std::min(s, seg.b);
        m += gp_of(*model, seg.a) - gp_of(*model, hi);
    }
    return m;
}

double MeasureA::phi(double s) const {
    if (!grid_density.empty()) {
        const size_t G = grid_density.size();
        const double dt = 1.0 / static_cast<double>(G);
        double value = atom_at_one;
        for (size_t i = 0; i < G; ++i) {
            const double l = static_cast<double>(i) * dt;
            const double r = l + dt;
            if (r <= s) continue;
            value += grid_density[i] * (r - std::max(l, s));
        }
        return value;
    }
    double value = atom_at_one;
    for (const auto& atom : atoms) value += atom.m * (1.0 - std::max(atom.q, s));
    if (model)
        for (const auto& seg : segments)
            value += segment_phi_contribution(*model, seg, s);
    return value;
}

std::vector<ValidationIssue> validate(const GridFunction& phi, double tol) {
    std::vector<ValidationIssue> issues;
    const size_t n = phi.values.size();
    for (size_t i = 0; i < n; ++i) {
        if (!(phi.values[i] > 0.0))
            issues.push_back({i, "positivity", phi.values[i]});
    }
    for (size_t i = 0; i + 1 < n; ++i) {
        const double rise = phi.values[i + 1] - phi.values[i];
        if (rise > tol) issues.push_back({i, "monotone", rise});
    }
    for (size_t i = 1; i + 1 < n; ++i) {
        const double second = phi.values[i + 1] - 2.0 * phi.values[i] + phi.values[i - 1];
        if (second > tol) issues.push_back({i, "concave", second});
    }
    return issues;
}

} // namespace sphgse
