#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sphgse/model.hpp"

namespace sphgse {

/// phi sampled on the uniform grid t_i = i/G, i = 0..G.
struct GridFunction {
    std::vector<double> values;

    size_t G() const { return values.empty() ? 0 : values.size() - 1; }
    double dt() const { return 1.0 / static_cast<double>(G()); }
    double t(size_t i) const { return static_cast<double>(i) / static_cast<double>(G()); }
    double at(size_t i) const { return values[i]; }

    /// Linear interpolation between grid nodes.
    double interp(double t) const;
};

struct Atom {
    double q = 0;  // location in [0,1)
    double m = 0;  // mass > 0
};

struct Segment {
    double a = 0;
    double b = 0;  // (a,b) subset of (0,1]
};

/// Structured order parameter: phi(t) = c + int_t^1 m(s) ds where the density
/// m carries the atoms plus, on each FRSB segment, the curvature density
/// -dfrak of the referenced model (so phi matches (xi'')^{-1/2} + affine
/// there). All evaluations are closed-form through g = (xi'')^{-1/2}.
struct OrderParamAnsatz {
    double c = 0;
    std::vector<Atom> atoms;           // strictly increasing locations
    std::vector<Segment> frsb_segments;  // disjoint
    MixedModel model;

    OrderParamAnsatz(double c_, std::vector<Atom> atoms_, std::vector<Segment> segments_,
                     MixedModel model_);

    double phi(double t) const;
    /// density m(s) of the corresponding measure (without the atom at 1)
    double density(double s) const;
    /// m(1^-), the total step-plus-ac density reached at the right end
    double density_at_one() const { return density(1.0); }

    /// Sorted breakpoints (atom locations, segment endpoints, 0 and 1);
    /// phi is smooth between consecutive breakpoints.
    std::vector<double> breakpoints() const;

    /// True when the ansatz is a plain 1RSB line m(1-t)+c (single atom at 0,
    /// no segments).
    bool is_one_rsb() const;
};

/// Measure-side view nu = m(t)dt + c delta_1 with step-plus-ac density.
struct MeasureA {
    std::vector<Atom> atoms;           // atoms of dm
    std::vector<Segment> segments;     // ac pieces with density -dfrak
    std::optional<MixedModel> model;   // referenced by segments
    double atom_at_one = 0;            // c

    /// grid-extracted density values m(t_i) when built from a GridFunction
    std::vector<double> grid_density;

    double mass_density(double s) const;  // m(s)
    double phi(double s) const;           // nu[s,1]
};

GridFunction to_grid(const OrderParamAnsatz& ansatz, size_t G);

MeasureA to_measure(const OrderParamAnsatz& ansatz);
MeasureA to_measure(const GridFunction& phi);

struct ValidationIssue {
    size_t index = 0;
    std::string kind;      // "positivity" | "monotone" | "concave"
    double magnitude = 0;
};

/// Checks discretized membership in the cone C; empty report means valid.
std::vector<ValidationIssue> validate(const GridFunction& phi, double tol = 1e-12);

} // namespace sphgse
