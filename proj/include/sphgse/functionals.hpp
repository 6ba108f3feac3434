#pragma once

#include <optional>
#include <vector>

#include "sphgse/model.hpp"
#include "sphgse/order_param.hpp"

namespace sphgse {

struct CertReports {
    double obstacle_margin = 0;   // min(eta - xi) over the grid
    double obstacle_argmin = 0;
    double bc_eta_at_one = 0;     // eta(1) - xi(1)
    double bc_slope_at_zero = 0;  // eta'(0) - (xi'(0) - h^2)
    double bc_slope_at_one = 0;   // eta'(1) - xi'(1)
    double bc_eta_at_zero = 0;    // eta(0) - xi(0)
};

/// Dual candidate eta built from a generating phi via eta'' = 1/phi^2 with
/// the K-membership boundary data pinned by construction.
struct DualCertificate {
    GridFunction phi;
    double h = 0;
    std::vector<double> eta;        // on phi's grid
    std::vector<double> eta_prime;
    std::optional<OrderParamAnsatz> source;  // exact evaluator when ansatz-born
    CertReports reports;

    /// eta at an off-grid point; closed form / quadrature for ansatz-born
    /// certificates, linear interpolation otherwise.
    double eta_at(double t, const MixedModel& model) const;
};

double primal_energy(const GridFunction& phi, const MixedModel& model, double h);
double primal_energy(const OrderParamAnsatz& phi, const MixedModel& model, double h);

DualCertificate formal_conjugate(const GridFunction& phi, const MixedModel& model,
                                 double h, size_t grid_G = 0);
DualCertificate formal_conjugate(const OrderParamAnsatz& phi, const MixedModel& model,
                                 double h, size_t grid_G = 2000);

/// 2 int sqrt(eta'') = 2 int 1/phi; closed forms on ansatz-born certificates.
double dual_energy(const DualCertificate& cert, const MixedModel& model);

struct GapResult {
    double gap = 0;
    double primal = 0;
    double dual = 0;
    DualCertificate cert;
};

GapResult duality_gap(const GridFunction& phi, const MixedModel& model, double h);
GapResult duality_gap(const OrderParamAnsatz& phi, const MixedModel& model, double h);

struct ObstacleReport {
    double margin = 0;
    double argmin = 0;
};

ObstacleReport obstacle_check(const DualCertificate& cert, const MixedModel& model,
                              bool refine = true);

/// Scale-relative feasibility tolerance for the obstacle condition.
double obstacle_feasibility_tol(const MixedModel& model);

struct BcResiduals {
    double slope_at_one = 0;   // |eta'(1) - xi'(1)|
    double contact_at_zero = 0;  // min(|eta(0)-xi(0)|, |phi'(0)|)
    double eta_at_zero = 0;
    double phi_slope_at_zero = 0;
};

BcResiduals natural_bc_check(const DualCertificate& cert, const MixedModel& model, double h);

/// Discretized probability measure for the finite-temperature problem; the
/// cdf is cadlag-constant per grid cell, so the hat transform is exact.
struct FiniteBetaMeasure {
    std::vector<double> cdf;  // F_i = mu[0, t_i], non-decreasing, F_G = 1
    double beta = 1;
    double h = 0;

    size_t G() const { return cdf.empty() ? 0 : cdf.size() - 1; }
    /// first grid point where the cdf reaches 1 (within 1e-12)
    double qstar() const;
    size_t qstar_index() const;
    /// hat transform at grid nodes, exact for the cell-constant cdf
    std::vector<double> hat() const;
};

/// Finite-temperature value in the q* < 1 form (support error if the cdf
/// reaches 1 only at the final grid point). Per-cell integrals are closed
/// form, so this agrees with cs_energy_lsc to machine precision.
double cs_energy(const FiniteBetaMeasure& mu, const MixedModel& model);

/// The lower semi-continuous form with the 1/(1-s) counterterm.
double cs_energy_lsc(const FiniteBetaMeasure& mu, const MixedModel& model);

/// GS functional on the measure side, evaluated by adaptive quadrature of
/// xi'' nu[s,1] + 1/nu[s,1]; independent route for consistency checks.
double gs_energy(const MeasureA& nu, const MixedModel& model, double h);

} // namespace sphgse
