#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sphgse/functionals.hpp"
#include "sphgse/model.hpp"
#include "sphgse/onersb.hpp"
#include "sphgse/order_param.hpp"

namespace sphgse {

struct SolveResult {
    GridFunction phi;
    std::optional<OrderParamAnsatz> ansatz;
    DualCertificate certificate;
    double P_value = 0;
    double D_value = 0;
    double gse = 0;
    double gap = 0;
    double obstacle_margin = 0;
    double obstacle_argmin = 0;
    long iterations = 0;
    std::string method;
    bool converged = false;
    bool inconclusive = false;  // structured reduction failed to certify
};

/// Exact optimum for the pure quadratic model: constant phi = 1/sqrt(xi'(1)).
SolveResult closed_form_rs(const MixedModel& model, size_t G = 2000);

/// Minimizes the discretized energy over the cone by writing
/// phi(t) = c + sum_j rho_j (1 - max(t_j, t)) with c, rho >= 0, so cone
/// membership is automatic and projection is clipping. Accelerated projected
/// gradient with backtracking and restart.
SolveResult grid_minimize(const MixedModel& model, double h, size_t G = 2000,
                          double tol = 1e-12, long max_iter = 200000);

/// Structured finite-dimensional search driven by the sign profile of the
/// model's structure function: atoms on positive pieces, one density segment
/// per negative piece, first atom pinned at 0. Multi-start projected
/// gradient; the result carries a duality certificate, and inconclusive
/// reductions are flagged rather than silently returned.
SolveResult ansatz_minimize(const MixedModel& model, const SignProfile& profile,
                            double h = 0.0, unsigned seed = 1234,
                            size_t cert_G = 2000);

struct FiniteBetaResult {
    FiniteBetaMeasure mu;
    double energy = 0;        // value of the finite-temperature functional
    double free_energy = 0;   // energy / beta
    double qstar = 0;
    double beta_one_minus_qstar = 0;
    double atom_at_zero_rescaled = 0;   // beta * mu({0})
    double atom_estimate = 0;           // beta * E[(1-Y) | Y >= q*]
    long iterations = 0;
    bool converged = false;
};

/// Minimizes the finite-temperature functional over discrete cdfs by
/// projected gradient with an isotonic (pool-adjacent-violators) projection;
/// the top two grid values are pinned at 1 so the support stays inside [0,1).
FiniteBetaResult finite_beta_minimize(const MixedModel& model, double beta, double h,
                                      size_t G = 4000, long max_iter = 50000);

struct ModerateDeviationRow {
    double beta = 0;
    double lhs = 0;        // beta [f(1) - int f dmu_beta]
    double rhs = 0;        // int f' dnu against the zero-temperature measure
    double sup_distance = 0;  // sup_t |beta mu[0,t] - m(t)| away from jumps
    double atom_estimate = 0;
    double atom_target = 0;   // nu({1}) = c
    bool atom_flagged = false;  // estimate far from target (reported, not fatal)
};

/// Polynomial test function f(t) = sum_k coeffs[k] t^k.
ModerateDeviationRow moderate_deviation_report(const FiniteBetaResult& fb,
                                               const SolveResult& gs,
                                               const std::vector<double>& f_coeffs);

struct SweepRow {
    double mu = 0;
    double y = 0;
    double m = 0;
    double c = 0;
    double replicon = 0;
    double purelike_margin = 0;
    double gse = 0;
    double gap = 0;
    double obstacle_margin = 0;
    ModelClass model_class = ModelClass::NOT_ONE_RSB;
};

std::vector<SweepRow> sweep_2p(int p, const std::vector<double>& mu_grid);

/// Bisection on the pure-like flag over the 2+p family; returns mu_c.
double locate_purelike_boundary(int p, double tol = 1e-6);

namespace detail {

/// Discretized energy and gradient in the (c, rho) ray coordinates;
/// exposed for finite-difference gradient checks.
double grid_objective(const MixedModel& model, double h, size_t G, double c,
                      const std::vector<double>& rho);
void grid_gradient(const MixedModel& model, double h, size_t G, double c,
                   const std::vector<double>& rho, double& dc,
                   std::vector<double>& drho);

/// Non-decreasing least-squares projection (pool adjacent violators).
void isotonic_nondecreasing(std::vector<double>& v);

} // namespace detail

} // namespace sphgse
