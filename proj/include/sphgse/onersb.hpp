#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sphgse/functionals.hpp"
#include "sphgse/model.hpp"
#include "sphgse/order_param.hpp"

namespace sphgse {

/// One-step solution parameters at zero field: phi = m(1-t) + c with
/// y = 1/(c^2 xi'(1)) solving the scalar master equation a(y) = xi(1)/xi'(1).
struct OneRsbSolution {
    double y = 1;        // > 1, or exactly 1 in the degenerate quadratic case
    double m = 0;
    double c = 0;
    bool converged = false;
    bool sk_degenerate = false;
    double master_residual = 0;   // a(y) - xi(1)/xi'(1)
    double fp_residual_value = 0; // first fixed-point equation
    double fp_residual_slope = 0; // second fixed-point equation
};

struct CriteriaReport {
    double replicon = 0;          // 1/(m+c)^2 - xi''(0)
    double purelike_margin = 0;   // 1/c^2 - xi''(1)
    std::optional<double> aba;    // only under the xi(1) = 1 normalization
    double y_lower = 0;           // xi''(1)/xi'(1)
    double y_upper = 0;           // xi'(1)/xi''(0), +inf when xi''(0) = 0
    bool replicon_nonneg = false;
    bool purelike_or_critical = false;
};

/// a(y) = (1/(y-1)) ((y/(y-1)) log y - 1); strictly decreasing on (1, inf)
/// with limits 1/2 at 1+ and 0 at infinity.
double a_of_y(double y);
double a_of_y_prime(double y);

OneRsbSolution solve_master(const MixedModel& model);

CriteriaReport criteria(const MixedModel& model, const OneRsbSolution& sol);

/// Two-point functional whose sign decides pure-like vs full-like when the
/// model is normalized to xi(1) = 1; arguments are nu' = xi'(1), nu'' = xi''(1).
double aba_value(double nu_prime, double nu_second);

struct ZReport {
    std::map<int, double> coefficients;  // monomial degree -> coefficient
    int sign_changes = 0;                // strict sign changes in degree order
    std::vector<double> roots_in_01;     // located roots of Z in (0,1)
};

/// Z(t) = 1 - C (x - t)^2 xi''(t) with x = y/(y-1), C = (y-1)^2/(xi'(1) y);
/// only models supported on degrees {2, p} are accepted.
ZReport z_sign_changes(const MixedModel& model, const OneRsbSolution& sol);

enum class ModelClass { SK_RS, ONE_RSB, NOT_ONE_RSB, FRSB_CANDIDATE };

std::string to_string(ModelClass c);

struct Classification {
    ModelClass model_class = ModelClass::NOT_ONE_RSB;
    OneRsbSolution sol;
    CriteriaReport report;
    double obstacle_margin = 0;
    double obstacle_argmin = 0;
    double gap = 0;
    double gse = 0;
    std::vector<std::string> failing_flags;
};

/// Classifies via the one-step criteria plus the certificate's obstacle
/// margin; models whose structure function is nonpositive throughout are
/// reported as FRSB candidates when the one-step certificate fails.
Classification classify_2p(const MixedModel& model);

/// At zero field only the pure quadratic model is replica-symmetric.
bool rs_check(const MixedModel& model);

} // namespace sphgse
