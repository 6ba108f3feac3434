#pragma once

#include <string>

#include "sphgse/model.hpp"
#include "sphgse/onersb.hpp"
#include "sphgse/order_param.hpp"
#include "sphgse/solver.hpp"

namespace sphgse {

/// Model schema: {"label": string?, "terms": [{"p": int, "beta_sq": float}, ...]}
MixedModel load_model(const std::string& path);
MixedModel model_from_json_text(const std::string& text);
std::string model_to_json_text(const MixedModel& model);

/// Ansatz schema: {"c": float, "atoms": [[q, m], ...], "frsb_segments": [[a, b], ...]}
OrderParamAnsatz load_ansatz(const std::string& path, const MixedModel& model);
OrderParamAnsatz ansatz_from_json_text(const std::string& text, const MixedModel& model);

std::string solve_result_to_json(const SolveResult& res, const MixedModel& model);
std::string classification_to_json(const Classification& cls);
std::string certificate_to_json(const GapResult& gap, const ObstacleReport& obstacle,
                                const BcResiduals& bc);
std::string finite_beta_to_json(const FiniteBetaResult& res);
std::string gamma_rows_to_json(const std::vector<ModerateDeviationRow>& rows);

/// Plot-ready table: t, phi, eta, xi, eta - xi, structure function.
std::string solve_result_to_csv(const SolveResult& res, const MixedModel& model);
std::string sweep_to_csv(const std::vector<SweepRow>& rows,
                         const std::vector<std::pair<std::string, double>>& boundaries);
std::string finite_beta_to_csv(const FiniteBetaResult& res);
std::string gamma_rows_to_csv(const std::vector<ModerateDeviationRow>& rows);

/// Writes via a temp file in the same directory plus rename.
void atomic_write(const std::string& path, const std::string& content);

} // namespace sphgse
