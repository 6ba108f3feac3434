#include "sphgse/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sphgse {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

MixedModel model_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    if (!j.contains("terms") || !j["terms"].is_array())
        throw std::runtime_error("model json: missing terms array");
    std::vector<ModelTerm> terms;
    for (const auto& t : j["terms"]) {
        ModelTerm term;
        term.degree = t.at("p").get<int>();
        term.weight = t.at("beta_sq").get<double>();
        terms.push_back(term);
    }
    std::string label = j.value("label", std::string{});
    return MixedModel(std::move(terms), std::move(label));
}

MixedModel load_model(const std::string& path) {
    return model_from_json_text(read_file(path));
}

std::string model_to_json_text(const MixedModel& model) {
    json j;
    if (!model.label().empty()) j["label"] = model.label();
    j["terms"] = json::array();
    for (const auto& t : model.terms())
        j["terms"].push_back({{"p", t.degree}, {"beta_sq", t.weight}});
    return j.dump(2) + "\n";
}

OrderParamAnsatz ansatz_from_json_text(const std::string& text, const MixedModel& model) {
    const json j = json::parse(text);
    const double c = j.at("c").get<double>();
    std::vector<Atom> atoms;
    for (const auto& a : j.value("atoms", json::array()))
        atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    std::vector<Segment> segs;
    for (const auto& s : j.value("frsb_segments", json::array()))
        segs.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    return OrderParamAnsatz(c, std::move(atoms), std::move(segs), model);
}

OrderParamAnsatz load_ansatz(const std::string& path, const MixedModel& model) {
    return ansatz_from_json_text(read_file(path), model);
}

std::string solve_result_to_json(const SolveResult& res, const MixedModel& model) {
    json j;
    j["GSE"] = res.gse;
    j["P"] = res.P_value;
    j["D"] = res.D_value;
    j["gap"] = res.gap;
    j["obstacle_margin"] = res.obstacle_margin;
    j["argmin"] = res.obstacle_argmin;
    j["certified"] = res.obstacle_margin >= -obstacle_feasibility_tol(model);
    j["method"] = res.method;
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;
    j["bc_residuals"] = {
        {"slope_at_one", res.certificate.reports.bc_slope_at_one},
        {"eta_at_zero", res.certificate.reports.bc_eta_at_zero},
        {"slope_at_zero", res.certificate.reports.bc_slope_at_zero},
        {"eta_at_one", res.certificate.reports.bc_eta_at_one},
    };
    if (res.ansatz) {
        json a;
        a["c"] = res.ansatz->c;
        a["atoms"] = json::array();
        for (const auto& atom : res.ansatz->atoms)
            a["atoms"].push_back({atom.q, atom.m});
        a["frsb_segments"] = json::array();
        for (const auto& seg : res.ansatz->frsb_segments)
            a["frsb_segments"].push_back({seg.a, seg.b});
        j["ansatz"] = a;
    }
    return j.dump(2) + "\n";
}

std::string classification_to_json(const Classification& cls) {
    json j;
    j["class"] = to_string(cls.model_class);
    j["y"] = cls.sol.y;
    j["m"] = cls.sol.m;
    j["c"] = cls.sol.c;
    j["replicon"] = cls.report.replicon;
    j["purelike_margin"] = cls.report.purelike_margin;
    if (cls.report.aba)
        j["aba"] = *cls.report.aba;
    else
        j["aba"] = nullptr;
    j["obstacle_margin"] = cls.obstacle_margin;
    j["obstacle_argmin"] = cls.obstacle_argmin;
    j["gse"] = cls.gse;
    j["gap"] = cls.gap;
    j["failing_flags"] = cls.failing_flags;
    return j.dump(2) + "\n";
}

std::string certificate_to_json(const GapResult& gap, const ObstacleReport& obstacle,
                                const BcResiduals& bc) {
    json j;
    j["gap"] = gap.gap;
    j["obstacle_margin"] = obstacle.margin;
    j["argmin"] = obstacle.argmin;
    j["bc_residuals"] = {
        {"slope_at_one", bc.slope_at_one},
        {"contact_at_zero", bc.contact_at_zero},
        {"eta_at_zero", bc.eta_at_zero},
        {"phi_slope_at_zero", bc.phi_slope_at_zero},
    };
    j["P"] = gap.primal;
    j["D"] = gap.dual;
    j["GSE"] = 0.5 * gap.primal;
    return j.dump(2) + "\n";
}

std::string finite_beta_to_json(const FiniteBetaResult& res) {
    json j;
    j["beta"] = res.mu.beta;
    j["energy"] = res.energy;
    j["free_energy"] = res.free_energy;
    j["qstar"] = res.qstar;
    j["beta_one_minus_qstar"] = res.beta_one_minus_qstar;
    j["atom_at_zero_rescaled"] = res.atom_at_zero_rescaled;
    j["atom_estimate"] = res.atom_estimate;
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;
    return j.dump(2) + "\n";
}

std::string gamma_rows_to_json(const std::vector<ModerateDeviationRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"beta", r.beta},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs},
                       {"sup_distance", r.sup_distance},
                       {"atom_estimate", r.atom_estimate},
                       {"atom_target", r.atom_target},
                       {"atom_flagged", r.atom_flagged}});
    }
    return arr.dump(2) + "\n";
}

std::string solve_result_to_csv(const SolveResult& res, const MixedModel& model) {
    std::ostringstream out;
    out << "t,phi,eta,xi,eta_minus_xi,structure\n";
    const size_t G = res.phi.G();
    for (size_t i = 0; i <= G; ++i) {
        const double t = res.phi.t(i);
        const double xi = model.eval(t, 0);
        double structure = 0.0;
        const double teval = (t == 0.0 && !model.quadratic_weight()) ? 1e-6 : t;
        structure = model.dfrak(teval);
        out << fmt(t) << ',' << fmt(res.phi.at(i)) << ',' << fmt(res.certificate.eta[i])
            << ',' << fmt(xi) << ',' << fmt(res.certificate.eta[i] - xi) << ','
            << fmt(structure) << '\n';
    }
    return out.str();
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows,
                         const std::vector<std::pair<std::string, double>>& boundaries) {
    std::ostringstream out;
    out << "mu,y,m,c,replicon,purelike_margin,gse,gap,obstacle_margin,class\n";
    for (const auto& r : rows) {
        out << fmt(r.mu) << ',' << fmt(r.y) << ',' << fmt(r.m) << ',' << fmt(r.c) << ','
            << fmt(r.replicon) << ',' << fmt(r.purelike_margin) << ',' << fmt(r.gse)
            << ',' << fmt(r.gap) << ',' << fmt(r.obstacle_margin) << ','
            << to_string(r.model_class) << '\n';
    }
    for (const auto& [name, value] : boundaries)
        out << "# boundary," << name << ',' << fmt(value) << '\n';
    return out.str();
}

std::string finite_beta_to_csv(const FiniteBetaResult& res) {
    std::ostringstream out;
    out << "t,cdf,rescaled_cdf\n";
    const size_t G = res.mu.G();
    for (size_t i = 0; i <= G; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(G);
        out << fmt(t) << ',' << fmt(res.mu.cdf[i]) << ','
            << fmt(res.mu.beta * res.mu.cdf[i]) << '\n';
    }
    return out.str();
}

std::string gamma_rows_to_csv(const std::vector<ModerateDeviationRow>& rows) {
    std::ostringstream out;
    out << "beta,lhs,rhs,sup_distance,atom_estimate,atom_target,atom_flagged\n";
    for (const auto& r : rows) {
        out << fmt(r.beta) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ','
            << fmt(r.sup_distance) << ',' << fmt(r.atom_estimate) << ','
            << fmt(r.atom_target) << ',' << (r.atom_flagged ? 1 : 0) << '\n';
    }
    return out.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.parent_path().empty() ? "." : target.parent_path();
    const fs::path tmp = dir / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

} // namespace sphgse
