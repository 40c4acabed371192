#pragma once

// JSON glue: metrics/manifest output, trajectory export, and the NLP debug
// dump used for solver diagnostics.

#include <fstream>
#include <json.hpp>
#include <string>

#include "iptm/plant.hpp"
#include "iptm/solver.hpp"
#include "iptm/transcription.hpp"

namespace iptm::json_io {

using nlohmann::json;

inline json metrics_to_json(const plant::Metrics& m) {
    json j;
    if (m.t_chg_min) j["t_chg_min"] = *m.t_chg_min;
    else j["t_chg_min"] = nullptr;
    j["cv_c_sec"] = m.cv_c_sec;
    j["t_cab_final_c"] = m.t_cab_final_c;
    j["cooling_energy_j"] = m.cooling_energy_j;
    j["peak_t_bat_c"] = m.peak_t_bat_c;
    j["status"] = m.status;
    return j;
}

inline json log_to_json(const plant::TrajectoryLog& log) {
    json rows = json::array();
    for (const auto& s : log.samples) {
        rows.push_back({{"clock_s", s.clock},
                        {"soc", s.state.soc},
                        {"t_bat_c", s.state.t_bat},
                        {"t_cab_c", s.state.t_cab},
                        {"q_bat_w", s.inputs.q_bat_cool},
                        {"q_cab_w", s.inputs.q_cab_cool},
                        {"p_chg_w", s.inputs.p_charge},
                        {"p_trac_w", s.inputs.p_traction},
                        {"beta1", s.beta1},
                        {"beta2", s.beta2},
                        {"phase", phase_name(s.phase)}});
    }
    return json{{"schema", "iptm.trajectory.v1"}, {"samples", rows}};
}

/// Layout, bounds and residual values at a point — enough to debug a solve.
inline json nlp_debug_dump(const transcription::NlpProblem& p, const Eigen::VectorXd& z) {
    const auto& L = p.layout();
    json layout{{"n_samples", L.n_samples}, {"n_charge", L.n_charge}, {"dim", L.dim},
                {"q_bat", L.q_bat},         {"q_cab", L.q_cab},       {"p_chg", L.p_chg},
                {"dt2", L.dt2},             {"soc", L.soc},           {"t_bat", L.t_bat},
                {"t_cab", L.t_cab},         {"eps1", L.eps1},         {"eps2", L.eps2}};
    auto vec = [](const Eigen::VectorXd& v) {
        std::vector<double> out(v.data(), v.data() + v.size());
        return out;
    };
    json j;
    j["layout"] = layout;
    j["lower_bounds"] = vec(p.lower_bounds());
    j["upper_bounds"] = vec(p.upper_bounds());
    j["point"] = vec(z);
    j["objective"] = p.objective(z);
    j["eq_residuals"] = vec(p.eq_residuals(z));
    j["ineq_residuals"] = vec(p.ineq_residuals(z));
    return j;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace iptm::json_io
