#pragma once

// The run-one-case-to-a-directory pipeline shared by the CLI and the
// acceptance suite: closed loop + trajectory.csv + metrics.json +
// manifest.json with a deterministic config stamp.

#include <filesystem>
#include <string>

#include "iptm/json_io.hpp"
#include "iptm/scenario.hpp"

namespace iptm::runner {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a over the canonical serialized scenario + case id. Stable across
/// identical inputs, independent of file paths.
inline std::string config_hash(const scenario::Scenario& s, scenario::CaseId id) {
    toml::Document doc;  // canonical text via the scenario serializer
    std::string canon;
    {
        namespace fs = std::filesystem;
        // serialize_scenario writes files; hash the in-memory canonical string instead
        std::ostringstream os;
        os.precision(17);
        os << s.params.battery.open_circuit_voltage << '|' << s.params.battery.internal_resistance
           << '|' << s.params.battery.charge_capacity << '|' << s.params.battery.thermal_mass
           << '|' << s.params.battery.specific_heat << '|'
           << s.params.battery.ambient_exchange_coeff << '|' << s.params.cabin.thermal_mass << '|'
           << s.params.cabin.specific_heat << '|' << s.params.cabin.convection_conductance << '|'
           << s.params.cabin.solar_load << '|' << s.params.cabin.ventilation_load << '|'
           << s.params.cabin.metabolic_load_per_occupant << '|' << s.params.cabin.occupant_count
           << '|' << s.params.cooling.cop << '|' << s.params.cooling.q_total_max << '|'
           << s.params.cooling.q_bat_max << '|' << s.params.cooling.q_cab_max << '|'
           << s.params.vehicle.mass << '|' << s.params.vehicle.cd_a << '|' << s.params.vehicle.c_rr
           << '|' << s.params.vehicle.eta_drive << '|' << s.params.p_aux_base << '|'
           << s.params.ambient_temp << '|' << s.initial_soc << '|' << s.initial_t_bat << '|'
           << s.initial_t_cab << '|' << s.soc_targ << '|' << s.budget_t_chg << '|'
           << s.arrival_time << '|' << s.limits.soc_min << '|' << s.limits.soc_max << '|'
           << s.limits.t_bat_min << '|' << s.limits.t_bat_max << '|' << s.limits.t_cab_min << '|'
           << s.limits.t_cab_max << '|' << s.limits.p_chg_max << '|' << s.limits.comfort_margin
           << '|' << s.dt1 << '|' << s.n2 << '|' << s.dt2_max << '|' << s.dt_ctrl_drive << '|'
           << s.dt_ctrl_charge << '|' << s.plant_dt << '|' << s.alpha << '|' << s.beta1 << '|'
           << scenario::case_name(id);
        for (size_t i = 0; i < s.cycle.time_s.size(); ++i)
            os << '|' << s.cycle.time_s[i] << ':' << s.cycle.speed_mps[i];
        canon = os.str();
    }
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunArtifacts {
    plant::Metrics metrics;
    std::filesystem::path trajectory_csv;
    std::filesystem::path metrics_json;
    std::filesystem::path manifest_json;
};

inline RunArtifacts run_case_to_dir(const scenario::Scenario& s, scenario::CaseId id,
                                    const std::string& out_dir,
                                    const std::string& scenario_path = "",
                                    bool trace = false) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    mpc::RunSetup setup = scenario::make_run_setup(s, scenario::CasePreset::make(id));
    std::ofstream trace_stream;
    if (trace) {
        trace_stream.open(fs::path(out_dir) / "trace.ndjson");
        setup.config.solver_opts.trace = &trace_stream;
    }
    mpc::RunResult res = mpc::run_closed_loop(setup);

    RunArtifacts art;
    art.metrics = res.metrics;
    art.trajectory_csv = fs::path(out_dir) / "trajectory.csv";
    art.metrics_json = fs::path(out_dir) / "metrics.json";
    art.manifest_json = fs::path(out_dir) / "manifest.json";

    json_io::write_file(art.trajectory_csv.string(), plant::to_csv(res.log));
    json_io::write_file(art.metrics_json.string(), json_io::metrics_to_json(res.metrics).dump(2));

    nlohmann::json manifest{{"scenario", scenario_path},
                            {"case", scenario::case_name(id)},
                            {"out_dir", out_dir},
                            {"config_hash", config_hash(s, id)},
                            {"tool_version", kToolVersion}};
    json_io::write_file(art.manifest_json.string(), manifest.dump(2));
    return art;
}

}  // namespace iptm::runner
