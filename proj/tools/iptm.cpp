// iptm: run the simulator/MPC cases, sweep weights, verify gradients and
// compare runs. See README.md for the file formats each command emits.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "iptm/gradcheck.hpp"
#include "iptm/json_io.hpp"
#include "iptm/runner.hpp"
#include "iptm/scenario.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("IPTM_LOG");
    if (!env) return 0;  // error only
    std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[iptm] " << msg << "\n";
}

int cmd_run(const std::string& scenario_path, const std::string& case_id,
            const std::string& out_dir, double plant_dt_override, bool trace) {
    using namespace iptm;
    scenario::Scenario s = scenario::load_scenario(scenario_path);
    if (plant_dt_override > 0) s.plant_dt = plant_dt_override;
    scenario::CaseId id = scenario::parse_case(case_id);
    info("running case " + std::string(scenario::case_name(id)));
    runner::RunArtifacts art =
        runner::run_case_to_dir(s, id, out_dir, scenario_path, trace);
    info("status " + art.metrics.status +
         (art.metrics.t_chg_min ? " t_chg_min " + std::to_string(*art.metrics.t_chg_min) : ""));
    return art.metrics.status == "converged" ? 0 : 2;
}

int cmd_sweep(const std::string& scenario_path, std::vector<double> beta2_values,
              const std::string& out_dir, int parallel) {
    using namespace iptm;
    if (beta2_values.size() < 2) {
        std::cerr << "sweep: need at least two --beta2 values\n";
        return 1;
    }
    scenario::Scenario s = scenario::load_scenario(scenario_path);
    std::filesystem::create_directories(out_dir);

    struct Row {
        double beta2;
        plant::Metrics metrics;
        std::string status;
    };
    std::vector<Row> rows(beta2_values.size());
    auto run_one = [&](size_t i) {
        Row r;
        r.beta2 = beta2_values[i];
        try {
            auto setup = scenario::make_run_setup(s, scenario::CasePreset::make(scenario::CaseId::IIa),
                                                  beta2_values[i]);
            auto res = mpc::run_closed_loop(setup);
            r.metrics = res.metrics;
            r.status = res.metrics.status;
        } catch (const std::exception& e) {
            r.status = std::string("error: ") + e.what();
        }
        rows[i] = r;
    };
    if (parallel > 1) {
        std::vector<std::future<void>> futs;
        size_t next = 0;
        while (next < rows.size()) {
            futs.clear();
            for (int k = 0; k < parallel && next < rows.size(); ++k, ++next)
                futs.push_back(std::async(std::launch::async, run_one, next - 0));
            for (auto& f : futs) f.get();
        }
    } else {
        for (size_t i = 0; i < rows.size(); ++i) run_one(i);
    }

    std::string csv = "beta2,t_chg_min,cv_c_sec,t_cab_final_c,status\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6f,%.6f,%.6f,%s\n", r.beta2,
                      r.metrics.t_chg_min.value_or(-1.0), r.metrics.cv_c_sec,
                      r.metrics.t_cab_final_c, r.status.c_str());
        csv += buf;
    }
    iptm::json_io::write_file((std::filesystem::path(out_dir) / "sweep.csv").string(), csv);
    std::cout << csv;
    return 0;
}

int cmd_check_gradients(int n_points, unsigned seed, bool perturb) {
    if (n_points < 1) {
        std::cerr << "check-gradients: --n-points must be >= 1\n";
        return 1;
    }
    auto rep = iptm::gradcheck::run(n_points, seed, perturb);
    std::cout << "checked " << rep.points_checked << " points, max relative error "
              << rep.max_rel_error << "\n";
    if (rep.max_rel_error >= 1e-5) {
        std::cerr << "worst component: " << rep.worst_component << "\n";
        return 1;
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& run_dirs, const std::string& out_file) {
    using nlohmann::json;
    struct Col {
        std::string name;
        json metrics;
    };
    std::vector<Col> cols;
    for (const auto& dir : run_dirs) {
        std::filesystem::path mp = std::filesystem::path(dir) / "metrics.json";
        if (!std::filesystem::exists(mp)) {
            std::cerr << "compare: missing metrics.json in '" << dir << "'\n";
            return 1;
        }
        try {
            json j = json::parse(iptm::json_io::read_file(mp.string()));
            std::string name = dir;
            std::filesystem::path manifest = std::filesystem::path(dir) / "manifest.json";
            if (std::filesystem::exists(manifest)) {
                json m = json::parse(iptm::json_io::read_file(manifest.string()));
                if (m.contains("case")) name = "Case " + m["case"].get<std::string>();
            }
            cols.push_back({name, j});
        } catch (const std::exception& e) {
            std::cerr << "compare: cannot read metrics in '" << dir << "': " << e.what() << "\n";
            return 1;
        }
    }

    const std::vector<std::pair<std::string, std::string>> fields = {
        {"t_chg_min", "t_chg [min]"},
        {"cv_c_sec", "CV [C*sec]"},
        {"t_cab_final_c", "T_cab,final [C]"},
        {"cooling_energy_j", "cooling energy [J]"},
    };

    std::string csv = "metric";
    for (const auto& c : cols) csv += "," + c.name;
    csv += "\n";
    std::string text;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-22s", "");
    text += buf;
    for (const auto& c : cols) {
        std::snprintf(buf, sizeof(buf), "%16s", c.name.c_str());
        text += buf;
    }
    text += "\n";
    for (const auto& [key, label] : fields) {
        csv += key;
        std::snprintf(buf, sizeof(buf), "%-22s", label.c_str());
        text += buf;
        for (const auto& c : cols) {
            double v = c.metrics.contains(key) && !c.metrics[key].is_null()
                           ? c.metrics[key].get<double>()
                           : std::nan("");
            std::snprintf(buf, sizeof(buf), ",%.6g", v);
            csv += buf;
            std::snprintf(buf, sizeof(buf), "%16.4g", v);
            text += buf;
        }
        csv += "\n";
        text += "\n";
    }
    std::cout << text;
    if (!out_file.empty()) iptm::json_io::write_file(out_file, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integrated power & thermal management simulator / MPC"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "closed-loop run of one case preset");
    std::string scenario_path, case_id = "I", out_dir = "out";
    double plant_dt = -1.0;
    bool trace = false;
    run->add_option("--scenario", scenario_path, "scenario TOML")->required();
    run->add_option("--case", case_id, "case preset: I, IIa, IIb, IIc, III");
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--plant-dt", plant_dt, "override plant integration step, s");
    run->add_flag("--trace", trace, "write per-solve NDJSON traces to <out>/trace.ndjson");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Case-II run per beta2 value");
    std::string sweep_scenario, sweep_out = "out";
    std::vector<double> beta2_values;
    int parallel = 1;
    sweep->add_option("--scenario", sweep_scenario, "scenario TOML")->required();
    sweep->add_option("--beta2", beta2_values, "comma-separated beta2 list")
        ->required()
        ->delimiter(',');
    sweep->add_option("--out", sweep_out, "output directory")->required();
    sweep->add_option("--parallel", parallel, "run up to N sweeps concurrently");

    // check-gradients
    auto* grad = app.add_subcommand("check-gradients",
                                    "analytic vs central-FD derivative check");
    int n_points = 100;
    unsigned seed = 2024;
    bool perturb = false;
    grad->add_option("--n-points", n_points, "number of random feasible points");
    grad->add_option("--seed", seed, "RNG seed");
    grad->add_flag("--perturb", perturb, "negative-control hook: injects a gradient error");

    // compare
    auto* cmp = app.add_subcommand("compare", "side-by-side metrics table across runs");
    std::vector<std::string> run_dirs;
    std::string out_file;
    cmp->add_option("--runs", run_dirs, "run directories")->required()->delimiter(',');
    cmp->add_option("--out", out_file, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(scenario_path, case_id, out_dir, plant_dt, trace);
        if (*sweep) return cmd_sweep(sweep_scenario, beta2_values, sweep_out, parallel);
        if (*grad) return cmd_check_gradients(n_points, seed, perturb);
        if (*cmp) return cmd_compare(run_dirs, out_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
