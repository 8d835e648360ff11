#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "genset/commands.hpp"
#include "genset/csv.hpp"
#include "genset/errors.hpp"

using namespace genset;
namespace fs = std::filesystem;

namespace {

// short but complete load-step experiment, fast enough for unit tests
RunConfig fast_config(const std::string& out_name) {
    RunConfig cfg;
    cfg.scenario.t_step = 0.3;
    cfg.scenario.t_end = 2.3;
    cfg.scenario.dt = 2e-4;
    cfg.out_dir = (fs::temp_directory_path() / out_name).string();
    fs::create_directories(cfg.out_dir);
    return cfg;
}

std::string synthesize_dataset(RunConfig cfg, const std::string& file_name) {
    const TimeSeries meas = simulate_derived(cfg, cfg.system.kind);
    const std::string path = (fs::path(cfg.out_dir) / file_name).string();
    write_csv(path, time_series_to_csv(meas));
    return path;
}

bool file_exists(const RunConfig& cfg, const std::string& name) {
    return fs::exists(fs::path(cfg.out_dir) / name);
}

} // namespace

TEST_SUITE("commands") {

    TEST_CASE("simulate writes the trajectory, the summary, and is repeatable") {
        auto cfg = fast_config("genset_cmd_sim");
        std::ostringstream log;
        auto s1 = cmd_simulate(cfg, log);
        auto s2 = cmd_simulate(cfg, log);

        CHECK(s1.kind == GovernorKind::ggov1d);
        CHECK(s1.has_step);
        CHECK(s1.f_nadir_hz < 60.0);
        CHECK(s1.t_nadir > cfg.scenario.t_step);
        CHECK(s1.p_ss_kw == doctest::Approx(240.0).epsilon(0.02));
        CHECK(s1.v_ss == doctest::Approx(277.128).epsilon(0.02));
        CHECK(s1.f_ss_hz == doctest::Approx(60.0).epsilon(1e-3));

        CHECK(s1.p_ss_kw == s2.p_ss_kw);
        CHECK(s1.f_nadir_hz == s2.f_nadir_hz);

        CHECK(file_exists(cfg, "sim_ggov1d.csv"));
        CHECK(file_exists(cfg, "sim_ggov1d_summary.csv"));
        auto table = read_csv((fs::path(cfg.out_dir) / "sim_ggov1d.csv").string());
        for (const char* name : {"t", "P", "Q", "V", "f"}) CHECK_NOTHROW(table.column_index(name));
        CHECK(table.rows.size() > 1000);
    }

    TEST_CASE("simulate without a load change reports no step") {
        auto cfg = fast_config("genset_cmd_sim_flat");
        cfg.scenario.p1_kw = cfg.scenario.p0_kw;
        cfg.scenario.q1_kvar = cfg.scenario.q0_kvar;
        std::ostringstream log;
        auto s = cmd_simulate(cfg, log);
        CHECK_FALSE(s.has_step);
        CHECK(s.p_ss_kw == doctest::Approx(80.0).epsilon(0.02));
    }

    TEST_CASE("compare scores the generating model best") {
        auto cfg = fast_config("genset_cmd_cmp");
        cfg.data_path = synthesize_dataset(cfg, "dataset.csv");
        cfg.data_kind = "derived";
        std::ostringstream log;
        auto rows = cmd_compare(cfg, log);
        REQUIRE(rows.size() == 4);
        CHECK(rows.front().kind == GovernorKind::ggov1d); // the kind that made the data
        CHECK(rows.front().objective < 1e-9);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].objective >= rows[i - 1].objective);
            CHECK(rows[i].objective > 1e-4); // wrong models measurably miss
        }
        for (const auto& r : rows) {
            CHECK(std::isfinite(r.rebound_nrmse_f));
            CHECK(std::isfinite(r.rebound_mape_f));
        }
        CHECK(file_exists(cfg, "compare.csv"));
        // first column holds the governor names, so inspect the text directly
        std::ifstream in(fs::path(cfg.out_dir) / "compare.csv");
        std::string header;
        std::getline(in, header);
        CHECK(header ==
              "governor,objective,nrmse_P,nrmse_Q,nrmse_V,nrmse_f,rebound_nrmse_f,rebound_mape_f");
        std::size_t data_lines = 0;
        for (std::string line; std::getline(in, line);)
            if (!line.empty()) ++data_lines;
        CHECK(data_lines == 4);

        // a single-kind comparison only runs that kind
        cfg.compare_kinds = {GovernorKind::degov};
        auto one = cmd_compare(cfg, log);
        REQUIRE(one.size() == 1);
        CHECK(one.front().kind == GovernorKind::degov);
    }

    TEST_CASE("identify recovers a single freed gain from its own data") {
        auto cfg = fast_config("genset_cmd_id");
        cfg.data_path = synthesize_dataset(cfg, "dataset.csv");
        cfg.data_kind = "derived";
        cfg.free_groups = {"gov.ggov1d.k"};
        cfg.bounds["gov.ggov1d.k"] = {30.0, 150.0};
        cfg.optimizer.max_evaluations = 30;
        cfg.optimizer.seed = 11;
        cfg.system.ggov1d.k = 60.0; // start away from the generating value

        std::ostringstream log;
        auto res = cmd_identify(cfg, log);
        REQUIRE(res.history.size() == 30);
        CHECK(res.objective < 0.02);
        const double k_hat = res.best.at("gov.ggov1d.k").value;
        CHECK(k_hat >= 30.0);
        CHECK(k_hat <= 150.0);
        CHECK(std::abs(k_hat - 90.42) < 15.0); // near the generating gain
        double best = res.history.front().value;
        for (const auto& h : res.history) {
            best = std::min(best, h.value);
            CHECK(h.best == doctest::Approx(best).epsilon(1e-15));
        }

        CHECK(file_exists(cfg, "identify_ggov1d_history.csv"));
        CHECK(file_exists(cfg, "identify_ggov1d_best.csv"));
        CHECK(file_exists(cfg, "identify_ggov1d_comparison.csv"));
        auto hist = read_csv((fs::path(cfg.out_dir) / "identify_ggov1d_history.csv").string());
        REQUIRE(hist.header.size() == 4);
        CHECK(hist.header[0] == "iteration");
        CHECK(hist.header[1] == "gov.ggov1d.k");
        CHECK(hist.header[2] == "objective");
        CHECK(hist.header[3] == "best");
        CHECK(hist.rows.size() == 30);

        // the scored optimum agrees with an independent comparison run
        RunConfig verify = cfg;
        verify.system.ggov1d.k = k_hat;
        verify.compare_kinds = {GovernorKind::ggov1d};
        auto rows = cmd_compare(verify, log);
        REQUIRE(rows.size() == 1);
        CHECK(rows.front().objective == doctest::Approx(res.objective).epsilon(1e-9));
    }

    TEST_CASE("identify scores the single admissible point when fully pinned") {
        auto cfg = fast_config("genset_cmd_id_pinned");
        cfg.data_path = synthesize_dataset(cfg, "dataset.csv");
        cfg.data_kind = "derived";
        cfg.free_groups = {"gov.ggov1d.k"};
        cfg.bounds["gov.ggov1d.k"] = {90.42, 90.42}; // point box: nothing to move
        std::ostringstream log;
        auto res = cmd_identify(cfg, log);
        REQUIRE(res.history.size() == 1);
        CHECK(res.best.at("gov.ggov1d.k").frozen);
        CHECK(res.objective < 1e-9); // dataset came from exactly this system
    }

    TEST_CASE("fuel curve command fits the measured line") {
        auto cfg = fast_config("genset_cmd_fuel");
        CsvTable table;
        table.header = {"p_kw", "fuel_lph"};
        for (double kw : {0.0, 80.0, 160.0, 240.0, 320.0}) {
            const double p_pu = kw * 1e3 / cfg.system.base.s_base;
            table.rows.push_back({kw, (0.12 + p_pu / 0.362) * cfg.system.base.fuel_base});
        }
        cfg.data_path = (fs::path(cfg.out_dir) / "fuel.csv").string();
        write_csv(cfg.data_path, table);

        std::ostringstream log;
        auto fit = cmd_fit_fuel_curve(cfg, log);
        CHECK(fit.k_turb == doctest::Approx(0.362).epsilon(1e-12));
        CHECK(fit.w_fnl == doctest::Approx(0.12).epsilon(1e-12));
        CHECK(fit.rms_residual < 1e-12);
        CHECK(file_exists(cfg, "fuel_fit.csv"));
        auto out = read_csv((fs::path(cfg.out_dir) / "fuel_fit.csv").string());
        REQUIRE(out.header.size() == 5);
        CHECK(out.rows.size() == 5);
        const auto res_col = out.column("residual_pu");
        for (double r : res_col) CHECK(std::abs(r) < 1e-12);
    }

    TEST_CASE("analyze reports a stable pre-step operating point") {
        auto cfg = fast_config("genset_cmd_analyze");
        std::ostringstream log;
        auto res = cmd_analyze(cfg, log);
        CHECK(res.residual < 1e-8);
        CHECK(res.stable);
        REQUIRE_FALSE(res.eigenvalues.empty());
        for (std::size_t i = 1; i < res.eigenvalues.size(); ++i)
            CHECK(res.eigenvalues[i].real() <= res.eigenvalues[i - 1].real() + 1e-12);
        CHECK(res.eigenvalues.front().real() < 1e-6);
        CHECK(file_exists(cfg, "analyze_ggov1d_eigenvalues.csv"));

        // every governor model linearizes to a stable loop at this point
        for (auto kind : {GovernorKind::simple, GovernorKind::degov, GovernorKind::ggov1}) {
            auto c2 = fast_config("genset_cmd_analyze_" + to_string(kind));
            c2.system.kind = kind;
            auto r2 = cmd_analyze(c2, log);
            CHECK(r2.stable);
        }
    }

    TEST_CASE("identify and compare refuse to run without a dataset") {
        auto cfg = fast_config("genset_cmd_nodata");
        std::ostringstream log;
        CHECK_THROWS_AS(cmd_compare(cfg, log), ValidationError);
        CHECK_THROWS_AS(cmd_identify(cfg, log), ValidationError);
    }
}
