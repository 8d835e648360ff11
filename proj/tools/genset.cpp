#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "genset/commands.hpp"
#include "genset/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"stand-alone diesel generator simulation and parameter identification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string governor;
    std::string out_dir;
    std::int64_t seed = -1;

    for (auto* sub :
         {app.add_subcommand("simulate",
                             "run the load-step scenario and export derived channels"),
          app.add_subcommand("identify", "fit free parameters to a measured dataset"),
          app.add_subcommand("compare", "score governor kinds against a dataset"),
          app.add_subcommand("fit-fuel-curve",
                             "least-squares engine fuel line from (power, fuel) points"),
          app.add_subcommand("analyze", "equilibrium and small-signal modes")}) {
        sub->add_option("--config", config_path,
                        "configuration file (default: $GENSET_CONFIG)");
        sub->add_option("--governor", governor, "simple|degov|ggov1|ggov1d");
        sub->add_option("--seed", seed, "optimizer seed override");
        sub->add_option("--out", out_dir, "output directory override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (config_path.empty())
            if (const char* env = std::getenv("GENSET_CONFIG")) config_path = env;
        if (config_path.empty())
            throw genset::ValidationError(
                "no configuration: pass --config or set GENSET_CONFIG");

        genset::ConfigFile file = genset::ConfigFile::parse_file(config_path);
        if (!governor.empty()) {
            file.set("governor", "kind", governor);
            file.set("governor", "compare", governor);
        }
        if (seed >= 0) file.set("optimizer", "seed", std::to_string(seed));
        if (!out_dir.empty()) file.set("output", "dir", out_dir);
        const genset::RunConfig cfg = genset::load_run_config(file);

        if (app.got_subcommand("simulate")) genset::cmd_simulate(cfg, std::cout);
        else if (app.got_subcommand("identify")) genset::cmd_identify(cfg, std::cout);
        else if (app.got_subcommand("compare")) genset::cmd_compare(cfg, std::cout);
        else if (app.got_subcommand("fit-fuel-curve")) genset::cmd_fit_fuel_curve(cfg, std::cout);
        else genset::cmd_analyze(cfg, std::cout);
        return 0;
    } catch (const genset::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
