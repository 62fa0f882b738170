#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace fadrc::cli;
    CLI::App app{"Fractional-order ADRC analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool plots = false;
    const std::map<std::string, std::pair<std::string, std::function<int(const RunConfig&)>>> commands{
        {"mse", {"MSE curves of the observer model error", cmd_mse}},
        {"bode", {"open-loop Bode data and margins", cmd_bode}},
        {"step", {"step responses with gain sweep", cmd_step}},
        {"design", {"PD design by crossover matching", cmd_design}},
        {"stability", {"stability certification report", cmd_stability}},
        {"pmsm", {"PMSM speed-loop step responses", cmd_pmsm}},
    };
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "key=value config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_flag("--plots", plots, "also write gnuplot scripts");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig rc = resolve(ConfigFile::load(config_path));
        rc.out_dir = out_dir;
        rc.emit_plots = plots;
        for (const auto& [name, entry] : commands)
            if (app.got_subcommand(name))
                return entry.second(rc);
    } catch (const std::exception& e) {
        std::cerr << "fadrc: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
