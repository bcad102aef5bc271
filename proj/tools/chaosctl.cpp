// chaosctl: command-line front end for the chaos-control library.

#include <chaosctl/config.hpp>
#include <chaosctl/run.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Target-oriented control of chaotic discrete maps"};
    app.require_subcommand(0, 1);   // the config file may name the command

    std::string config_path;
    std::vector<std::string> overrides;
    std::string seed;
    std::string out;
    bool strict = false;

    app.add_option("--config", config_path, "Configuration file (key = value lines)");
    app.add_option("--set", overrides, "Override a configuration key (key=value); repeatable")->take_all();
    app.add_option("--seed", seed, "Master RNG seed (u64)");
    app.add_option("--out", out, "Output path prefix");
    app.add_flag("--strict", strict, "Treat domain violations as fatal");
    app.fallthrough();

    for (const char* name : {"simulate", "equilibrium", "stability", "bifurcate", "bubbles", "lyapunov", "cost"})
        app.add_subcommand(name, std::string("run the ") + name + " command");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (app.get_subcommands().empty() && config_path.empty()) {
        std::cerr << "error: give a command or a --config file with a command key\n";
        return 2;
    }
    std::vector<std::string> all = overrides;
    if (!app.get_subcommands().empty()) all.push_back("command=" + app.get_subcommands().front()->get_name());
    if (!seed.empty()) all.push_back("seed=" + seed);
    if (!out.empty()) all.push_back("out=" + out);
    if (strict) all.push_back("strict=true");

    chaosctl::RunConfig cfg;
    try {
        if (config_path.empty()) {
            std::istringstream empty;
            cfg = chaosctl::read_config(empty, all);
        } else {
            cfg = chaosctl::load_config(config_path, all);
        }
    } catch (const chaosctl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return chaosctl::run(cfg, std::cerr);
}
