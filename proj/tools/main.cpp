// linvol command-line entry point.

#include "CLI11.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
    using namespace linvol::cli;
    CLI::App app{"linvol: linear involutions, Rauzy-Veech induction and Roth-type diagnostics"};
    app.require_subcommand(1);

    std::map<std::string, std::string> flags;
    std::string config_file;
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--perm", flags["perm"], "permutation: JSON, a JSON file, or \"a b / b a\"");
        sub->add_option("--steps", flags["steps"], "K: induction steps or blocks");
        sub->add_option("--samples", flags["samples"], "N: samples, or orbit length for solve");
        sub->add_option("--epsilon", flags["epsilon"], "exponent of condition (a) and (c)");
        sub->add_option("--ceps", flags["ceps"], "constant C_eps");
        sub->add_option("--theta", flags["theta"], "spectral gap threshold");
        sub->add_option("--tol", flags["tol"], "solver convergence tolerance");
        sub->add_option("--seed", flags["seed"], "random seed");
        sub->add_option("--out", flags["out"], "output directory");
        sub->add_option("--format", flags["format"], "stdout format: json or csv");
        sub->add_option("--threads", flags["threads"], "worker threads for measure");
        sub->add_option("--qext-depth", flags["qext_depth"], "measure: path length of the Q_ext check");
        sub->add_option("--config", config_file, "JSON config file; flags override it");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"code", "InvalidInput"}, {"message", e.what()}, {"context", ""}}.dump() << "\n";
        return 1;
    }
    try {
        Config c;
        if (!config_file.empty()) c = from_json(json::parse(read_file(config_file)));
        json overrides = json::object();
        for (const auto& [k, v] : flags)
            if (!v.empty()) overrides[k] = v;
        c = from_json(overrides, c);
        c.command = app.get_subcommands().front()->get_name();
        return run(c).exit_code;
    } catch (const linvol::Error& e) {
        std::cerr << error_record(e).dump() << "\n";
    } catch (const std::exception& e) {
        std::cerr << json{{"code", "InvalidInput"}, {"message", e.what()}, {"context", config_file}}.dump() << "\n";
    }
    return 1;
}
