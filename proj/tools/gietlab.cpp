#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "gietlab/lab.hpp"

using namespace gietlab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitSuiteFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalDomain = 3;

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    for (const auto& kv : overrides) apply_override(doc, kv);
    return config_from_json(doc);
}

int run_command(const std::string& experiment, const std::string& config_path,
                const std::vector<std::string>& overrides) {
    const ExperimentConfig cfg = load_config(config_path, overrides);
    const ExperimentOutcome out = run_experiment(experiment, cfg);
    std::cout << (out.pass ? "PASS" : "FAIL") << " -> " << (out.directory / "summary.json").string()
              << "\n";
    for (const auto& chk : out.summary.value("checks", json::array()))
        std::cout << "  [" << (chk["pass"].get<bool>() ? "PASS" : "FAIL") << "] "
                  << chk["id"].get<std::string>() << " " << chk["name"].get<std::string>() << "\n";
    return out.pass ? kExitPass : kExitSuiteFailure;
}

int search_loops_command(const std::vector<int>& permutation, int max_len) {
    const Permutation pi(permutation);
    const auto loops = enumerate_loops(pi, max_len);
    std::cout << "word,length,perron,genus,marked_points,positivity_power,hyperbolic,accepted\n";
    for (const auto& loop : loops) {
        const auto rep = is_admissible_fixed_point(loop);
        std::cout << loop.word() << "," << loop.steps.size() << "," << fmt15(rep.perron_value) << ","
                  << rep.genus << "," << rep.marked_points << "," << rep.positivity_power << ","
                  << rep.hyperbolic << "," << rep.accepted << "\n";
    }
    return kExitPass;
}

int show_command(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open artifact: " + path);
    if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") {
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json doc = json::parse(line);
            std::cout << "level " << n++ << ": x=" << doc.value("x", 0.0)
                      << " heights=" << doc["heights"].dump() << "\n";
        }
        return kExitPass;
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("artifact is not valid JSON: ") + e.what());
    }
    std::cout << doc.dump(2) << "\n";
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gietlab: renormalisation laboratory for generalised interval exchange maps"};
    app.require_subcommand(1);

    std::string experiment, config_path, artifact;
    std::vector<std::string> overrides;
    std::vector<int> permutation{4, 3, 2, 1};
    int max_len = 8;

    auto* run = app.add_subcommand("run", "run one experiment (E1..E8)");
    run->add_option("experiment", experiment, "experiment id: E1..E8")->required();
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--set", overrides, "override config fields as key=value");

    auto* search = app.add_subcommand("search-loops", "enumerate Rauzy loops and report admissibility");
    search->add_option("--permutation", permutation, "1-based bottom images of the top indices");
    search->add_option("--max-len", max_len, "maximum word length");

    auto* show = app.add_subcommand("show", "pretty-print a JSON or JSONL artifact");
    show->add_option("artifact", artifact, "path to the artifact")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(experiment, config_path, overrides);
        if (search->parsed()) return search_loops_command(permutation, max_len);
        if (show->parsed()) return show_command(artifact);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const InvalidInputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ConnectionError& e) {
        std::cerr << "numerical-domain error: " << e.what() << " (step " << e.step_index << ")\n";
        return kExitNumericalDomain;
    } catch (const Error& e) {
        std::cerr << "numerical-domain error: " << e.what() << "\n";
        return kExitNumericalDomain;
    }
    return kExitConfigError;
}
