#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "orw/harness.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string out_dir;
};

int dispatch(const std::string& kind, const GlobalOpts& g) {
    nlohmann::json doc;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) {
            std::cerr << "error: cannot open config: " << g.config_path << "\n";
            return 2;
        }
        in >> doc;
    }
    doc["kind"] = kind;
    if (g.seed_set) doc["seed_base"] = g.seed;
    if (g.threads > 0) doc["threads"] = g.threads;
    if (!g.out_dir.empty()) doc["out_dir"] = g.out_dir;
    return orw::run_experiment(orw::ExperimentConfig::from_json(doc));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ordered random walk estimators and oracles"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "experiment config (JSON)");
    app.add_option("--seed", g.seed, "override seed_base")->each([&](const std::string&) {
        g.seed_set = true;
    });
    app.add_option("--threads", g.threads, "worker threads");
    app.add_option("--out", g.out_dir, "output directory");

    struct Sub {
        const char* name;
        const char* kind;
        const char* help;
    };
    const Sub subs[] = {
        {"estimate-h", "estimate-h", "Monte Carlo h estimates over probes and a c grid"},
        {"oracle-check", "oracle-check", "run every estimator against the exact oracles"},
        {"sample-conditioned", "conditioned-sample",
         "sample paths of the walk conditioned on order up to a geometric time"},
        {"tail-exponent", "tail-exponent", "survival-curve power-law fit"},
        {"residual-scan", "residual-scan", "harmonicity residuals of an estimated h table"},
    };
    std::string kind;
    for (const Sub& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->fallthrough();
        sc->callback([&kind, k = s.kind] { kind = k; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        return dispatch(kind, g);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
