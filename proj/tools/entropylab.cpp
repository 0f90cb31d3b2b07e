// entropylab - batch experiment runner for entropy and minimal-geodesic
// computations on surfaces of hyperbolic type
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "entropylab/config.hpp"
#include "entropylab/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw entropylab::IoError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy laboratory for geodesic flows on surfaces of hyperbolic type"};
    app.require_subcommand(1);

    struct Args {
        std::string config;
        int threads = -1;
        long long seed = -1;
        std::string out;
    };

    auto add_sub = [&](const char* name, const char* desc, entropylab::ExperimentKind kind) {
        auto* sub = app.add_subcommand(name, desc);
        auto args = std::make_shared<Args>();
        sub->add_option("--config", args->config, "experiment config file")->required();
        sub->add_option("--threads", args->threads, "worker thread cap");
        sub->add_option("--seed", args->seed, "override the config seed");
        sub->add_option("--out", args->out, "override the output directory");
        sub->callback([args, kind]() {
            entropylab::ExperimentConfig cfg = entropylab::parse_config(read_file(args->config));
            cfg.experiment = kind;
            if (args->threads >= 0) {
                cfg.threads = unsigned(args->threads);
            } else if (cfg.threads == 0) {
                if (const char* env = std::getenv("ENTROPYLAB_THREADS"))
                    cfg.threads = unsigned(std::strtoul(env, nullptr, 10));
            }
            if (args->seed >= 0) cfg.seed = std::uint64_t(args->seed);
            if (!args->out.empty()) cfg.out_dir = args->out;

            auto rep = entropylab::run_experiment(cfg);
            for (const auto& c : rep.checks)
                std::printf("%s %s (value %.6g, bound %.6g)\n", c.pass ? "PASS" : "FAIL",
                            c.name.c_str(), c.value, c.bound);
            for (const auto& [k, v] : rep.summary)
                std::printf("  %s = %s\n", k.c_str(), v.c_str());
            std::printf("exit %d\n", rep.exit_code);
            std::exit(rep.exit_code);
        });
    };

    add_sub("volume", "ball-volume growth and the volume entropy fit",
            entropylab::ExperimentKind::Volume);
    add_sub("minimal-entropy", "separated-orbit counts over a minimal-geodesic family",
            entropylab::ExperimentKind::MinimalEntropy);
    add_sub("strip", "strip census around a central minimal geodesic",
            entropylab::ExperimentKind::Strip);
    add_sub("bowen-oracles", "discrete-system oracle suite",
            entropylab::ExperimentKind::BowenOracles);
    add_sub("compare", "full pipeline: volume vs minimal-geodesic entropy",
            entropylab::ExperimentKind::Compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const entropylab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
