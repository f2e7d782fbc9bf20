#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "smattn/commands.hpp"
#include "smattn/log.hpp"
#include "smattn/version.hpp"

namespace {

using CommandFn = std::function<int(smattn::CommandContext&)>;

struct CommandSpec {
    std::string description;
    CommandFn fn;
    bool config_required = true;
};

const std::map<std::string, CommandSpec> kCommands = {
    {"simulate", {"generate synthetic event streams", smattn::cmd_simulate, true}},
    {"ingest", {"parse events, filter, normalize and split", smattn::cmd_ingest, true}},
    {"train", {"train a model on an ingested dataset", smattn::cmd_train, true}},
    {"evaluate", {"rank held-out targets and report HR/NDCG", smattn::cmd_evaluate, true}},
    {"ablate", {"train origin / +SMLayer / +SMLayer+CTReg arms", smattn::cmd_ablate, true}},
    {"intensity-export",
     {"export a per-head intensity grid as CSV", smattn::cmd_intensity_export, true}},
    {"bound", {"compute the generalization-bound diagnostics", smattn::cmd_bound, true}},
    {"gradcheck",
     {"check tape gradients against finite differences", smattn::cmd_gradcheck, true}},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smattn: self-modulating attention in continuous time"};
    app.set_version_flag("--version", smattn::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::int64_t seed = -1;
    int threads = 1;
    std::string out_dir = "run";

    std::string chosen;
    for (const auto& [name, spec] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, spec.description);
        sub->add_option("--config", config_path, "configuration file");
        sub->add_option("--set", sets, "override: section.key=value")->take_all();
        sub->add_option("--seed", seed, "run seed (overrides [run] seed)");
        sub->add_option("--threads", threads, "worker cap; 1 = fully sequential")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory");
        sub->callback([&chosen, name = name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        smattn::CommandContext ctx;
        ctx.command = chosen;
        ctx.out_dir = out_dir;
        ctx.threads = threads;
        ctx.overrides = sets;
        if (seed >= 0) ctx.seed_override = static_cast<std::uint64_t>(seed);
        if (!config_path.empty()) {
            ctx.config = smattn::RunConfig::from_file(config_path);
        } else if (kCommands.at(chosen).config_required && sets.empty()) {
            smattn::log_error("command %s needs --config (or --set values)",
                              chosen.c_str());
            return 1;
        }
        for (const auto& s : sets) ctx.config.apply_override(s);
        return kCommands.at(chosen).fn(ctx);
    } catch (const std::exception& e) {
        smattn::log_error("%s", e.what());
        return smattn::exit_code_for(e);
    }
}
