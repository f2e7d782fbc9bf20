#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smattn/checkpoint.hpp"
#include "smattn/config.hpp"
#include "smattn/gradcheck.hpp"
#include "smattn/simulate.hpp"
#include "smattn/trainer.hpp"

namespace smattn {

struct CommandContext {
    std::string command;
    RunConfig config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed_override;
    int threads = 1;
    std::vector<std::string> overrides;  // applied --set specs, for the manifest
};

// Each command writes its outputs and a manifest under out_dir and
// returns 0 on success. Failures are reported via exceptions.
int cmd_simulate(CommandContext& ctx);
int cmd_ingest(CommandContext& ctx);
int cmd_train(CommandContext& ctx);
int cmd_evaluate(CommandContext& ctx);
int cmd_ablate(CommandContext& ctx);
int cmd_intensity_export(CommandContext& ctx);
int cmd_bound(CommandContext& ctx);
int cmd_gradcheck(CommandContext& ctx);

int exit_code_for(const std::exception& e);

// ---- shared config resolution (also used by the bindings and tests) ----

std::uint64_t resolve_seed(const CommandContext& ctx);
DriftConfig drift_config_from(const RunConfig& cfg);
ModelConfig model_config_from(const RunConfig& cfg, const Vocabulary& vocab);
TrainSettings train_settings_from(const RunConfig& cfg, std::uint64_t seed);

// Ingestion pipeline: parse -> filter -> normalize -> split.
Dataset ingest_events(const std::vector<Event>& events,
                      const std::optional<std::string>& group_map_csv,
                      std::size_t min_user_events, std::size_t min_item_count,
                      SplitRatios ratios, std::uint64_t seed);

struct GradCheckRun {
    std::string integrator;
    GradCheckReport report;
    bool pass = false;
};

std::vector<GradCheckRun> run_gradcheck(const RunConfig& cfg, std::uint64_t seed);

}  // namespace smattn
