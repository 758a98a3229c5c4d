#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "app/run_config.hpp"

namespace vidial {

// Writes the synthetic corpus described by cfg.synth (seeded by cfg.seed).
void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir);

// target is "forward", "backward" or "disc". Writes the checkpoint to `out`
// and the per-step loss curve to `out` + ".loss".
void cmd_train(const RunConfig& cfg, std::string_view target, const std::filesystem::path& out);

// Responses for every item of the evaluation episodes.
void cmd_generate(const RunConfig& cfg, const std::filesystem::path& out);

// Metrics report for a responses file.
void cmd_eval(const RunConfig& cfg, const std::filesystem::path& responses, const std::filesystem::path& out);

std::filesystem::path loss_curve_path(const std::filesystem::path& checkpoint);

}  // namespace vidial
