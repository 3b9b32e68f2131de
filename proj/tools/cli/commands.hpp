#ifndef WSMA_TOOLS_COMMANDS_HPP
#define WSMA_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "wsma/config.hpp"

namespace wsma::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitInternalError = 3,
};

/// Writes one multimodal mask per image of io.ground_truth into io.output,
/// plus manifest.json. split writes three PGMs per image instead of one PPM.
void cmd_annotate(const RunConfig& cfg, bool split);

/// Runs the testing phase over every heatmap listed in io.manifest and writes
/// the detections JSON to io.detections.
void cmd_detect(const RunConfig& cfg);

/// Scores io.detections against io.ground_truth; writes the report JSON to
/// io.output and a text table next to it (.txt). Returns the table.
std::string cmd_eval(const RunConfig& cfg);

/// Generates synth.images scenes into io.output: gt.json, manifest.json and
/// one heatmap PPM per scene.
void cmd_synth(const RunConfig& cfg);

struct BenchOptions {
  std::string mask_path;  // empty: generate a synthetic scene
  int width = 2666;
  int height = 2000;
  int blobs = 150;
};

/// Times run-data-based following against border following on one mask.
nlohmann::ordered_json cmd_bench(const RunConfig& cfg, const BenchOptions& opts);

/// Per-scene seed used by cmd_synth.
std::uint64_t scene_seed(std::uint64_t base, std::uint64_t index);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace wsma::cli

#endif  // WSMA_TOOLS_COMMANDS_HPP
