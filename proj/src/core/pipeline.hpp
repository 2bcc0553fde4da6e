#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/corpus.hpp"
#include "core/features.hpp"
#include "core/impostors.hpp"
#include "core/pairgen.hpp"
#include "core/protocol.hpp"
#include "core/report.hpp"

namespace authdrift {

struct PipelineConfig {
  std::filesystem::path source;  // config file, for error messages
  std::filesystem::path out_dir;
  std::filesystem::path manifest;
  TokenizerConfig tokenizer;
  std::size_t min_tokens = 200;
  std::vector<std::uint64_t> permutation_seeds;
  PairgenPlan pairgen;  // seed is replaced per permutation
  FeatureConfig features;
  ImpostorParams impostors;
  std::optional<EndpointOptions> external;
  ReportOptions report;
  std::string snapshot;  // resolved config as JSON text
};

// `overrides` is a JSON merge patch applied before validation (may be
// empty). Relative paths resolve against the config file's directory.
// Errors carry "<file>:<line>: <json pointer>: ...".
PipelineConfig ParsePipelineConfig(std::string_view text, const std::filesystem::path& source,
                                   std::string_view overrides = {});
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path, std::string_view overrides = {});

struct StageRecord {
  std::string name;
  bool skipped = false;
};

struct PipelineSummary {
  std::filesystem::path out_dir;
  std::vector<StageRecord> stages;
  std::string report_summary;  // contents of report/summary.txt
};

// Stages: ingest, then pairgen/features/impostors[/external] per
// permutation, then eval over all permutations. A stage is skipped when its
// stamp matches the hash of its configuration and inputs and its outputs are
// unchanged.
PipelineSummary RunPipeline(const PipelineConfig& config);

// Writes a synthetic corpus and a pipeline config using it under `dir`;
// returns the config path.
std::filesystem::path WriteDemo(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace authdrift
