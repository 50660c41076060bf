#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "forge/integrator.hpp"
#include "forge/pcc.hpp"
#include "forge/popcount.hpp"
#include "forge/tnn.hpp"

namespace forge {

struct PipelineConfig {
  std::filesystem::path dataset_path;
  IngestOptions ingest;  // rng_seed is derived from `seed` unless split_seed is set
  std::optional<std::uint64_t> split_seed;
  std::filesystem::path model_path;
  ValidationMode validation = ValidationMode::Strict;

  std::size_t tau_points = 5;
  CgpSearchConfig cgp;
  PccEvalConfig pcc;
  Nsga2Config nsga2;
  AreaTable area_table = AreaTable::defaults();

  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  unsigned threads = 0;
};

/// Parses the JSON config; relative paths resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct SummaryPoint {
  int front_index = -1;  // -1: the exact baseline itself
  double synthesized_area = 0.0;
  double accuracy = 0.0;
  double reduction = 0.0;  // 1 - area / exact area
};

struct PipelineSummary {
  double exact_area = 0.0;
  double exact_accuracy = 0.0;
  SummaryPoint iso_accuracy;
  SummaryPoint within_drop;
  double max_drop = 0.05;
};

/// Cheapest (by synthesized area) front entry whose test accuracy is at least
/// the exact model's, and the cheapest within `max_drop` of it. The exact
/// baseline is always admissible.
PipelineSummary report_summary(const std::vector<FrontEntry>& front, const FrontEntry& exact, double max_drop = 0.05);
nlohmann::json to_json(const PipelineSummary& s);

using PipelineLog = std::function<void(const std::string&)>;

/// Phase 1, 2, 3 with checkpointed libraries under out_dir. Writes
/// report.json and summary.json and returns the report.
nlohmann::json run_pipeline(const PipelineConfig& config, const PipelineLog& log = {});

/// Popcount widths and PCC shapes a model needs, zero widths excluded.
std::vector<std::size_t> required_pc_sizes(const TnnModel& model);
std::vector<PccKey> required_pcc_pairs(const TnnModel& model);

}  // namespace forge
