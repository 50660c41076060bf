#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/netlist.hpp"
#include "forge/pcc_circuit.hpp"
#include "forge/simulate.hpp"

namespace forge {

/// Single-hidden-layer ternary network over binary inputs.
struct TnnModel {
  std::string name;
  std::size_t input_count = 0;
  std::size_t hidden_count = 0;
  std::size_t class_count = 0;
  std::vector<std::vector<int>> hidden_weights;  // hidden x inputs
  std::vector<std::vector<int>> output_weights;  // classes x hidden
  std::vector<double> thresholds;                // per input feature
};

/// {format: "tnn-model", version: 1, name, topology: [i, h, c], hidden_weights,
///  output_weights, thresholds}
nlohmann::json to_json(const TnnModel& model);
/// Checks shape only; use validate_model for the semantic checks.
TnnModel model_from_json(const nlohmann::json& j);
TnnModel load_model(const std::filesystem::path& path);
void save_model(const TnnModel& model, const std::filesystem::path& path);

enum class ValidationMode { Strict, Lenient };

struct ModelValidation {
  std::vector<std::size_t> zero_counts;  // per output neuron
  bool equal_zero_count = true;
  /// Score offset per class, 0.5 * (N_c - min N). All zero when N is equal.
  std::vector<double> class_offsets;
  std::vector<std::string> warnings;
};

/// Ternary domain, thresholds in [0, 1], and equal zero counts across output
/// neurons. Unequal counts throw in strict mode and become offsets otherwise.
ModelValidation validate_model(const TnnModel& model, ValidationMode mode = ValidationMode::Strict);

struct HiddenSlot {
  std::vector<std::size_t> pos_features;  // weight +1
  std::vector<std::size_t> neg_features;  // weight -1
  std::size_t n_pos() const { return pos_features.size(); }
  std::size_t n_neg() const { return neg_features.size(); }
};

struct OutputSlot {
  std::vector<std::size_t> hidden;  // nonzero connections, ascending
  std::vector<bool> inverted;       // weight -1 feeds through an inverter
  std::size_t width() const { return hidden.size(); }
};

struct SlotRequirements {
  std::vector<HiddenSlot> hidden;
  std::vector<OutputSlot> output;
  std::size_t size() const { return hidden.size() + output.size(); }
};

SlotRequirements neuron_requirements(const TnnModel& model);

std::vector<std::uint8_t> hidden_activations(const TnnModel& model, std::span<const std::uint8_t> sample);
/// Per class 2 * (matching nonzero output connections) + (N_c - min N).
std::vector<std::int64_t> class_scores(const TnnModel& model, std::span<const std::uint8_t> sample);
/// Lowest index among the maxima.
std::size_t argmax(std::span<const std::int64_t> scores);
std::size_t infer_exact(const TnnModel& model, std::span<const std::uint8_t> sample);

/// Component choice per slot; nullptr selects the exact component.
struct TnnSelection {
  std::vector<const PccCircuit*> hidden;
  std::vector<const Netlist*> output;

  static TnnSelection exact(const TnnModel& model);
};

/// Inputs are the features, outputs the one-hot class vector. Hidden PCCs are
/// wired to their +1/-1 feature subsets, output PCs read hidden bits through
/// wires (+1) or inverters (-1), and a tournament of >= comparators picks the
/// class.
Netlist generate_netlist(const TnnModel& model, const TnnSelection& selection, const std::string& name = "tnn");

// ---------------------------------------------------------------------------

enum class Split { Train, Test };

struct FeatureStats {
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;     // of normalized train values
  double threshold = 0.0;  // V_q actually applied
  double skew = 0.0;       // reported only
  bool constant = false;
};

struct BinaryDataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::vector<std::vector<std::uint8_t>> samples;  // rows x features
  std::vector<std::size_t> labels;
  std::vector<Split> split;
  std::vector<FeatureStats> stats;
  std::vector<std::string> warnings;

  std::size_t feature_count() const { return feature_names.size(); }
  std::vector<std::size_t> rows(Split s) const;
  /// features x samples of the split, in row order.
  BitMatrix feature_matrix(Split s) const;
  std::vector<std::size_t> split_labels(Split s) const;
};

struct IngestOptions {
  std::string label_column;  // empty: last column
  double split_fraction = 0.7;
  std::uint64_t rng_seed = 0;
  /// Replaces the train medians as V_q when present.
  std::optional<std::vector<double>> thresholds;
};

BinaryDataset ingest(const std::filesystem::path& csv_path, const IngestOptions& options);
BinaryDataset ingest_csv_text(const std::string& text, const IngestOptions& options);

double accuracy(const TnnModel& model, const BinaryDataset& data, Split split);
double accuracy(const Netlist& netlist, const BinaryDataset& data, Split split);
/// First asserted one-hot output per lane, or class_count when none is.
std::vector<std::size_t> predict(const Netlist& netlist, const BitMatrix& features);

struct ToyTrainConfig {
  std::size_t hidden = 4;
  std::size_t zero_count = 0;  // zero weights per output neuron
  double hidden_zero_probability = 0.3;
  std::size_t iterations = 3000;
  std::uint64_t rng_seed = 1;
};

/// Random equal-N ternary weights improved by single-weight hill climbing on
/// train accuracy. Test scaffolding, not a training method.
TnnModel train_toy_model(const BinaryDataset& data, const ToyTrainConfig& config, const std::string& name = "toy");

}  // namespace forge
