#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/area.hpp"
#include "forge/pcc.hpp"
#include "forge/popcount.hpp"
#include "forge/random.hpp"
#include "forge/tnn.hpp"

namespace forge {

struct SlotOption {
  std::string id;
  double area = 0.0;
  double error = 0.0;  // mde for PCCs, mae for PCs
  std::shared_ptr<const PccCircuit> pcc;  // hidden slots
  std::shared_ptr<const Netlist> pc;      // output slots
};

struct Slot {
  bool hidden = true;
  std::size_t neuron = 0;
  std::vector<SlotOption> options;  // options[0] is the exact component
};

/// The per-neuron menus the search chooses from. Hidden slots list the PCC
/// library entries for their (n_pos, n_neg) and score them by synthesized
/// area; output slots list the exact PC followed by the Pareto PC entries.
struct IntegrationProblem {
  TnnModel model;
  std::vector<Slot> slots;  // hidden neurons first, then classes

  /// Product of the option counts.
  double search_space_size() const;
};

IntegrationProblem make_problem(const TnnModel& model, const PcLibrary& pc_library, const PccLibrary& pcc_library,
                                const AreaTable& table = AreaTable::defaults());

using Chromosome = std::vector<std::uint32_t>;

void validate_chromosome(const IntegrationProblem& problem, const Chromosome& c);
TnnSelection selection_of(const IntegrationProblem& problem, const Chromosome& c);

struct FrontEntry {
  Chromosome genes;
  double area_proxy = 0.0;
  double synthesized_area = 0.0;
  double accuracy_train = 0.0;  // accuracy on the fitness split
  double accuracy_test = 0.0;   // filled for the returned front
  int rank = 0;
  double crowding = 0.0;
};

nlohmann::json to_json(const FrontEntry& e, const IntegrationProblem& problem);

/// Memoized, thread-safe scoring of chromosomes on one dataset split.
class IndividualEvaluator {
 public:
  IndividualEvaluator(const IntegrationProblem& problem, const BinaryDataset& data, Split fitness_split = Split::Train);

  FrontEntry evaluate(const Chromosome& c);
  /// Scores all not-yet-seen chromosomes in parallel.
  void evaluate_all(const std::vector<Chromosome>& batch);
  std::size_t netlist_builds() const;
  double accuracy_on(const Chromosome& c, Split split) const;
  Netlist netlist(const Chromosome& c) const;

 private:
  FrontEntry compute(const Chromosome& c) const;

  const IntegrationProblem& problem_;
  const BinaryDataset& data_;
  BitMatrix features_;
  std::vector<std::size_t> labels_;
  mutable std::mutex mutex_;
  std::map<Chromosome, FrontEntry> memo_;
  std::size_t builds_ = 0;
};

/// Ranks and crowding on (minimize area_proxy, maximize accuracy_train).
/// Returns the fronts as index lists, ascending index order within each.
std::vector<std::vector<std::size_t>> nondominated_sort(std::vector<FrontEntry>& entries);

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng);
Chromosome mutate_chromosome(const Chromosome& c, const IntegrationProblem& problem, double rate, Rng& rng);

struct Nsga2Config {
  std::size_t population = 100;
  std::size_t generations = 200;
  double crossover_rate = 0.9;
  double mutation_rate = 0.0;  // 0 = 1 / chromosome length
  std::uint64_t rng_seed = 0;
  Split fitness_split = Split::Train;

  void validate() const;
};

struct TraceRow {
  std::size_t generation = 0;
  double best_accuracy = 0.0;
  double min_area_proxy = 0.0;
  std::size_t front_size = 0;
  double hypervolume = 0.0;
  std::size_t evaluations = 0;
};

struct Nsga2Result {
  std::vector<FrontEntry> front;  // rank 0, by area_proxy then accuracy
  FrontEntry exact;               // the all-exact individual
  std::vector<TraceRow> trace;    // generation 0 is the initial population
  double search_space_size = 0.0;
  std::size_t evaluations = 0;
};

/// Area of the region dominated by `front` up to (ref_area, accuracy 0).
double hypervolume(const std::vector<FrontEntry>& front, double ref_area);

using GenerationHook = std::function<void(std::size_t, const std::vector<FrontEntry>&)>;

Nsga2Result nsga2_run(const IntegrationProblem& problem, const BinaryDataset& data, const Nsga2Config& config,
                      const GenerationHook& on_generation = {});

/// front.json, trace.csv and verilog/<index>.v under `dir`.
void save_front(const Nsga2Result& result, const IntegrationProblem& problem, IndividualEvaluator& evaluator,
                const std::filesystem::path& dir);
nlohmann::json front_json(const Nsga2Result& result, const IntegrationProblem& problem);
std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace forge
