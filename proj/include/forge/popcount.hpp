#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/area.hpp"
#include "forge/error_metrics.hpp"
#include "forge/netlist.hpp"

namespace forge {

/// Output width of an n-input popcount: ceil(log2(n + 1)).
std::size_t popcount_width(std::size_t n);

/// Exact popcount as a balanced tree of ripple adders: PC(n) = PC(a) + PC(b)
/// + one spare input bit as carry-in, with a + b + 1 = n. Full adders use
/// 2 XOR + 2 AND + 1 OR, half adders 1 XOR + 1 AND. n = 0 yields a netlist
/// with no inputs and no outputs (the constant 0).
Netlist build_exact_pc(std::size_t n);

/// Exact PC with the `cut_bits` least-significant outputs tied to 0. The cone
/// that only fed the removed outputs disappears.
Netlist build_truncated_pc(std::size_t n, std::size_t cut_bits);

enum class ErrorMetric { Mae, Wcae };
std::string_view to_string(ErrorMetric m);
ErrorMetric error_metric_from_string(std::string_view s);

enum class Provenance { Exact, Truncated, Evolved };
std::string_view to_string(Provenance p);

struct ErrorConstraint {
  ErrorMetric metric = ErrorMetric::Mae;
  double tau = 0.0;
};

struct PcLibraryEntry {
  std::string id;
  Netlist netlist;
  std::size_t input_count = 0;
  double area = 0.0;
  double mae = 0.0;
  std::uint64_t wcae = 0;
  std::optional<ErrorConstraint> constraint;  // evolved entries only
  Provenance provenance = Provenance::Exact;
  std::uint64_t rng_seed = 0;
  std::uint64_t iterations = 0;
  bool pareto = false;  // non-dominated in (area, mae) within its size
};

nlohmann::json to_json(const PcLibraryEntry& e);
PcLibraryEntry pc_entry_from_json(const nlohmann::json& j);

struct CgpSearchConfig {
  std::size_t lambda = 4;
  std::size_t gene_mutations = 5;
  std::uint64_t max_iterations = 100000;     // 0 = unbounded
  std::chrono::duration<double> time_limit{60.0};  // 0 = unbounded
  ErrorMetric error_metric = ErrorMetric::Mae;
  double tau = 0.0;
  Evaluator evaluator = Evaluator::Auto;
  std::size_t exhaustive_limit = kDefaultExhaustiveLimit;
  std::size_t bdd_node_budget = kDefaultBddNodeBudget;
  std::size_t columns = 0;  // 0 = default_cgp_columns(seed)
  AreaTable area_table = AreaTable::defaults();
  bool parallel_offspring = false;

  /// Throws ValidationError on lambda == 0 or when both budgets are unbounded.
  void validate() const;
};

/// Called whenever the parent is replaced (iteration, parent area).
using CgpProgress = std::function<void(std::uint64_t, double)>;

/// (1 + lambda) CGP minimizing area subject to error <= tau. The reference
/// function is the exact popcount of seed.input_count() bits. Offspring that
/// tie the parent replace it. The returned error is re-measured from scratch.
PcLibraryEntry cgp_search(const Netlist& seed, const CgpSearchConfig& config, std::uint64_t rng_seed,
                          const CgpProgress& on_accept = {});

struct TauSchedule {
  std::vector<double> mae;
  std::vector<double> wcae;
};

/// Geometric sequences 0.1 .. 2^(m-1) (MAE) and 1 .. 2^(m-1) (WCAE),
/// m = ceil(log2 n), endpoints inclusive.
TauSchedule tau_schedule(std::size_t n, std::size_t points);

/// Entries for each popcount size.
struct PcLibrary {
  std::map<std::size_t, std::vector<PcLibraryEntry>> by_size;

  const std::vector<PcLibraryEntry>& entries(std::size_t n) const;
  const PcLibraryEntry& exact(std::size_t n) const;
  const PcLibraryEntry* find(const std::string& id) const;
  std::size_t total_entries() const;
};

/// Marks entries that are non-dominated in (area, mae) within their size.
void annotate_pareto(std::vector<PcLibraryEntry>& entries);

/// For every size: the exact PC, every truncation level, and one CGP run per
/// tau of both schedules. Run seeds derive from `rng_seed`.
PcLibrary build_pc_library(const std::vector<std::size_t>& sizes, std::size_t tau_points,
                           const CgpSearchConfig& config_template, std::uint64_t rng_seed);

/// One JSON file per size plus index.json with FNV-1a checksums. `key` is an
/// opaque content key recorded in the index for staleness checks.
void save_pc_library(const PcLibrary& lib, const std::filesystem::path& dir, const std::string& key = {});
PcLibrary load_pc_library(const std::filesystem::path& dir);
/// The key recorded by save_pc_library, or empty if the index is missing.
std::string pc_library_key(const std::filesystem::path& dir);

/// Re-measures every entry; throws ValidationError if a stored metric differs
/// from the recomputed one or an evolved entry violates its constraint.
void verify_pc_library(const PcLibrary& lib, std::size_t exhaustive_limit = kDefaultExhaustiveLimit);

}  // namespace forge
