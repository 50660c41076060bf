#include "forge/popcount.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "forge/cgp.hpp"
#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/parallel.hpp"
#include "forge/random.hpp"

namespace forge {

std::size_t popcount_width(std::size_t n) {
  std::size_t w = 0;
  while ((std::size_t{1} << w) <= n) ++w;
  return w;
}

namespace {

std::vector<Signal> ripple_add(NetlistBuilder& b, const std::vector<Signal>& x,
                               const std::vector<Signal>& y, Signal carry_in, std::size_t width) {
  std::vector<Signal> out;
  std::optional<Signal> carry = carry_in;
  for (std::size_t i = 0; i < width; ++i) {
    std::vector<Signal> ops;
    if (i < x.size()) ops.push_back(x[i]);
    if (i < y.size()) ops.push_back(y[i]);
    if (carry) ops.push_back(*carry);
    carry.reset();
    const bool need_carry = i + 1 < width;
    if (ops.empty()) {
      out.push_back(b.constant(false));
    } else if (ops.size() == 1) {
      out.push_back(ops[0]);
    } else if (ops.size() == 2) {
      out.push_back(b.make_xor(ops[0], ops[1]));
      if (need_carry) carry = b.make_and(ops[0], ops[1]);
    } else {
      const Signal t = b.make_xor(ops[0], ops[1]);
      out.push_back(b.make_xor(t, ops[2]));
      if (need_carry) carry = b.make_or(b.make_and(ops[0], ops[1]), b.make_and(t, ops[2]));
    }
  }
  return out;
}

std::vector<Signal> popcount_tree(NetlistBuilder& b, std::span<const Signal> bits) {
  const std::size_t n = bits.size();
  if (n == 0) return {};
  if (n == 1) return {bits[0]};
  const std::size_t left = (n - 1) / 2;
  const std::size_t right = n - 1 - left;
  const auto x = popcount_tree(b, bits.subspan(0, left));
  const auto y = popcount_tree(b, bits.subspan(left, right));
  return ripple_add(b, x, y, bits[n - 1], popcount_width(n));
}

}  // namespace

Netlist build_exact_pc(std::size_t n) {
  NetlistBuilder b(n);
  std::vector<Signal> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = b.input(i);
  return b.build(fmt::format("pc{}_exact", n), popcount_tree(b, bits));
}

Netlist build_truncated_pc(std::size_t n, std::size_t cut_bits) {
  const std::size_t width = popcount_width(n);
  if (cut_bits >= std::max<std::size_t>(width, 1) && cut_bits != 0) {
    throw ValidationError(fmt::format("cut_bits={} out of range for PC({}) with {} outputs", cut_bits, n, width));
  }
  NetlistBuilder b(n);
  std::vector<Signal> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = b.input(i);
  auto outs = popcount_tree(b, bits);
  for (std::size_t i = 0; i < cut_bits; ++i) outs[i] = b.constant(false);
  return b.build(cut_bits == 0 ? fmt::format("pc{}_exact", n) : fmt::format("pc{}_trunc{}", n, cut_bits),
                 std::move(outs));
}

std::string_view to_string(ErrorMetric m) { return m == ErrorMetric::Mae ? "MAE" : "WCAE"; }

ErrorMetric error_metric_from_string(std::string_view s) {
  if (s == "MAE") return ErrorMetric::Mae;
  if (s == "WCAE") return ErrorMetric::Wcae;
  throw ValidationError(fmt::format("unknown error metric '{}'", s));
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Exact: return "EXACT";
    case Provenance::Truncated: return "TRUNCATED";
    case Provenance::Evolved: return "EVOLVED";
  }
  return "?";
}

namespace {
Provenance provenance_from_string(std::string_view s) {
  if (s == "EXACT") return Provenance::Exact;
  if (s == "TRUNCATED") return Provenance::Truncated;
  if (s == "EVOLVED") return Provenance::Evolved;
  throw ValidationError(fmt::format("unknown provenance '{}'", s));
}
}  // namespace

nlohmann::json to_json(const PcLibraryEntry& e) {
  nlohmann::json c = nullptr;
  if (e.constraint) c = {{"metric", to_string(e.constraint->metric)}, {"tau", e.constraint->tau}};
  return {{"id", e.id},
          {"input_count", e.input_count},
          {"area", e.area},
          {"mae", e.mae},
          {"wcae", e.wcae},
          {"constraint", c},
          {"provenance", to_string(e.provenance)},
          {"rng_seed", e.rng_seed},
          {"iterations", e.iterations},
          {"pareto", e.pareto},
          {"netlist", to_json(e.netlist)}};
}

PcLibraryEntry pc_entry_from_json(const nlohmann::json& j) {
  try {
    PcLibraryEntry e;
    e.id = j.at("id").get<std::string>();
    e.input_count = j.at("input_count").get<std::size_t>();
    e.area = j.at("area").get<double>();
    e.mae = j.at("mae").get<double>();
    e.wcae = j.at("wcae").get<std::uint64_t>();
    if (!j.at("constraint").is_null()) {
      e.constraint = ErrorConstraint{error_metric_from_string(j["constraint"].at("metric").get<std::string>()),
                                     j["constraint"].at("tau").get<double>()};
    }
    e.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    e.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    e.iterations = j.at("iterations").get<std::uint64_t>();
    e.pareto = j.at("pareto").get<bool>();
    e.netlist = netlist_from_json(j.at("netlist"));
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(fmt::format("malformed PC library entry: {}", ex.what()));
  }
}

void CgpSearchConfig::validate() const {
  if (lambda == 0) throw ValidationError("lambda must be >= 1");
  if (gene_mutations == 0) throw ValidationError("gene_mutations must be >= 1");
  if (max_iterations == 0 && time_limit.count() <= 0.0) {
    throw ValidationError("CGP search needs an iteration or time budget");
  }
  if (tau < 0.0) throw ValidationError("tau must be non-negative");
}

PcLibraryEntry cgp_search(const Netlist& seed, const CgpSearchConfig& config, std::uint64_t rng_seed,
                          const CgpProgress& on_accept) {
  config.validate();
  const std::size_t n = seed.input_count();
  const Netlist reference = build_exact_pc(n);
  if (seed.output_count() != reference.output_count()) {
    throw ValidationError(fmt::format("seed '{}' has {} outputs, PC({}) needs {}", seed.name(),
                                      seed.output_count(), n, reference.output_count()));
  }
  Evaluator evaluator = config.evaluator;
  if (evaluator == Evaluator::Auto) {
    evaluator = n <= config.exhaustive_limit ? Evaluator::Exhaustive : Evaluator::Bdd;
  }
  std::optional<ExhaustiveErrorEvaluator> exhaustive;
  if (evaluator == Evaluator::Exhaustive) exhaustive.emplace(reference, config.exhaustive_limit);

  auto measure = [&](const Netlist& net) {
    return exhaustive ? exhaustive->evaluate(net) : eval_bdd(net, reference, config.bdd_node_budget);
  };
  auto error_of = [&](const ArithmeticErrorReport& r) {
    return config.error_metric == ErrorMetric::Mae ? r.mae : static_cast<double>(r.wcae);
  };
  constexpr double kInfeasible = std::numeric_limits<double>::infinity();

  const std::size_t columns = config.columns ? config.columns : default_cgp_columns(seed);
  CgpGenotype parent = encode(seed, columns, columns);
  Netlist parent_net = decode(parent);
  if (error_of(measure(parent_net)) > config.tau) {
    throw ValidationError(fmt::format("seed '{}' violates the error constraint tau={}", seed.name(), config.tau));
  }
  double parent_area = area(parent_net, config.area_table);

  Rng rng(rng_seed);
  const auto start = std::chrono::steady_clock::now();
  std::vector<CgpGenotype> children(config.lambda);
  std::vector<Netlist> nets(config.lambda);
  std::vector<double> fitness(config.lambda);
  std::uint64_t iteration = 0;
  while (config.max_iterations == 0 || iteration < config.max_iterations) {
    if (config.time_limit.count() > 0.0 && (iteration % 64) == 0 &&
        std::chrono::steady_clock::now() - start >= config.time_limit) {
      break;
    }
    ++iteration;
    for (std::size_t k = 0; k < config.lambda; ++k) children[k] = mutate(parent, config.gene_mutations, rng);
    auto score = [&](std::size_t k) {
      nets[k] = decode(children[k]);
      if (nets[k] == parent_net) {
        fitness[k] = parent_area;  // only inactive genes changed
        return;
      }
      const double a = area(nets[k], config.area_table);
      if (a > parent_area) {
        fitness[k] = kInfeasible;  // cannot replace the parent anyway
        return;
      }
      try {
        fitness[k] = error_of(measure(nets[k])) <= config.tau ? a : kInfeasible;
      } catch (const ResourceError&) {
        fitness[k] = kInfeasible;
      }
    };
    if (config.parallel_offspring) {
      parallel_for(config.lambda, score);
    } else {
      for (std::size_t k = 0; k < config.lambda; ++k) score(k);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < config.lambda; ++k) {
      if (fitness[k] < fitness[best]) best = k;
    }
    if (fitness[best] <= parent_area) {
      parent = std::move(children[best]);
      parent_net = std::move(nets[best]);
      parent_area = fitness[best];
      if (on_accept) on_accept(iteration, parent_area);
    }
  }

  PcLibraryEntry entry;
  entry.netlist = parent_net.compacted();
  entry.input_count = n;
  entry.area = area(entry.netlist, config.area_table);
  const ArithmeticErrorReport verified =
      eval_arithmetic(entry.netlist, reference, evaluator, config.exhaustive_limit, config.bdd_node_budget);
  if (error_of(verified) > config.tau) {
    throw ValidationError(fmt::format("CGP result re-verification failed: error {} > tau {}",
                                      error_of(verified), config.tau));
  }
  entry.mae = verified.mae;
  entry.wcae = verified.wcae;
  entry.constraint = ErrorConstraint{config.error_metric, config.tau};
  entry.provenance = Provenance::Evolved;
  entry.rng_seed = rng_seed;
  entry.iterations = iteration;
  return entry;
}

TauSchedule tau_schedule(std::size_t n, std::size_t points) {
  if (points < 2) throw ValidationError("tau schedule needs at least 2 points");
  std::size_t m = 0;
  while ((std::size_t{1} << m) < n) ++m;
  const double hi = 0.5 * std::ldexp(1.0, static_cast<int>(m));
  auto geometric = [&](double lo) {
    std::vector<double> v(points);
    for (std::size_t i = 0; i < points; ++i) {
      v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
    }
    v.front() = lo;
    v.back() = hi;
    return v;
  };
  return {geometric(0.1), geometric(1.0)};
}

// ---------------------------------------------------------------------------

const std::vector<PcLibraryEntry>& PcLibrary::entries(std::size_t n) const {
  auto it = by_size.find(n);
  if (it == by_size.end()) throw ValidationError(fmt::format("PC library has no entries for size {}", n));
  return it->second;
}

const PcLibraryEntry& PcLibrary::exact(std::size_t n) const {
  for (const auto& e : entries(n)) {
    if (e.provenance == Provenance::Exact) return e;
  }
  throw ValidationError(fmt::format("PC library has no exact entry for size {}", n));
}

const PcLibraryEntry* PcLibrary::find(const std::string& id) const {
  for (const auto& [n, list] : by_size) {
    for (const auto& e : list) {
      if (e.id == id) return &e;
    }
  }
  return nullptr;
}

std::size_t PcLibrary::total_entries() const {
  std::size_t total = 0;
  for (const auto& [n, list] : by_size) total += list.size();
  return total;
}

void annotate_pareto(std::vector<PcLibraryEntry>& entries) {
  for (auto& e : entries) {
    e.pareto = std::none_of(entries.begin(), entries.end(), [&](const PcLibraryEntry& o) {
      return o.area <= e.area && o.mae <= e.mae && (o.area < e.area || o.mae < e.mae);
    });
  }
}

PcLibrary build_pc_library(const std::vector<std::size_t>& sizes, std::size_t tau_points,
                           const CgpSearchConfig& config_template, std::uint64_t rng_seed) {
  if (sizes.empty()) throw ValidationError("PC library needs at least one size");
  config_template.validate();
  const std::set<std::size_t> unique(sizes.begin(), sizes.end());

  struct Job {
    std::size_t size;
    std::size_t slot;
    ErrorMetric metric;
    double tau;
    std::string id;
    std::uint64_t seed;
  };
  PcLibrary lib;
  std::vector<Job> jobs;
  for (std::size_t n : unique) {
    if (n == 0) continue;
    auto& list = lib.by_size[n];
    PcLibraryEntry exact;
    exact.netlist = build_exact_pc(n);
    exact.id = fmt::format("pc{}_exact", n);
    exact.input_count = n;
    exact.area = area(exact.netlist, config_template.area_table);
    exact.provenance = Provenance::Exact;
    list.push_back(exact);
    for (std::size_t cut = 1; cut < popcount_width(n); ++cut) {
      PcLibraryEntry t;
      t.netlist = build_truncated_pc(n, cut);
      t.id = fmt::format("pc{}_trunc{}", n, cut);
      t.input_count = n;
      t.area = area(t.netlist, config_template.area_table);
      const auto err = eval_arithmetic(t.netlist, exact.netlist, config_template.evaluator,
                                       config_template.exhaustive_limit, config_template.bdd_node_budget);
      t.mae = err.mae;
      t.wcae = err.wcae;
      t.provenance = Provenance::Truncated;
      list.push_back(std::move(t));
    }
    const TauSchedule taus = tau_schedule(n, tau_points);
    const std::string stage = fmt::format("pc-lib/{}", n);
    for (std::size_t i = 0; i < taus.mae.size(); ++i) {
      jobs.push_back({n, list.size() + i, ErrorMetric::Mae, taus.mae[i], fmt::format("pc{}_mae{}", n, i),
                      derive_seed(rng_seed, stage, i)});
    }
    for (std::size_t i = 0; i < taus.wcae.size(); ++i) {
      jobs.push_back({n, list.size() + taus.mae.size() + i, ErrorMetric::Wcae, taus.wcae[i],
                      fmt::format("pc{}_wcae{}", n, i), derive_seed(rng_seed, stage, taus.mae.size() + i)});
    }
    list.resize(list.size() + taus.mae.size() + taus.wcae.size());
  }

  parallel_for(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    CgpSearchConfig cfg = config_template;
    cfg.error_metric = job.metric;
    cfg.tau = job.tau;
    cfg.parallel_offspring = false;
    PcLibraryEntry e = cgp_search(build_exact_pc(job.size), cfg, job.seed);
    e.id = job.id;
    e.netlist = e.netlist.renamed(job.id);
    lib.by_size.at(job.size)[job.slot] = std::move(e);
  });
  for (auto& [n, list] : lib.by_size) annotate_pareto(list);
  return lib;
}

// ---------------------------------------------------------------------------

void save_pc_library(const PcLibrary& lib, const std::filesystem::path& dir, const std::string& key) {
  nlohmann::json index = {{"format", "pc-library"}, {"version", 1}, {"key", key}};
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& [n, list] : lib.by_size) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : list) entries.push_back(to_json(e));
    const std::string file = fmt::format("pc_{}.json", n);
    const std::string text = write_json_file(dir / file, {{"size", n}, {"entries", std::move(entries)}});
    sizes.push_back({{"size", n}, {"file", file}, {"checksum", checksum_hex(text)}, {"entries", list.size()}});
  }
  index["sizes"] = std::move(sizes);
  write_json_file(dir / "index.json", index);
}

PcLibrary load_pc_library(const std::filesystem::path& dir) {
  const nlohmann::json index = read_json_file(dir / "index.json");
  if (index.value("format", "") != "pc-library") {
    throw IoError(fmt::format("'{}' is not a PC library index", (dir / "index.json").string()));
  }
  PcLibrary lib;
  for (const auto& s : index.at("sizes")) {
    const std::string file = s.at("file").get<std::string>();
    const std::string text = read_text_file(dir / file);
    if (checksum_hex(text) != s.at("checksum").get<std::string>()) {
      throw IoError(fmt::format("checksum mismatch for '{}'", (dir / file).string()));
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(fmt::format("'{}' is not valid JSON: {}", file, e.what()));
    }
    auto& list = lib.by_size[s.at("size").get<std::size_t>()];
    for (const auto& e : j.at("entries")) list.push_back(pc_entry_from_json(e));
  }
  return lib;
}

std::string pc_library_key(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::exists(dir / "index.json", ec)) return {};
  try {
    return read_json_file(dir / "index.json").value("key", "");
  } catch (const Error&) {
    return {};
  }
}

void verify_pc_library(const PcLibrary& lib, std::size_t exhaustive_limit) {
  for (const auto& [n, list] : lib.by_size) {
    const Netlist reference = build_exact_pc(n);
    for (const auto& e : list) {
      if (e.netlist.input_count() != n) {
        throw ValidationError(fmt::format("{}: netlist has {} inputs, expected {}", e.id, e.netlist.input_count(), n));
      }
      const auto err = eval_arithmetic(e.netlist, reference, Evaluator::Auto, exhaustive_limit);
      if (err.mae != e.mae || err.wcae != e.wcae) {
        throw ValidationError(fmt::format("{}: stored error (mae {}, wcae {}) != measured (mae {}, wcae {})",
                                          e.id, e.mae, e.wcae, err.mae, err.wcae));
      }
      if (e.constraint) {
        const double v = e.constraint->metric == ErrorMetric::Mae ? err.mae : static_cast<double>(err.wcae);
        if (v > e.constraint->tau) {
          throw ValidationError(fmt::format("{}: error {} exceeds tau {}", e.id, v, e.constraint->tau));
        }
      }
      if (e.provenance == Provenance::Exact && (err.mae != 0.0 || err.wcae != 0)) {
        throw ValidationError(fmt::format("{}: exact entry has nonzero error", e.id));
      }
    }
  }
}

}  // namespace forge
