#include "forge/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/parallel.hpp"
#include "forge/pareto.hpp"

namespace forge {

double IntegrationProblem::search_space_size() const {
  double total = 1.0;
  for (const auto& s : slots) total *= static_cast<double>(s.options.size());
  return total;
}

IntegrationProblem make_problem(const TnnModel& model, const PcLibrary& pc_library, const PccLibrary& pcc_library,
                                const AreaTable& table) {
  IntegrationProblem p;
  p.model = model;
  const SlotRequirements req = neuron_requirements(model);
  for (std::size_t k = 0; k < req.hidden.size(); ++k) {
    const auto& list = pcc_library.entries(req.hidden[k].n_pos(), req.hidden[k].n_neg());
    const std::size_t exact = pcc_library.exact_index(req.hidden[k].n_pos(), req.hidden[k].n_neg());
    Slot slot{true, k, {}};
    auto add = [&](const PccLibraryEntry& e) {
      slot.options.push_back({e.id, e.synthesized_area, e.mde(), std::make_shared<const PccCircuit>(e.pcc), nullptr});
    };
    add(list[exact]);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i != exact) add(list[i]);
    }
    p.slots.push_back(std::move(slot));
  }
  for (std::size_t c = 0; c < req.output.size(); ++c) {
    const std::size_t width = req.output[c].width();
    Slot slot{false, c, {}};
    if (width == 0) {
      slot.options.push_back({"pc0_exact", 0.0, 0.0, nullptr, std::make_shared<const Netlist>(build_exact_pc(0))});
    } else {
      const auto& exact = pc_library.exact(width);
      slot.options.push_back({exact.id, area(exact.netlist, table), 0.0, nullptr,
                              std::make_shared<const Netlist>(exact.netlist)});
      std::vector<const PcLibraryEntry*> rest;
      for (const auto& e : pc_library.entries(width)) {
        if (e.pareto && e.provenance != Provenance::Exact) rest.push_back(&e);
      }
      std::stable_sort(rest.begin(), rest.end(), [](const PcLibraryEntry* a, const PcLibraryEntry* b) {
        return std::pair(a->area, a->mae) < std::pair(b->area, b->mae);
      });
      for (const auto* e : rest) {
        slot.options.push_back({e->id, area(e->netlist, table), e->mae, nullptr, std::make_shared<const Netlist>(e->netlist)});
      }
    }
    p.slots.push_back(std::move(slot));
  }
  return p;
}

void validate_chromosome(const IntegrationProblem& problem, const Chromosome& c) {
  if (c.size() != problem.slots.size()) {
    throw ValidationError(fmt::format("chromosome has {} genes, problem has {} slots", c.size(), problem.slots.size()));
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] >= problem.slots[i].options.size()) {
      throw ValidationError(fmt::format("gene {} = {} out of range (slot has {} options)", i, c[i],
                                        problem.slots[i].options.size()));
    }
  }
}

TnnSelection selection_of(const IntegrationProblem& problem, const Chromosome& c) {
  validate_chromosome(problem, c);
  TnnSelection sel = TnnSelection::exact(problem.model);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Slot& s = problem.slots[i];
    const SlotOption& o = s.options[c[i]];
    if (s.hidden) {
      sel.hidden[s.neuron] = o.pcc.get();
    } else {
      sel.output[s.neuron] = o.pc.get();
    }
  }
  return sel;
}

nlohmann::json to_json(const FrontEntry& e, const IntegrationProblem& problem) {
  nlohmann::json ids = nlohmann::json::array();
  for (std::size_t i = 0; i < e.genes.size(); ++i) ids.push_back(problem.slots[i].options[e.genes[i]].id);
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"genes", e.genes},
          {"components", std::move(ids)},
          {"area_proxy", e.area_proxy},
          {"synthesized_area", e.synthesized_area},
          {"accuracy_train", e.accuracy_train},
          {"accuracy_test", num(e.accuracy_test)},
          {"rank", e.rank},
          {"crowding", num(e.crowding)}};
}

// ---------------------------------------------------------------------------

IndividualEvaluator::IndividualEvaluator(const IntegrationProblem& problem, const BinaryDataset& data, Split fitness_split)
    : problem_(problem), data_(data), features_(data.feature_matrix(fitness_split)), labels_(data.split_labels(fitness_split)) {
  if (data.feature_count() != problem.model.input_count) {
    throw ValidationError(fmt::format("dataset has {} features, model expects {}", data.feature_count(),
                                      problem.model.input_count));
  }
  if (labels_.empty()) throw ValidationError("fitness split is empty");
}

Netlist IndividualEvaluator::netlist(const Chromosome& c) const {
  return generate_netlist(problem_.model, selection_of(problem_, c), "tnn");
}

FrontEntry IndividualEvaluator::compute(const Chromosome& c) const {
  FrontEntry e;
  e.genes = c;
  const Netlist net = netlist(c);
  for (std::size_t i = 0; i < c.size(); ++i) e.area_proxy += problem_.slots[i].options[c[i]].area;
  e.synthesized_area = area(net);
  const auto pred = predict(net, features_);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) correct += pred[i] == labels_[i];
  e.accuracy_train = static_cast<double>(correct) / static_cast<double>(labels_.size());
  e.accuracy_test = std::numeric_limits<double>::quiet_NaN();
  return e;
}

FrontEntry IndividualEvaluator::evaluate(const Chromosome& c) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(c); it != memo_.end()) return it->second;
  }
  FrontEntry e = compute(c);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = memo_.emplace(c, std::move(e));
  if (inserted) ++builds_;
  return it->second;
}

void IndividualEvaluator::evaluate_all(const std::vector<Chromosome>& batch) {
  std::vector<Chromosome> todo;
  {
    std::lock_guard lock(mutex_);
    std::set<Chromosome> seen;
    for (const auto& c : batch) {
      if (!memo_.count(c) && seen.insert(c).second) todo.push_back(c);
    }
  }
  std::vector<FrontEntry> results(todo.size());
  parallel_for(todo.size(), [&](std::size_t i) { results[i] = compute(todo[i]); });
  std::lock_guard lock(mutex_);
  for (auto& r : results) {
    if (memo_.emplace(r.genes, r).second) ++builds_;
  }
}

std::size_t IndividualEvaluator::netlist_builds() const {
  std::lock_guard lock(mutex_);
  return builds_;
}

double IndividualEvaluator::accuracy_on(const Chromosome& c, Split split) const {
  if (data_.rows(split).empty()) return std::numeric_limits<double>::quiet_NaN();
  return accuracy(netlist(c), data_, split);
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> nondominated_sort(std::vector<FrontEntry>& entries) {
  std::vector<Objectives> pts;
  pts.reserve(entries.size());
  for (const auto& e : entries) pts.push_back({e.area_proxy, -e.accuracy_train});
  auto fronts = nondominated_fronts(pts);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    const auto crowd = crowding_distance(pts, fronts[r]);
    for (std::size_t i = 0; i < fronts[r].size(); ++i) {
      entries[fronts[r][i]].rank = static_cast<int>(r);
      entries[fronts[r][i]].crowding = crowd[i];
    }
  }
  return fronts;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, Rng& rng) {
  if (a.size() != b.size()) throw ValidationError("crossover parents differ in length");
  Chromosome x = a, y = b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (uniform_below(rng, 2)) std::swap(x[i], y[i]);
  }
  return {std::move(x), std::move(y)};
}

Chromosome mutate_chromosome(const Chromosome& c, const IntegrationProblem& problem, double rate, Rng& rng) {
  Chromosome out = c;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (bernoulli(rng, rate)) {
      out[i] = static_cast<std::uint32_t>(uniform_below(rng, problem.slots[i].options.size()));
    }
  }
  return out;
}

void Nsga2Config::validate() const {
  if (population < 2 || population % 2) throw ValidationError(fmt::format("population {} must be even and >= 2", population));
  if (generations == 0) throw ValidationError("generations must be >= 1");
  if (crossover_rate < 0.0 || crossover_rate > 1.0) throw ValidationError("crossover_rate outside [0, 1]");
  if (mutation_rate < 0.0 || mutation_rate > 1.0) throw ValidationError("mutation_rate outside [0, 1]");
}

double hypervolume(const std::vector<FrontEntry>& front, double ref_area) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : front) {
    if (e.area_proxy < ref_area && e.accuracy_train > 0.0) pts.emplace_back(e.area_proxy, e.accuracy_train);
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  double hv = 0.0;
  double covered = 0.0;
  for (const auto& [a, acc] : pts) {
    if (acc <= covered) continue;
    hv += (ref_area - a) * (acc - covered);
    covered = acc;
  }
  return hv;
}

namespace {

std::vector<FrontEntry> lookup(IndividualEvaluator& ev, const std::vector<Chromosome>& pop) {
  std::vector<FrontEntry> out;
  out.reserve(pop.size());
  for (const auto& c : pop) out.push_back(ev.evaluate(c));
  return out;
}

std::vector<Chromosome> environmental_selection(IndividualEvaluator& ev, const std::vector<Chromosome>& combined,
                                                std::size_t n) {
  auto entries = lookup(ev, combined);
  const auto fronts = nondominated_sort(entries);
  std::vector<Chromosome> next;
  for (const auto& front : fronts) {
    if (next.size() + front.size() <= n) {
      for (std::size_t i : front) next.push_back(combined[i]);
      continue;
    }
    std::vector<std::size_t> order = front;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = entries[a];
      const auto& y = entries[b];
      if (x.crowding != y.crowding) return x.crowding > y.crowding;
      if (x.synthesized_area != y.synthesized_area) return x.synthesized_area < y.synthesized_area;
      return x.genes < y.genes;
    });
    order.resize(n - next.size());
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) next.push_back(combined[i]);
    break;
  }
  return next;
}

TraceRow trace_row(std::size_t gen, std::vector<FrontEntry> entries, double ref_area, std::size_t evaluations) {
  TraceRow row;
  row.generation = gen;
  row.evaluations = evaluations;
  row.min_area_proxy = std::numeric_limits<double>::infinity();
  const auto fronts = nondominated_sort(entries);
  std::vector<FrontEntry> front;
  for (std::size_t i : fronts.front()) front.push_back(entries[i]);
  for (const auto& e : entries) {
    row.best_accuracy = std::max(row.best_accuracy, e.accuracy_train);
    row.min_area_proxy = std::min(row.min_area_proxy, e.area_proxy);
  }
  row.front_size = front.size();
  row.hypervolume = hypervolume(front, ref_area);
  return row;
}

}  // namespace

Nsga2Result nsga2_run(const IntegrationProblem& problem, const BinaryDataset& data, const Nsga2Config& config,
                      const GenerationHook& on_generation) {
  config.validate();
  if (problem.slots.empty()) throw ValidationError("integration problem has no slots");
  const std::size_t length = problem.slots.size();
  const double rate = config.mutation_rate > 0.0 ? config.mutation_rate : 1.0 / static_cast<double>(length);
  IndividualEvaluator ev(problem, data, config.fitness_split);
  Rng rng(config.rng_seed);

  const Chromosome exact_genes(length, 0);
  std::vector<Chromosome> pop{exact_genes};
  std::set<Chromosome> seen{exact_genes};
  for (std::size_t tries = 0; pop.size() < config.population && tries < 50 * config.population; ++tries) {
    Chromosome c(length);
    for (std::size_t i = 0; i < length; ++i) c[i] = static_cast<std::uint32_t>(uniform_below(rng, problem.slots[i].options.size()));
    if (seen.insert(c).second) pop.push_back(std::move(c));
  }
  ev.evaluate_all(pop);
  const double ref_area = 1.1 * ev.evaluate(exact_genes).area_proxy;

  Nsga2Result result;
  result.search_space_size = problem.search_space_size();
  result.trace.push_back(trace_row(0, lookup(ev, pop), ref_area, ev.netlist_builds()));
  if (on_generation) on_generation(0, lookup(ev, pop));

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    auto entries = lookup(ev, pop);
    nondominated_sort(entries);
    auto tournament = [&]() -> const Chromosome& {
      const std::size_t a = uniform_below(rng, pop.size());
      const std::size_t b = uniform_below(rng, pop.size());
      const auto better = [&](std::size_t x, std::size_t y) {
        if (entries[x].rank != entries[y].rank) return entries[x].rank < entries[y].rank;
        if (entries[x].crowding != entries[y].crowding) return entries[x].crowding > entries[y].crowding;
        return x < y;
      };
      return pop[better(a, b) ? a : b];
    };
    std::vector<Chromosome> offspring;
    while (offspring.size() < config.population) {
      const Chromosome& p1 = tournament();
      const Chromosome& p2 = tournament();
      auto [c1, c2] = bernoulli(rng, config.crossover_rate) ? crossover(p1, p2, rng) : std::pair(p1, p2);
      offspring.push_back(mutate_chromosome(c1, problem, rate, rng));
      offspring.push_back(mutate_chromosome(c2, problem, rate, rng));
    }
    ev.evaluate_all(offspring);
    std::vector<Chromosome> combined;
    std::set<Chromosome> in_combined;
    for (const auto* group : {&pop, &offspring}) {
      for (const auto& c : *group) {
        if (in_combined.insert(c).second) combined.push_back(c);
      }
    }
    pop = environmental_selection(ev, combined, config.population);
    result.trace.push_back(trace_row(gen, lookup(ev, pop), ref_area, ev.netlist_builds()));
    if (on_generation) on_generation(gen, lookup(ev, pop));
  }

  auto final_entries = lookup(ev, pop);
  const auto fronts = nondominated_sort(final_entries);
  for (std::size_t i : fronts.front()) result.front.push_back(final_entries[i]);
  std::sort(result.front.begin(), result.front.end(), [](const FrontEntry& a, const FrontEntry& b) {
    if (a.area_proxy != b.area_proxy) return a.area_proxy < b.area_proxy;
    if (a.accuracy_train != b.accuracy_train) return a.accuracy_train > b.accuracy_train;
    return a.genes < b.genes;
  });
  for (auto& e : result.front) e.accuracy_test = ev.accuracy_on(e.genes, Split::Test);
  result.exact = ev.evaluate(exact_genes);
  result.exact.accuracy_test = ev.accuracy_on(exact_genes, Split::Test);
  result.evaluations = ev.netlist_builds();
  return result;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "generation,best_accuracy,min_area_proxy,front_size,hypervolume,evaluations\n";
  for (const auto& r : trace) {
    out << fmt::format("{},{},{},{},{},{}\n", r.generation, r.best_accuracy, r.min_area_proxy, r.front_size,
                       r.hypervolume, r.evaluations);
  }
  return out.str();
}

nlohmann::json front_json(const Nsga2Result& result, const IntegrationProblem& problem) {
  nlohmann::json front = nlohmann::json::array();
  for (const auto& e : result.front) front.push_back(to_json(e, problem));
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& s : problem.slots) {
    slots.push_back({{"kind", s.hidden ? "hidden" : "output"}, {"neuron", s.neuron}, {"options", s.options.size()}});
  }
  return {{"format", "tnn-front"},
          {"version", 1},
          {"model", problem.model.name},
          {"search_space_size", result.search_space_size},
          {"evaluations", result.evaluations},
          {"slots", std::move(slots)},
          {"exact", to_json(result.exact, problem)},
          {"front", std::move(front)}};
}

void save_front(const Nsga2Result& result, const IntegrationProblem& problem, IndividualEvaluator& evaluator,
                const std::filesystem::path& dir) {
  write_json_file(dir / "front.json", front_json(result, problem));
  write_text_file(dir / "trace.csv", trace_csv(result.trace));
  for (std::size_t k = 0; k < result.front.size(); ++k) {
    const Netlist net = evaluator.netlist(result.front[k].genes).renamed(fmt::format("tnn_front{}", k));
    write_text_file(dir / "verilog" / fmt::format("front_{}.v", k), to_verilog(net));
  }
  write_text_file(dir / "verilog" / "exact.v", to_verilog(evaluator.netlist(result.exact.genes).renamed("tnn_exact")));
}

}  // namespace forge
