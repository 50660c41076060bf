#include "forge/pipeline.hpp"

#include <set>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/parallel.hpp"
#include "forge/random.hpp"

namespace forge {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw ConfigError(fmt::format("unknown split '{}'", s));
}

SampleDistribution distribution_from_string(const std::string& s) {
  if (s == "input_vectors") return SampleDistribution::InputVectors;
  if (s == "value_pairs") return SampleDistribution::ValuePairs;
  throw ConfigError(fmt::format("unknown sample distribution '{}'", s));
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    const auto& ds = j.at("dataset");
    c.dataset_path = resolve(base_dir, ds.at("path").get<std::string>());
    c.ingest.label_column = ds.value("label_column", "");
    c.ingest.split_fraction = ds.value("split_fraction", 0.7);
    if (ds.contains("seed")) c.split_seed = ds["seed"].get<std::uint64_t>();
    c.model_path = resolve(base_dir, j.at("model").get<std::string>());
    const std::string mode = j.value("validation", "strict");
    if (mode != "strict" && mode != "lenient") throw ConfigError(fmt::format("unknown validation mode '{}'", mode));
    c.validation = mode == "strict" ? ValidationMode::Strict : ValidationMode::Lenient;

    if (j.contains("area_table")) c.area_table = AreaTable::from_json(j["area_table"]);
    const auto pc = j.value("pc_library", nlohmann::json::object());
    c.tau_points = pc.value("tau_points", std::size_t{5});
    c.cgp.max_iterations = pc.value("max_iterations", std::uint64_t{100000});
    c.cgp.time_limit = std::chrono::duration<double>(pc.value("time_limit_s", 60.0));
    c.cgp.lambda = pc.value("lambda", std::size_t{4});
    c.cgp.gene_mutations = pc.value("gene_mutations", std::size_t{5});
    c.cgp.exhaustive_limit = pc.value("exhaustive_limit", kDefaultExhaustiveLimit);
    c.cgp.area_table = c.area_table;

    const auto pcc = j.value("pcc_library", nlohmann::json::object());
    c.pcc.samples = pcc.value("samples", std::uint64_t{1000000});
    c.pcc.exhaustive_limit = pcc.value("exhaustive_limit", kDefaultExhaustiveLimit);
    c.pcc.distribution = distribution_from_string(pcc.value("distribution", "input_vectors"));
    const auto max_per_size = pcc.value("max_per_size", std::size_t{8});
    c.pcc.max_per_size = max_per_size == 0 ? std::nullopt : std::optional(max_per_size);
    c.pcc.area_table = c.area_table;

    const auto ns = j.value("nsga2", nlohmann::json::object());
    c.nsga2.population = ns.value("population", std::size_t{100});
    c.nsga2.generations = ns.value("generations", std::size_t{200});
    c.nsga2.crossover_rate = ns.value("crossover_rate", 0.9);
    c.nsga2.mutation_rate = ns.value("mutation_rate", 0.0);
    c.nsga2.fitness_split = split_from_string(ns.value("fitness_split", "train"));

    c.seed = j.value("seed", std::uint64_t{1});
    c.out_dir = resolve(base_dir, j.value("out", "out"));
    c.threads = j.value("threads", 0U);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid pipeline config: {}", e.what()));
  }
  if (c.tau_points < 2) throw ConfigError("pc_library.tau_points must be >= 2");
  c.cgp.validate();
  c.nsga2.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return pipeline_config_from_json(read_json_file(path), path.parent_path());
}

PipelineSummary report_summary(const std::vector<FrontEntry>& front, const FrontEntry& exact, double max_drop) {
  if (front.empty()) throw ValidationError("report_summary needs a non-empty front");
  PipelineSummary s;
  s.exact_area = exact.synthesized_area;
  s.exact_accuracy = exact.accuracy_test;
  s.max_drop = max_drop;
  auto best_with = [&](double min_accuracy) {
    SummaryPoint p{-1, exact.synthesized_area, exact.accuracy_test, 0.0};
    for (std::size_t i = 0; i < front.size(); ++i) {
      const auto& e = front[i];
      if (e.accuracy_test >= min_accuracy && e.synthesized_area < p.synthesized_area) {
        p = {static_cast<int>(i), e.synthesized_area, e.accuracy_test, 0.0};
      }
    }
    p.reduction = s.exact_area > 0.0 ? 1.0 - p.synthesized_area / s.exact_area : 0.0;
    return p;
  };
  s.iso_accuracy = best_with(s.exact_accuracy);
  s.within_drop = best_with(s.exact_accuracy - max_drop);
  return s;
}

nlohmann::json to_json(const PipelineSummary& s) {
  auto point = [](const SummaryPoint& p) {
    return nlohmann::json{{"front_index", p.front_index},
                          {"synthesized_area", p.synthesized_area},
                          {"accuracy_test", p.accuracy},
                          {"area_reduction", p.reduction}};
  };
  return {{"exact_area", s.exact_area},
          {"exact_accuracy_test", s.exact_accuracy},
          {"iso_accuracy", point(s.iso_accuracy)},
          {"within_drop", point(s.within_drop)},
          {"max_drop", s.max_drop}};
}

std::vector<std::size_t> required_pc_sizes(const TnnModel& model) {
  const auto req = neuron_requirements(model);
  std::set<std::size_t> sizes;
  for (const auto& h : req.hidden) {
    sizes.insert(h.n_pos());
    sizes.insert(h.n_neg());
  }
  for (const auto& o : req.output) sizes.insert(o.width());
  sizes.erase(0);
  return {sizes.begin(), sizes.end()};
}

std::vector<PccKey> required_pcc_pairs(const TnnModel& model) {
  std::set<PccKey> pairs;
  for (const auto& h : neuron_requirements(model).hidden) pairs.insert({h.n_pos(), h.n_neg()});
  return {pairs.begin(), pairs.end()};
}

namespace {

template <class F>
auto in_stage(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("stage '{}': {}", stage, e.what()));
  }
}

}  // namespace

nlohmann::json run_pipeline(const PipelineConfig& config, const PipelineLog& log) {
  auto note = [&](const std::string& msg) {
    if (log) log(msg);
  };
  if (config.threads) set_thread_count(config.threads);

  const TnnModel model = in_stage("load", [&] {
    TnnModel m = load_model(config.model_path);
    for (const auto& w : validate_model(m, config.validation).warnings) note("warning: " + w);
    return m;
  });
  const BinaryDataset data = in_stage("ingest", [&] {
    IngestOptions opts = config.ingest;
    opts.rng_seed = config.split_seed ? *config.split_seed : derive_seed(config.seed, "split");
    opts.thresholds = model.thresholds;
    BinaryDataset d = ingest(config.dataset_path, opts);
    if (d.feature_count() != model.input_count) {
      throw ValidationError(fmt::format("dataset has {} features, model expects {}", d.feature_count(), model.input_count));
    }
    if (d.class_names.size() != model.class_count) {
      throw ValidationError(fmt::format("dataset has {} classes, model has {}", d.class_names.size(), model.class_count));
    }
    for (const auto& w : d.warnings) note("warning: " + w);
    return d;
  });

  const auto sizes = required_pc_sizes(model);
  const std::filesystem::path pc_dir = config.out_dir / "pc_lib";
  const PcLibrary pc_lib = in_stage("pc-lib", [&] {
    const nlohmann::json key_doc = {{"sizes", sizes},
                                    {"tau_points", config.tau_points},
                                    {"max_iterations", config.cgp.max_iterations},
                                    {"time_limit_s", config.cgp.time_limit.count()},
                                    {"lambda", config.cgp.lambda},
                                    {"gene_mutations", config.cgp.gene_mutations},
                                    {"exhaustive_limit", config.cgp.exhaustive_limit},
                                    {"area_table", config.area_table.to_json()},
                                    {"seed", derive_seed(config.seed, "pc-lib")}};
    const std::string key = checksum_hex(key_doc.dump());
    if (!sizes.empty() && pc_library_key(pc_dir) == key) {
      note("pc-lib: reusing checkpoint");
      return load_pc_library(pc_dir);
    }
    note(fmt::format("pc-lib: building sizes [{}]", fmt::join(sizes, ", ")));
    PcLibrary lib = sizes.empty() ? PcLibrary{}
                                  : build_pc_library(sizes, config.tau_points, config.cgp, derive_seed(config.seed, "pc-lib"));
    save_pc_library(lib, pc_dir, key);
    return lib;
  });
  const std::string pc_key = pc_library_key(pc_dir);

  const auto pairs = required_pcc_pairs(model);
  const std::filesystem::path pcc_dir = config.out_dir / "pcc_lib";
  const PccLibrary pcc_lib = in_stage("pcc-lib", [&] {
    nlohmann::json pair_list = nlohmann::json::array();
    for (const auto& [p, n] : pairs) pair_list.push_back({p, n});
    const nlohmann::json key_doc = {{"pairs", pair_list},
                                    {"samples", config.pcc.samples},
                                    {"exhaustive_limit", config.pcc.exhaustive_limit},
                                    {"distribution", config.pcc.distribution == SampleDistribution::InputVectors ? "input_vectors" : "value_pairs"},
                                    {"max_per_size", config.pcc.max_per_size ? *config.pcc.max_per_size : 0},
                                    {"pc_key", pc_key},
                                    {"seed", derive_seed(config.seed, "pcc-lib")}};
    const std::string key = checksum_hex(key_doc.dump());
    if (pcc_library_key(pcc_dir) == key) {
      note("pcc-lib: reusing checkpoint");
      return load_pcc_library(pcc_dir);
    }
    note(fmt::format("pcc-lib: building {} PCC shapes", pairs.size()));
    PccLibrary lib = build_pcc_library(pairs, pc_lib, config.pcc, derive_seed(config.seed, "pcc-lib"));
    save_pcc_library(lib, pcc_dir, key);
    return lib;
  });

  return in_stage("integrate", [&] {
    const IntegrationProblem problem = make_problem(model, pc_lib, pcc_lib, config.area_table);
    Nsga2Config ns = config.nsga2;
    ns.rng_seed = derive_seed(config.seed, "nsga2");
    note(fmt::format("integrate: {} slots, search space {:.3g}", problem.slots.size(), problem.search_space_size()));
    const Nsga2Result result = nsga2_run(problem, data, ns);
    IndividualEvaluator ev(problem, data, ns.fitness_split);
    save_front(result, problem, ev, config.out_dir / "front");

    const PipelineSummary summary = report_summary(result.front, result.exact);
    nlohmann::json report = {
        {"format", "tnn-report"},
        {"version", 1},
        {"model", model.name},
        {"topology", {model.input_count, model.hidden_count, model.class_count}},
        {"dataset",
         {{"features", data.feature_count()},
          {"classes", data.class_names},
          {"train_rows", data.rows(Split::Train).size()},
          {"test_rows", data.rows(Split::Test).size()}}},
        {"seed", config.seed},
        {"libraries",
         {{"pc_sizes", sizes},
          {"pc_entries", pc_lib.total_entries()},
          {"pcc_pairs", pairs.size()},
          {"pcc_entries", pcc_lib.total_entries()},
          {"search_space_size", result.search_space_size}}},
        {"exact", to_json(result.exact, problem)},
        {"front", front_json(result, problem)["front"]},
        {"summary", to_json(summary)}};
    write_json_file(config.out_dir / "report.json", report);
    write_json_file(config.out_dir / "summary.json", to_json(summary));
    note(fmt::format("integrate: front of {} entries, iso-accuracy area reduction {:.1f}%", result.front.size(),
                     100.0 * summary.iso_accuracy.reduction));
    return report;
  });
}

}  // namespace forge
