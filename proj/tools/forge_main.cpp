#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/integrator.hpp"
#include "forge/io.hpp"
#include "forge/parallel.hpp"
#include "forge/pcc.hpp"
#include "forge/pipeline.hpp"
#include "forge/popcount.hpp"
#include "forge/tnn.hpp"

using namespace forge;

namespace {

void log_line(const std::string& s) { std::cerr << s << '\n'; }

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoul(item));
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("'{}' is not a size", item));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: approximate popcount, PCC and ternary-network circuit toolkit"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  // pc-lib
  auto* pc = app.add_subcommand("pc-lib", "Evolve the approximate popcount library");
  std::string pc_sizes, pc_model, pc_out = "lib/pc";
  std::size_t tau_points = 5;
  CgpSearchConfig cgp;
  double time_limit = 60.0;
  std::uint64_t pc_seed = 1;
  pc->add_option("--sizes", pc_sizes, "Comma-separated popcount widths");
  pc->add_option("--model", pc_model, "Derive the widths from a model");
  pc->add_option("--tau-points", tau_points, "Points per error schedule")->capture_default_str();
  pc->add_option("--iters", cgp.max_iterations, "CGP iterations per run (0 = unbounded)")->capture_default_str();
  pc->add_option("--time-limit", time_limit, "Seconds per run (0 = unbounded)")->capture_default_str();
  pc->add_option("--lambda", cgp.lambda, "Offspring per generation")->capture_default_str();
  pc->add_option("--mutations", cgp.gene_mutations, "Genes mutated per offspring")->capture_default_str();
  pc->add_option("--seed", pc_seed, "Master seed")->capture_default_str();
  pc->add_option("--out", pc_out, "Output directory")->capture_default_str();

  // pcc-lib
  auto* pcc = app.add_subcommand("pcc-lib", "Pareto library of popcount-compare circuits");
  std::string pcc_model, pcc_pc_lib = "lib/pc", pcc_out = "lib/pcc", pcc_pairs;
  PccEvalConfig pcc_cfg;
  std::size_t max_per_size = 8;
  std::uint64_t pcc_seed = 1;
  pcc->add_option("--model", pcc_model, "Derive (n_pos, n_neg) shapes from a model");
  pcc->add_option("--pairs", pcc_pairs, "Explicit shapes, e.g. 4:3,8:8");
  pcc->add_option("--pc-lib", pcc_pc_lib, "PC library directory")->capture_default_str();
  pcc->add_option("--samples", pcc_cfg.samples, "Monte-Carlo samples")->capture_default_str();
  pcc->add_option("--max-per-size", max_per_size, "Thinning limit (0 = keep all)")->capture_default_str();
  pcc->add_option("--seed", pcc_seed, "Seed")->capture_default_str();
  pcc->add_option("--out", pcc_out, "Output directory")->capture_default_str();

  // integrate
  auto* integ = app.add_subcommand("integrate", "NSGA-II selection of components per neuron");
  std::string in_model, in_pc = "lib/pc", in_pcc = "lib/pcc", in_data, in_label, in_out = "front";
  double in_split = 0.7;
  std::uint64_t in_split_seed = 0;
  Nsga2Config ns;
  integ->add_option("--model", in_model, "Model JSON")->required();
  integ->add_option("--pc-lib", in_pc, "PC library directory")->capture_default_str();
  integ->add_option("--pcc-lib", in_pcc, "PCC library directory")->capture_default_str();
  integ->add_option("--data", in_data, "Dataset CSV")->required();
  integ->add_option("--label", in_label, "Label column (default: last)");
  integ->add_option("--split", in_split, "Train fraction")->capture_default_str();
  integ->add_option("--split-seed", in_split_seed, "Split shuffle seed")->capture_default_str();
  integ->add_option("--pop", ns.population, "Population size")->capture_default_str();
  integ->add_option("--gens", ns.generations, "Generations")->capture_default_str();
  integ->add_option("--seed", ns.rng_seed, "Seed")->capture_default_str();
  integ->add_option("--out", in_out, "Output directory")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Exact netlist generation and accuracy of a model");
  std::string ev_model, ev_data, ev_label, ev_netlist, ev_report;
  double ev_split = 0.7;
  std::uint64_t ev_seed = 0;
  bool ev_lenient = false;
  ev->add_option("--model", ev_model, "Model JSON")->required();
  ev->add_option("--data", ev_data, "Dataset CSV");
  ev->add_option("--label", ev_label, "Label column (default: last)");
  ev->add_option("--split", ev_split, "Train fraction")->capture_default_str();
  ev->add_option("--split-seed", ev_seed, "Split shuffle seed")->capture_default_str();
  ev->add_option("--netlist", ev_netlist, "Write structural Verilog here");
  ev->add_option("--report", ev_report, "Write a JSON report here");
  ev->add_flag("--lenient", ev_lenient, "Compensate unequal zero-weight counts");

  // run
  auto* run = app.add_subcommand("run", "Full three-phase pipeline from a config file");
  std::string run_config, run_out;
  run->add_option("--config", run_config, "Pipeline JSON")->required();
  run->add_option("--out", run_out, "Override the output directory");

  // make-model
  auto* mk = app.add_subcommand("make-model", "Toy ternary model by hill climbing (test scaffolding)");
  std::string mk_data, mk_label, mk_out, mk_name = "toy";
  double mk_split = 0.7;
  std::uint64_t mk_split_seed = 0;
  ToyTrainConfig toy;
  mk->add_option("--data", mk_data, "Dataset CSV")->required();
  mk->add_option("--label", mk_label, "Label column (default: last)");
  mk->add_option("--split", mk_split, "Train fraction")->capture_default_str();
  mk->add_option("--split-seed", mk_split_seed, "Split shuffle seed")->capture_default_str();
  mk->add_option("--hidden", toy.hidden, "Hidden neurons")->capture_default_str();
  mk->add_option("--zeros", toy.zero_count, "Zero weights per output neuron")->capture_default_str();
  mk->add_option("--iters", toy.iterations, "Hill-climbing steps")->capture_default_str();
  mk->add_option("--seed", toy.rng_seed, "Seed")->capture_default_str();
  mk->add_option("--name", mk_name, "Model name")->capture_default_str();
  mk->add_option("--out", mk_out, "Model JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    set_thread_count(threads);
    if (pc->parsed()) {
      std::vector<std::size_t> sizes;
      if (!pc_sizes.empty()) sizes = parse_sizes(pc_sizes);
      if (!pc_model.empty()) {
        const auto more = required_pc_sizes(load_model(pc_model));
        sizes.insert(sizes.end(), more.begin(), more.end());
      }
      if (sizes.empty()) throw ValidationError("pc-lib needs --sizes or --model");
      cgp.time_limit = std::chrono::duration<double>(time_limit);
      const PcLibrary lib = build_pc_library(sizes, tau_points, cgp, pc_seed);
      save_pc_library(lib, pc_out);
      for (const auto& [n, list] : lib.by_size) {
        for (const auto& e : list) {
          std::cout << fmt::format("{:<16} area {:>7.1f}  mae {:>9.5f}  wcae {:>3}{}\n", e.id, e.area, e.mae, e.wcae,
                                   e.pareto ? "  *" : "");
        }
      }
    } else if (pcc->parsed()) {
      std::vector<PccKey> pairs;
      if (!pcc_model.empty()) pairs = required_pcc_pairs(load_model(pcc_model));
      if (!pcc_pairs.empty()) {
        std::stringstream ss(pcc_pairs);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw ValidationError(fmt::format("'{}' is not n_pos:n_neg", item));
          pairs.emplace_back(std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1)));
        }
      }
      if (pairs.empty()) throw ValidationError("pcc-lib needs --model or --pairs");
      pcc_cfg.max_per_size = max_per_size == 0 ? std::nullopt : std::optional(max_per_size);
      const PccLibrary lib = build_pcc_library(pairs, load_pc_library(pcc_pc_lib), pcc_cfg, pcc_seed);
      save_pcc_library(lib, pcc_out);
      for (const auto& [key, list] : lib.by_pair) {
        for (const auto& e : list) {
          std::cout << fmt::format("{:<40} est {:>6.1f}  syn {:>6.1f}  mde {:>8.5f}  wcde {}\n", e.id,
                                   e.estimated_area, e.synthesized_area, e.mde(), e.wcde());
        }
      }
    } else if (integ->parsed()) {
      const TnnModel model = load_model(in_model);
      validate_model(model, ValidationMode::Lenient);
      IngestOptions opts{in_label, in_split, in_split_seed, model.thresholds};
      const BinaryDataset data = ingest(in_data, opts);
      for (const auto& w : data.warnings) log_line("warning: " + w);
      const IntegrationProblem problem = make_problem(model, load_pc_library(in_pc), load_pcc_library(in_pcc));
      log_line(fmt::format("search space {:.3g}", problem.search_space_size()));
      const Nsga2Result result = nsga2_run(problem, data, ns);
      IndividualEvaluator evaluator(problem, data, ns.fitness_split);
      save_front(result, problem, evaluator, in_out);
      for (const auto& e : result.front) {
        std::cout << fmt::format("area_proxy {:>8.1f}  synthesized {:>8.1f}  train {:.4f}  test {:.4f}\n", e.area_proxy,
                                 e.synthesized_area, e.accuracy_train, e.accuracy_test);
      }
    } else if (ev->parsed()) {
      const TnnModel model = load_model(ev_model);
      const ModelValidation v = validate_model(model, ev_lenient ? ValidationMode::Lenient : ValidationMode::Strict);
      for (const auto& w : v.warnings) log_line("warning: " + w);
      const Netlist net = generate_netlist(model, TnnSelection::exact(model), model.name);
      nlohmann::json report = {{"model", model.name},
                               {"topology", {model.input_count, model.hidden_count, model.class_count}},
                               {"gates", net.active_gate_count()},
                               {"area", area(net)},
                               {"class_offsets", v.class_offsets}};
      if (!ev_data.empty()) {
        IngestOptions opts{ev_label, ev_split, ev_seed, model.thresholds};
        const BinaryDataset data = ingest(ev_data, opts);
        for (const auto& w : data.warnings) log_line("warning: " + w);
        for (Split s : {Split::Train, Split::Test}) {
          if (data.rows(s).empty()) continue;
          const std::string name = s == Split::Train ? "train" : "test";
          report["accuracy_" + name] = accuracy(model, data, s);
          report["netlist_accuracy_" + name] = accuracy(net, data, s);
        }
      }
      if (!ev_netlist.empty()) write_text_file(ev_netlist, to_verilog(net));
      if (!ev_report.empty()) write_json_file(ev_report, report);
      std::cout << report.dump(1) << '\n';
    } else if (run->parsed()) {
      PipelineConfig cfg = load_pipeline_config(run_config);
      if (!run_out.empty()) cfg.out_dir = run_out;
      if (threads) cfg.threads = threads;
      const auto report = run_pipeline(cfg, log_line);
      std::cout << report.at("summary").dump(1) << '\n';
    } else if (mk->parsed()) {
      const BinaryDataset data = ingest(mk_data, {mk_label, mk_split, mk_split_seed, std::nullopt});
      for (const auto& w : data.warnings) log_line("warning: " + w);
      const TnnModel model = train_toy_model(data, toy, mk_name);
      save_model(model, mk_out);
      std::cout << fmt::format("train {:.4f}  test {:.4f}\n", accuracy(model, data, Split::Train),
                               data.rows(Split::Test).empty() ? 0.0 : accuracy(model, data, Split::Test));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
