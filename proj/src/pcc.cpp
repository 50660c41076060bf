#include "forge/pcc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/parallel.hpp"
#include "forge/pareto.hpp"
#include "forge/random.hpp"

namespace forge {

std::size_t comparator_width(std::size_t n_pos, std::size_t n_neg) {
  return popcount_width(std::max(n_pos, n_neg));
}

Signal emit_greater_equal(NetlistBuilder& b, std::span<const Signal> x, std::span<const Signal> z) {
  const std::size_t width = std::max(x.size(), z.size());
  if (width == 0) return b.constant(true);
  auto bit = [&](std::span<const Signal> v, std::size_t i) { return i < v.size() ? v[i] : b.constant(false); };
  Signal ge = b.make_or(bit(x, 0), b.make_not(bit(z, 0)));
  for (std::size_t i = 1; i < width; ++i) {
    const Signal xi = bit(x, i);
    const Signal zi = bit(z, i);
    const Signal greater = b.make_and(xi, b.make_not(zi));
    const Signal equal = b.make_xnor(xi, zi);
    ge = b.make_or(greater, b.make_and(equal, ge));
  }
  return ge;
}

Netlist build_comparator(std::size_t width) {
  NetlistBuilder b(2 * width);
  std::vector<Signal> x(width), z(width);
  for (std::size_t i = 0; i < width; ++i) {
    x[i] = b.input(i);
    z[i] = b.input(width + i);
  }
  return b.build(fmt::format("cmp_ge{}", width), {emit_greater_equal(b, x, z)});
}

PccCircuit assemble_pcc(const Netlist& pc_pos, const Netlist& pc_neg) {
  PccCircuit c;
  c.n_pos = pc_pos.input_count();
  c.n_neg = pc_neg.input_count();
  c.comparator_width = comparator_width(c.n_pos, c.n_neg);
  if (pc_pos.output_count() > c.comparator_width || pc_neg.output_count() > c.comparator_width) {
    throw ValidationError(fmt::format("PC outputs ({}, {}) wider than the comparator width {}",
                                      pc_pos.output_count(), pc_neg.output_count(), c.comparator_width));
  }
  NetlistBuilder b(c.n_pos + c.n_neg, false);
  std::vector<Signal> pos_in(c.n_pos), neg_in(c.n_neg);
  std::iota(pos_in.begin(), pos_in.end(), Signal{0});
  std::iota(neg_in.begin(), neg_in.end(), static_cast<Signal>(c.n_pos));
  const auto x = b.instantiate(pc_pos, pos_in);
  const auto z = b.instantiate(pc_neg, neg_in);
  std::vector<Signal> xs(x), zs(z);
  while (xs.size() < c.comparator_width) xs.push_back(b.constant(false));
  while (zs.size() < c.comparator_width) zs.push_back(b.constant(false));
  const Signal ge = emit_greater_equal(b, xs, zs);
  c.assembled = b.build(fmt::format("pcc{}_{}", c.n_pos, c.n_neg), {ge});
  c.pc_pos = pc_pos;
  c.pc_neg = pc_neg;
  return c;
}

nlohmann::json to_json(const PccLibraryEntry& e) {
  return {{"id", e.id},
          {"n_pos", e.pcc.n_pos},
          {"n_neg", e.pcc.n_neg},
          {"pos_id", e.pos_id},
          {"neg_id", e.neg_id},
          {"exact", e.exact},
          {"comparator_width", e.pcc.comparator_width},
          {"estimated_area", e.estimated_area},
          {"synthesized_area", e.synthesized_area},
          {"mde", e.distance.mde},
          {"wcde", e.distance.wcde},
          {"pareto_rank", e.pareto_rank},
          {"distance", to_json(e.distance)},
          {"pc_pos", to_json(e.pcc.pc_pos)},
          {"pc_neg", to_json(e.pcc.pc_neg)},
          {"assembled", to_json(e.pcc.assembled)}};
}

PccLibraryEntry pcc_entry_from_json(const nlohmann::json& j) {
  try {
    PccLibraryEntry e;
    e.id = j.at("id").get<std::string>();
    e.pos_id = j.at("pos_id").get<std::string>();
    e.neg_id = j.at("neg_id").get<std::string>();
    e.exact = j.at("exact").get<bool>();
    e.pcc.n_pos = j.at("n_pos").get<std::size_t>();
    e.pcc.n_neg = j.at("n_neg").get<std::size_t>();
    e.pcc.comparator_width = j.at("comparator_width").get<std::size_t>();
    e.pcc.pc_pos = netlist_from_json(j.at("pc_pos"));
    e.pcc.pc_neg = netlist_from_json(j.at("pc_neg"));
    e.pcc.assembled = netlist_from_json(j.at("assembled"));
    e.estimated_area = j.at("estimated_area").get<double>();
    e.synthesized_area = j.at("synthesized_area").get<double>();
    e.pareto_rank = j.at("pareto_rank").get<int>();
    e.distance = distance_report_from_json(j.at("distance"));
    if (e.pcc.assembled.input_count() != e.pcc.n_pos + e.pcc.n_neg || e.pcc.assembled.output_count() != 1) {
      throw ValidationError(fmt::format("{}: assembled netlist does not match its sizes", e.id));
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(fmt::format("malformed PCC library entry: {}", ex.what()));
  }
}

namespace {

std::vector<PcLibraryEntry> pc_options(const PcLibrary& lib, std::size_t n, const AreaTable& table) {
  if (n == 0) {
    PcLibraryEntry e;
    e.id = "pc0_exact";
    e.netlist = build_exact_pc(0);
    e.area = area(e.netlist, table);
    e.pareto = true;
    return {e};
  }
  return lib.entries(n);
}

std::vector<Objectives> objectives(const std::vector<PccLibraryEntry>& entries) {
  std::vector<Objectives> pts;
  pts.reserve(entries.size());
  for (const auto& e : entries) pts.push_back({e.estimated_area, e.distance.mde});
  return pts;
}

}  // namespace

std::vector<PccLibraryEntry> enumerate_pcc_candidates(std::size_t n_pos, std::size_t n_neg,
                                                      const PcLibrary& pc_library,
                                                      const PccEvalConfig& config, std::uint64_t rng_seed) {
  const auto pos = pc_options(pc_library, n_pos, config.area_table);
  const auto neg = pc_options(pc_library, n_neg, config.area_table);
  std::vector<PccLibraryEntry> out(pos.size() * neg.size());
  const std::uint64_t seed = derive_seed(rng_seed, fmt::format("pcc/{}_{}", n_pos, n_neg));
  const bool exhaustive = n_pos + n_neg <= config.exhaustive_limit;
  parallel_for(out.size(), [&](std::size_t k) {
    const auto& p = pos[k / neg.size()];
    const auto& q = neg[k % neg.size()];
    PccLibraryEntry& e = out[k];
    e.pos_id = p.id;
    e.neg_id = q.id;
    e.id = fmt::format("pcc{}_{}:{}+{}", n_pos, n_neg, p.id, q.id);
    e.exact = p.provenance == Provenance::Exact && q.provenance == Provenance::Exact;
    e.pcc = assemble_pcc(p.netlist, q.netlist);
    e.estimated_area = p.area + q.area;
    e.distance = exhaustive ? eval_pcc_exhaustive(e.pcc, config.exhaustive_limit)
                            : eval_pcc_mc(e.pcc, config.samples, seed, config.distribution);
  });
  const auto fronts = nondominated_fronts(objectives(out));
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    for (std::size_t i : fronts[r]) out[i].pareto_rank = static_cast<int>(r);
  }
  return out;
}

std::vector<PccLibraryEntry> pareto_filter(const std::vector<PccLibraryEntry>& candidates,
                                           std::optional<std::size_t> max_per_size) {
  if (candidates.empty()) throw ValidationError("pareto_filter needs at least one candidate");
  const PccKey key{candidates[0].pcc.n_pos, candidates[0].pcc.n_neg};
  for (const auto& c : candidates) {
    if (PccKey{c.pcc.n_pos, c.pcc.n_neg} != key) {
      throw ValidationError(fmt::format("pareto_filter mixes PCC sizes ({}, {}) and ({}, {})", key.first,
                                        key.second, c.pcc.n_pos, c.pcc.n_neg));
    }
  }
  if (max_per_size && *max_per_size < 2) throw ValidationError("max_per_size must be at least 2");

  const auto pts = objectives(candidates);
  std::vector<std::size_t> front = nondominated_fronts(pts).front();
  std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });

  if (max_per_size) {
    front.erase(std::unique(front.begin(), front.end(), [&](std::size_t a, std::size_t b) { return pts[a] == pts[b]; }),
                front.end());
    const std::size_t m = *max_per_size;
    if (front.size() > m) {
      const double lo = pts[front.front()][0];
      const double hi = pts[front.back()][0];
      std::vector<bool> keep(front.size(), false);
      keep.front() = keep.back() = true;
      for (std::size_t k = 1; k + 1 < m; ++k) {
        const double target = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
        std::size_t best = front.size();
        for (std::size_t i = 0; i < front.size(); ++i) {
          if (keep[i]) continue;
          if (best == front.size() || std::abs(pts[front[i]][0] - target) < std::abs(pts[front[best]][0] - target)) {
            best = i;
          }
        }
        keep[best] = true;
      }
      std::vector<std::size_t> thinned;
      for (std::size_t i = 0; i < front.size(); ++i) {
        if (keep[i]) thinned.push_back(front[i]);
      }
      front = std::move(thinned);
    }
  }
  std::vector<PccLibraryEntry> out;
  out.reserve(front.size());
  for (std::size_t i : front) {
    out.push_back(candidates[i]);
    out.back().pareto_rank = 0;
  }
  return out;
}

void synthesize_and_annotate(std::vector<PccLibraryEntry>& entries, const AreaTable& table) {
  for (auto& e : entries) e.synthesized_area = area(e.pcc.assembled, table);
}

const std::vector<PccLibraryEntry>& PccLibrary::entries(std::size_t n_pos, std::size_t n_neg) const {
  auto it = by_pair.find({n_pos, n_neg});
  if (it == by_pair.end()) {
    throw ValidationError(fmt::format("PCC library has no entries for ({}, {})", n_pos, n_neg));
  }
  return it->second;
}

std::size_t PccLibrary::exact_index(std::size_t n_pos, std::size_t n_neg) const {
  const auto& list = entries(n_pos, n_neg);
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i].exact) return i;
  }
  throw ValidationError(fmt::format("PCC library has no exact entry for ({}, {})", n_pos, n_neg));
}

std::size_t PccLibrary::total_entries() const {
  std::size_t total = 0;
  for (const auto& [key, list] : by_pair) total += list.size();
  return total;
}

PccLibrary build_pcc_library(const std::vector<PccKey>& pairs, const PcLibrary& pc_library,
                             const PccEvalConfig& config, std::uint64_t rng_seed) {
  PccLibrary lib;
  for (const PccKey& key : std::set<PccKey>(pairs.begin(), pairs.end())) {
    const auto candidates = enumerate_pcc_candidates(key.first, key.second, pc_library, config, rng_seed);
    auto filtered = pareto_filter(candidates, config.max_per_size);
    std::vector<PccLibraryEntry> list;
    auto exact = std::find_if(filtered.begin(), filtered.end(), [](const auto& e) { return e.exact; });
    if (exact != filtered.end()) {
      list.push_back(*exact);
      filtered.erase(exact);
    } else {
      list.push_back(*std::find_if(candidates.begin(), candidates.end(), [](const auto& e) { return e.exact; }));
    }
    list.insert(list.end(), filtered.begin(), filtered.end());
    synthesize_and_annotate(list, config.area_table);
    lib.by_pair[key] = std::move(list);
  }
  return lib;
}

void save_pcc_library(const PccLibrary& lib, const std::filesystem::path& dir, const std::string& key) {
  nlohmann::json index = {{"format", "pcc-library"}, {"version", 1}, {"key", key}};
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [k, list] : lib.by_pair) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : list) entries.push_back(to_json(e));
    const std::string file = fmt::format("pcc_{}_{}.json", k.first, k.second);
    const std::string text =
        write_json_file(dir / file, {{"n_pos", k.first}, {"n_neg", k.second}, {"entries", std::move(entries)}});
    pairs.push_back({{"n_pos", k.first},
                     {"n_neg", k.second},
                     {"file", file},
                     {"checksum", checksum_hex(text)},
                     {"entries", list.size()}});
  }
  index["pairs"] = std::move(pairs);
  write_json_file(dir / "index.json", index);
}

PccLibrary load_pcc_library(const std::filesystem::path& dir) {
  const nlohmann::json index = read_json_file(dir / "index.json");
  if (index.value("format", "") != "pcc-library") {
    throw IoError(fmt::format("'{}' is not a PCC library index", (dir / "index.json").string()));
  }
  PccLibrary lib;
  for (const auto& p : index.at("pairs")) {
    const std::string file = p.at("file").get<std::string>();
    const std::string text = read_text_file(dir / file);
    if (checksum_hex(text) != p.at("checksum").get<std::string>()) {
      throw IoError(fmt::format("checksum mismatch for '{}'", (dir / file).string()));
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(fmt::format("'{}' is not valid JSON: {}", file, e.what()));
    }
    auto& list = lib.by_pair[{p.at("n_pos").get<std::size_t>(), p.at("n_neg").get<std::size_t>()}];
    for (const auto& e : j.at("entries")) list.push_back(pcc_entry_from_json(e));
  }
  return lib;
}

std::string pcc_library_key(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::exists(dir / "index.json", ec)) return {};
  try {
    return read_json_file(dir / "index.json").value("key", "");
  } catch (const Error&) {
    return {};
  }
}

}  // namespace forge
