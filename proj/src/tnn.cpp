#include "forge/tnn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/pcc.hpp"
#include "forge/popcount.hpp"
#include "forge/random.hpp"

namespace forge {

nlohmann::json to_json(const TnnModel& m) {
  return {{"format", "tnn-model"},
          {"version", 1},
          {"name", m.name},
          {"topology", {m.input_count, m.hidden_count, m.class_count}},
          {"hidden_weights", m.hidden_weights},
          {"output_weights", m.output_weights},
          {"thresholds", m.thresholds}};
}

TnnModel model_from_json(const nlohmann::json& j) {
  TnnModel m;
  try {
    if (j.at("format").get<std::string>() != "tnn-model") throw ValidationError("not a tnn-model document");
    if (j.at("version").get<int>() != 1) {
      throw ValidationError(fmt::format("unsupported model version {}", j["version"].dump()));
    }
    m.name = j.value("name", "model");
    const auto topo = j.at("topology").get<std::vector<std::size_t>>();
    if (topo.size() != 3) throw ValidationError("topology must be [inputs, hidden, classes]");
    m.input_count = topo[0];
    m.hidden_count = topo[1];
    m.class_count = topo[2];
    m.hidden_weights = j.at("hidden_weights").get<std::vector<std::vector<int>>>();
    m.output_weights = j.at("output_weights").get<std::vector<std::vector<int>>>();
    m.thresholds = j.at("thresholds").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed model: {}", e.what()));
  }
  auto check_matrix = [](const auto& w, std::size_t rows, std::size_t cols, const char* what) {
    if (w.size() != rows) throw ValidationError(fmt::format("{} has {} rows, expected {}", what, w.size(), rows));
    for (std::size_t r = 0; r < rows; ++r) {
      if (w[r].size() != cols) {
        throw ValidationError(fmt::format("{} row {} has {} entries, expected {}", what, r, w[r].size(), cols));
      }
    }
  };
  check_matrix(m.hidden_weights, m.hidden_count, m.input_count, "hidden_weights");
  check_matrix(m.output_weights, m.class_count, m.hidden_count, "output_weights");
  if (m.thresholds.size() != m.input_count) {
    throw ValidationError(fmt::format("{} thresholds for {} inputs", m.thresholds.size(), m.input_count));
  }
  return m;
}

TnnModel load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

void save_model(const TnnModel& model, const std::filesystem::path& path) { write_json_file(path, to_json(model)); }

ModelValidation validate_model(const TnnModel& model, ValidationMode mode) {
  if (model.input_count == 0 || model.hidden_count == 0 || model.class_count == 0) {
    throw ValidationError("topology entries must all be positive");
  }
  auto check_ternary = [](const std::vector<std::vector<int>>& w, const char* what) {
    for (std::size_t r = 0; r < w.size(); ++r) {
      for (std::size_t c = 0; c < w[r].size(); ++c) {
        if (w[r][c] < -1 || w[r][c] > 1) {
          throw ValidationError(fmt::format("{}[{}][{}] = {} is not ternary", what, r, c, w[r][c]));
        }
      }
    }
  };
  check_ternary(model.hidden_weights, "hidden_weights");
  check_ternary(model.output_weights, "output_weights");
  for (std::size_t i = 0; i < model.thresholds.size(); ++i) {
    const double t = model.thresholds[i];
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError(fmt::format("threshold {} = {} outside [0, 1]", i, t));
  }
  ModelValidation v;
  for (const auto& row : model.output_weights) {
    v.zero_counts.push_back(static_cast<std::size_t>(std::count(row.begin(), row.end(), 0)));
  }
  const std::size_t lo = *std::min_element(v.zero_counts.begin(), v.zero_counts.end());
  const std::size_t hi = *std::max_element(v.zero_counts.begin(), v.zero_counts.end());
  v.equal_zero_count = lo == hi;
  if (!v.equal_zero_count && mode == ValidationMode::Strict) {
    throw ValidationError(fmt::format("output neurons have unequal zero-weight counts (min {}, max {})", lo, hi));
  }
  for (std::size_t n : v.zero_counts) v.class_offsets.push_back(0.5 * static_cast<double>(n - lo));
  if (!v.equal_zero_count) v.warnings.push_back("unequal zero-weight counts compensated by per-class offsets");
  return v;
}

SlotRequirements neuron_requirements(const TnnModel& model) {
  SlotRequirements req;
  for (const auto& row : model.hidden_weights) {
    HiddenSlot s;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] > 0) s.pos_features.push_back(i);
      if (row[i] < 0) s.neg_features.push_back(i);
    }
    req.hidden.push_back(std::move(s));
  }
  for (const auto& row : model.output_weights) {
    OutputSlot s;
    for (std::size_t h = 0; h < row.size(); ++h) {
      if (row[h] != 0) {
        s.hidden.push_back(h);
        s.inverted.push_back(row[h] < 0);
      }
    }
    req.output.push_back(std::move(s));
  }
  return req;
}

namespace {

std::vector<std::int64_t> score_offsets(const TnnModel& model) {
  std::vector<std::int64_t> zeros;
  for (const auto& row : model.output_weights) zeros.push_back(std::count(row.begin(), row.end(), 0));
  const std::int64_t lo = zeros.empty() ? 0 : *std::min_element(zeros.begin(), zeros.end());
  for (auto& z : zeros) z -= lo;
  return zeros;
}

void check_sample(const TnnModel& model, std::span<const std::uint8_t> sample) {
  if (sample.size() != model.input_count) {
    throw ValidationError(fmt::format("sample has {} features, model expects {}", sample.size(), model.input_count));
  }
}

}  // namespace

std::vector<std::uint8_t> hidden_activations(const TnnModel& model, std::span<const std::uint8_t> sample) {
  check_sample(model, sample);
  std::vector<std::uint8_t> h(model.hidden_count);
  for (std::size_t k = 0; k < model.hidden_count; ++k) {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < model.input_count; ++i) {
      if (sample[i]) sum += model.hidden_weights[k][i];
    }
    h[k] = sum >= 0 ? 1 : 0;
  }
  return h;
}

std::vector<std::int64_t> class_scores(const TnnModel& model, std::span<const std::uint8_t> sample) {
  const auto h = hidden_activations(model, sample);
  auto scores = score_offsets(model);
  for (std::size_t c = 0; c < model.class_count; ++c) {
    std::int64_t matches = 0;
    for (std::size_t k = 0; k < model.hidden_count; ++k) {
      const int w = model.output_weights[c][k];
      if (w > 0 && h[k]) ++matches;
      if (w < 0 && !h[k]) ++matches;
    }
    scores[c] += 2 * matches;
  }
  return scores;
}

std::size_t argmax(std::span<const std::int64_t> scores) {
  if (scores.empty()) throw ValidationError("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::size_t infer_exact(const TnnModel& model, std::span<const std::uint8_t> sample) {
  const auto s = class_scores(model, sample);
  return argmax(s);
}

TnnSelection TnnSelection::exact(const TnnModel& model) {
  return {std::vector<const PccCircuit*>(model.hidden_count, nullptr),
          std::vector<const Netlist*>(model.class_count, nullptr)};
}

namespace {

std::vector<Signal> emit_add(NetlistBuilder& b, const std::vector<Signal>& x, const std::vector<Signal>& y) {
  const std::size_t width = std::max(x.size(), y.size()) + 1;
  std::vector<Signal> out;
  Signal carry = b.constant(false);
  for (std::size_t i = 0; i < width; ++i) {
    const Signal xi = i < x.size() ? x[i] : b.constant(false);
    const Signal yi = i < y.size() ? y[i] : b.constant(false);
    const Signal t = b.make_xor(xi, yi);
    out.push_back(b.make_xor(t, carry));
    carry = b.make_or(b.make_and(xi, yi), b.make_and(t, carry));
  }
  return out;
}

struct Contender {
  std::vector<Signal> value;
  std::vector<Signal> onehot;
};

Contender merge(NetlistBuilder& b, const Contender& left, const Contender& right) {
  const Signal sel = emit_greater_equal(b, left.value, right.value);
  Contender out;
  const std::size_t width = std::max(left.value.size(), right.value.size());
  for (std::size_t i = 0; i < width; ++i) {
    const Signal l = i < left.value.size() ? left.value[i] : b.constant(false);
    const Signal r = i < right.value.size() ? right.value[i] : b.constant(false);
    out.value.push_back(b.make_mux(sel, l, r));
  }
  const Signal not_sel = b.make_not(sel);
  for (Signal s : left.onehot) out.onehot.push_back(b.make_and(s, sel));
  for (Signal s : right.onehot) out.onehot.push_back(b.make_and(s, not_sel));
  return out;
}

}  // namespace

Netlist generate_netlist(const TnnModel& model, const TnnSelection& selection, const std::string& name) {
  const SlotRequirements req = neuron_requirements(model);
  if (selection.hidden.size() != req.hidden.size() || selection.output.size() != req.output.size()) {
    throw ValidationError(fmt::format("selection has {}+{} slots, model needs {}+{}", selection.hidden.size(),
                                      selection.output.size(), req.hidden.size(), req.output.size()));
  }
  NetlistBuilder b(model.input_count);
  std::vector<Signal> hidden(model.hidden_count);
  for (std::size_t k = 0; k < model.hidden_count; ++k) {
    const HiddenSlot& slot = req.hidden[k];
    const PccCircuit* chosen = selection.hidden[k];
    PccCircuit exact;
    if (!chosen) {
      exact = assemble_pcc(build_exact_pc(slot.n_pos()), build_exact_pc(slot.n_neg()));
      chosen = &exact;
    }
    if (chosen->n_pos != slot.n_pos() || chosen->n_neg != slot.n_neg()) {
      throw ValidationError(fmt::format("hidden slot {} needs PCC({}, {}), got PCC({}, {})", k, slot.n_pos(),
                                        slot.n_neg(), chosen->n_pos, chosen->n_neg));
    }
    std::vector<Signal> in;
    for (std::size_t i : slot.pos_features) in.push_back(b.input(i));
    for (std::size_t i : slot.neg_features) in.push_back(b.input(i));
    hidden[k] = b.instantiate(chosen->assembled, in).at(0);
  }

  const auto offsets = score_offsets(model);
  const bool any_offset = std::any_of(offsets.begin(), offsets.end(), [](std::int64_t d) { return d != 0; });
  std::vector<Contender> round;
  for (std::size_t c = 0; c < model.class_count; ++c) {
    const OutputSlot& slot = req.output[c];
    const Netlist* chosen = selection.output[c];
    Netlist exact;
    if (!chosen) {
      exact = build_exact_pc(slot.width());
      chosen = &exact;
    }
    if (chosen->input_count() != slot.width()) {
      throw ValidationError(fmt::format("output slot {} needs a {}-input PC, got {}", c, slot.width(),
                                        chosen->input_count()));
    }
    std::vector<Signal> in;
    for (std::size_t j = 0; j < slot.width(); ++j) {
      const Signal h = hidden[slot.hidden[j]];
      in.push_back(slot.inverted[j] ? b.make_not(h) : h);
    }
    Contender leaf;
    leaf.value = b.instantiate(*chosen, in);
    if (any_offset) {
      std::vector<Signal> doubled{b.constant(false)};
      doubled.insert(doubled.end(), leaf.value.begin(), leaf.value.end());
      std::vector<Signal> constant;
      for (std::int64_t d = offsets[c]; d > 0; d >>= 1) constant.push_back(b.constant((d & 1) != 0));
      leaf.value = constant.empty() ? doubled : emit_add(b, doubled, constant);
    }
    leaf.onehot = {b.constant(true)};
    round.push_back(std::move(leaf));
  }
  while (round.size() > 1) {
    std::vector<Contender> next;
    for (std::size_t i = 0; i + 1 < round.size(); i += 2) next.push_back(merge(b, round[i], round[i + 1]));
    if (round.size() % 2) next.push_back(std::move(round.back()));
    round = std::move(next);
  }
  return b.build(name, round.front().onehot);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> BinaryDataset::rows(Split s) const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) r.push_back(i);
  }
  return r;
}

BitMatrix BinaryDataset::feature_matrix(Split s) const {
  const auto idx = rows(s);
  BitMatrix m(feature_count(), idx.size());
  for (std::size_t lane = 0; lane < idx.size(); ++lane) {
    for (std::size_t f = 0; f < feature_count(); ++f) {
      if (samples[idx[lane]][f]) m.set(f, lane, true);
    }
  }
  return m;
}

std::vector<std::size_t> BinaryDataset::split_labels(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i : rows(s)) out.push_back(labels[i]);
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BinaryDataset ingest_csv_text(const std::string& text, const IngestOptions& options) {
  if (!(options.split_fraction > 0.0 && options.split_fraction <= 1.0)) {
    throw ValidationError(fmt::format("split_fraction {} outside (0, 1]", options.split_fraction));
  }
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto row = split_csv_line(line);
    if (header.empty()) {
      header = std::move(row);
      continue;
    }
    if (row.size() != header.size()) {
      throw IoError(fmt::format("CSV line {} has {} fields, header has {}", line_no, row.size(), header.size()));
    }
    cells.push_back(std::move(row));
  }
  if (header.size() < 2) throw IoError("CSV needs a header with at least one feature and a label column");
  if (cells.empty()) throw IoError("CSV has no data rows");

  std::size_t label_col = header.size() - 1;
  if (!options.label_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), options.label_column);
    if (it == header.end()) throw ValidationError(fmt::format("label column '{}' not in CSV header", options.label_column));
    label_col = static_cast<std::size_t>(it - header.begin());
  }

  BinaryDataset d;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    feature_cols.push_back(c);
    d.feature_names.push_back(header[c]);
  }
  const std::size_t rows = cells.size();
  const std::size_t features = feature_cols.size();
  std::vector<std::vector<double>> raw(rows, std::vector<double>(features));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t f = 0; f < features; ++f) {
      const auto v = parse_number(cells[r][feature_cols[f]]);
      if (!v) {
        throw IoError(fmt::format("row {} column '{}': '{}' is not a number", r + 1, d.feature_names[f],
                                  cells[r][feature_cols[f]]));
      }
      raw[r][f] = *v;
    }
  }

  std::set<std::string> names;
  bool numeric = true;
  for (const auto& row : cells) {
    names.insert(row[label_col]);
    numeric = numeric && parse_number(row[label_col]).has_value();
  }
  if (names.size() < 2) throw ValidationError("dataset needs at least two classes");
  d.class_names.assign(names.begin(), names.end());
  if (numeric) {
    std::stable_sort(d.class_names.begin(), d.class_names.end(),
                     [](const std::string& a, const std::string& b) { return *parse_number(a) < *parse_number(b); });
  }
  std::map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < d.class_names.size(); ++i) class_index[d.class_names[i]] = i;
  for (const auto& row : cells) d.labels.push_back(class_index.at(row[label_col]));

  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.rng_seed);
  for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  const auto train_count = static_cast<std::size_t>(std::llround(options.split_fraction * static_cast<double>(rows)));
  if (train_count == 0) throw ValidationError("split leaves no training rows");
  d.split.assign(rows, Split::Test);
  for (std::size_t i = 0; i < train_count; ++i) d.split[order[i]] = Split::Train;
  const auto train_rows = d.rows(Split::Train);

  if (options.thresholds && options.thresholds->size() != features) {
    throw ValidationError(fmt::format("{} thresholds for {} features", options.thresholds->size(), features));
  }
  d.stats.resize(features);
  d.samples.assign(rows, std::vector<std::uint8_t>(features, 0));
  for (std::size_t f = 0; f < features; ++f) {
    FeatureStats& s = d.stats[f];
    std::vector<double> train;
    for (std::size_t r : train_rows) train.push_back(raw[r][f]);
    s.min = *std::min_element(train.begin(), train.end());
    s.max = *std::max_element(train.begin(), train.end());
    s.constant = s.max <= s.min;
    if (s.constant) {
      d.warnings.push_back(fmt::format("feature '{}' is constant on the train split; binarized to 0", d.feature_names[f]));
      continue;
    }
    const double span = s.max - s.min;
    for (auto& v : train) v = (v - s.min) / span;
    s.median = median_of(train);
    const double mean = std::accumulate(train.begin(), train.end(), 0.0) / static_cast<double>(train.size());
    double var = 0.0;
    for (double v : train) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(train.size()));
    s.skew = sd > 0.0 ? 3.0 * (mean - s.median) / sd : 0.0;
    s.threshold = options.thresholds ? (*options.thresholds)[f] : s.median;
    for (std::size_t r = 0; r < rows; ++r) {
      d.samples[r][f] = (raw[r][f] - s.min) / span >= s.threshold ? 1 : 0;
    }
  }
  return d;
}

BinaryDataset ingest(const std::filesystem::path& csv_path, const IngestOptions& options) {
  return ingest_csv_text(read_text_file(csv_path), options);
}

double accuracy(const TnnModel& model, const BinaryDataset& data, Split split) {
  if (data.feature_count() != model.input_count) {
    throw ValidationError(fmt::format("dataset has {} features, model expects {}", data.feature_count(), model.input_count));
  }
  const auto idx = data.rows(split);
  if (idx.empty()) throw ValidationError("accuracy over an empty split");
  std::size_t correct = 0;
  for (std::size_t r : idx) correct += infer_exact(model, data.samples[r]) == data.labels[r];
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

std::vector<std::size_t> predict(const Netlist& netlist, const BitMatrix& features) {
  const BitMatrix out = simulate(netlist, features);
  std::vector<std::size_t> pred(features.vector_count(), netlist.output_count());
  for (std::size_t c = out.rows(); c-- > 0;) {
    for (std::size_t lane = 0; lane < pred.size(); ++lane) {
      if (out.get(c, lane)) pred[lane] = c;
    }
  }
  return pred;
}

double accuracy(const Netlist& netlist, const BinaryDataset& data, Split split) {
  if (data.feature_count() != netlist.input_count()) {
    throw ValidationError(fmt::format("dataset has {} features, netlist expects {}", data.feature_count(),
                                      netlist.input_count()));
  }
  const auto labels = data.split_labels(split);
  if (labels.empty()) throw ValidationError("accuracy over an empty split");
  const auto pred = predict(netlist, data.feature_matrix(split));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += pred[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

TnnModel train_toy_model(const BinaryDataset& data, const ToyTrainConfig& config, const std::string& name) {
  const std::size_t inputs = data.feature_count();
  const std::size_t classes = data.class_names.size();
  if (config.hidden == 0) throw ValidationError("toy model needs at least one hidden neuron");
  if (config.zero_count > config.hidden) {
    throw ValidationError(fmt::format("zero_count {} exceeds hidden width {}", config.zero_count, config.hidden));
  }
  Rng rng(config.rng_seed);
  auto random_sign = [&] { return uniform_below(rng, 2) ? 1 : -1; };
  TnnModel m;
  m.name = name;
  m.input_count = inputs;
  m.hidden_count = config.hidden;
  m.class_count = classes;
  for (const auto& s : data.stats) m.thresholds.push_back(s.threshold);
  m.hidden_weights.assign(config.hidden, std::vector<int>(inputs, 0));
  for (auto& row : m.hidden_weights) {
    for (auto& w : row) w = bernoulli(rng, config.hidden_zero_probability) ? 0 : random_sign();
  }
  m.output_weights.assign(classes, std::vector<int>(config.hidden, 0));
  for (auto& row : m.output_weights) {
    std::vector<std::size_t> pos(config.hidden);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    for (std::size_t i = pos.size(); i > 1; --i) std::swap(pos[i - 1], pos[uniform_below(rng, i)]);
    for (std::size_t i = config.zero_count; i < config.hidden; ++i) row[pos[i]] = random_sign();
  }

  double best = accuracy(m, data, Split::Train);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    TnnModel trial = m;
    if (uniform_below(rng, 2) == 0) {
      int& w = trial.hidden_weights[uniform_below(rng, config.hidden)][uniform_below(rng, inputs)];
      w = static_cast<int>((w + 1 + 1 + uniform_below(rng, 2)) % 3) - 1;
    } else {
      auto& row = trial.output_weights[uniform_below(rng, classes)];
      const std::size_t a = uniform_below(rng, config.hidden);
      const std::size_t b = uniform_below(rng, config.hidden);
      if (row[a] != 0) {
        if ((row[b] == 0) != (row[a] == 0)) {
          std::swap(row[a], row[b]);
        } else {
          row[a] = -row[a];
        }
      }
    }
    const double acc = accuracy(trial, data, Split::Train);
    if (acc >= best) {
      best = acc;
      m = std::move(trial);
    }
  }
  return m;
}

}  // namespace forge
