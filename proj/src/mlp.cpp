#include "ctms/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ctms/error.hpp"

namespace ctms {

// ---------------------------------------------------------------------------
// Scaling and features

MinMaxScaler MinMaxScaler::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DomainError("cannot fit a scaler on zero rows");
  MinMaxScaler s{rows.front(), rows.front()};
  for (const auto& row : rows) {
    if (row.size() != s.min.size())
      throw DomainError(fmt::format("scaler rows differ in size ({} vs {})", row.size(), s.min.size()));
    for (std::size_t d = 0; d < row.size(); ++d) {
      s.min[d] = std::min(s.min[d], row[d]);
      s.max[d] = std::max(s.max[d], row[d]);
    }
  }
  return s;
}

std::vector<std::size_t> MinMaxScaler::degenerate_dims() const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < size(); ++d)
    if (degenerate(d)) out.push_back(d);
  return out;
}

std::vector<double> MinMaxScaler::transform(std::span<const double> x) const {
  if (x.size() != size()) throw DomainError(fmt::format("expected {} values to scale, got {}", size(), x.size()));
  std::vector<double> z(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) z[d] = degenerate(d) ? 0.0 : (x[d] - min[d]) / (max[d] - min[d]);
  return z;
}

std::vector<double> MinMaxScaler::inverse(std::span<const double> z) const {
  if (z.size() != size()) throw DomainError(fmt::format("expected {} values to unscale, got {}", size(), z.size()));
  std::vector<double> x(z.size());
  for (std::size_t d = 0; d < z.size(); ++d) x[d] = degenerate(d) ? min[d] : min[d] + z[d] * (max[d] - min[d]);
  return x;
}

std::vector<double> raw_features(const StretchParams& stretch, const FixedParams& fixed) {
  std::vector<double> x;
  x.reserve(6 * stretch.size() + 3);
  for (const auto& c : stretch.cells()) {
    x.insert(x.end(), {c.length_km, c.free_flow_speed, c.wave_speed, c.capacity, c.jam_density, c.offramp_ratio});
  }
  x.insert(x.end(), {fixed.mainstream_priority, fixed.ramp_capacity, static_cast<double>(fixed.station_cell_span)});
  return x;
}

std::vector<double> raw_targets(const StationDesign& d) {
  return {static_cast<double>(d.access_cell), static_cast<double>(d.exit_cell), d.service_minutes, d.station_ratio};
}

std::vector<double> featurize(const StretchParams& stretch, const FixedParams& fixed, const MinMaxScaler& scaler) {
  if (scaler.size() != 6 * stretch.size() + 3)
    throw DomainError(fmt::format("scaler expects {} features but a {}-cell stretch gives {}", scaler.size(),
                                  stretch.size(), 6 * stretch.size() + 3));
  return scaler.transform(raw_features(stretch, fixed));
}

std::vector<double> featurize(const MLPModel& model, const StretchParams& stretch, const FixedParams& fixed) {
  if (static_cast<int>(stretch.size()) != model.cells)
    throw DomainError(fmt::format("model was trained for {}-cell stretches, got {} cells", model.cells,
                                  stretch.size()));
  return featurize(stretch, fixed, model.feature_scaler);
}

// ---------------------------------------------------------------------------
// Model

void MLPModel::validate() const {
  if (cells < 2) throw DomainError(fmt::format("model needs at least 2 cells, got {}", cells));
  if (input_dim != 6 * cells + 3)
    throw DomainError(fmt::format("model input_dim {} does not match {} cells", input_dim, cells));
  if (hidden_dim < 1 || output_dim != 4) throw DomainError("model needs hidden_dim >= 1 and output_dim 4");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw DomainError(fmt::format("dropout rate {} outside [0, 1)", dropout_rate));
  const auto h = static_cast<std::size_t>(hidden_dim), in = static_cast<std::size_t>(input_dim),
             out = static_cast<std::size_t>(output_dim);
  if (w1.size() != h * in || b1.size() != h || w2.size() != out * h || b2.size() != out)
    throw DomainError("model weight arrays do not match its dimensions");
  for (const auto* v : {&w1, &b1, &w2, &b2})
    for (double x : *v)
      if (!std::isfinite(x)) throw DomainError("model has a non-finite weight");
  if (feature_scaler.size() != in || feature_scaler.max.size() != in)
    throw DomainError("feature scaler does not match input_dim");
  if (target_scaler.size() != out || target_scaler.max.size() != out)
    throw DomainError("target scaler does not match output_dim");
}

MLPModel init_model(int cells, int hidden_dim, double dropout_rate, std::uint64_t seed) {
  MLPModel m;
  m.cells = cells;
  m.input_dim = 6 * cells + 3;
  m.hidden_dim = hidden_dim;
  m.dropout_rate = dropout_rate;
  const auto h = static_cast<std::size_t>(hidden_dim), in = static_cast<std::size_t>(m.input_dim), out = 4ul;
  Rng rng(seed);
  const double he = std::sqrt(6.0 / static_cast<double>(in));
  const double glorot = std::sqrt(6.0 / static_cast<double>(h + out));
  m.w1.resize(h * in);
  for (auto& w : m.w1) w = rng.uniform(-he, he);
  m.b1.assign(h, 0.0);
  m.w2.resize(out * h);
  for (auto& w : m.w2) w = rng.uniform(-glorot, glorot);
  m.b2.assign(out, 0.0);
  m.feature_scaler = {std::vector<double>(in, 0.0), std::vector<double>(in, 1.0)};
  m.target_scaler = {std::vector<double>(out, 0.0), std::vector<double>(out, 1.0)};
  m.validate();
  return m;
}

namespace {

struct Activations {
  std::vector<double> pre;     ///< W₁x + b₁
  std::vector<double> hidden;  ///< after ReLU and dropout
  std::vector<double> mask;    ///< 0 or 1/(1−rate); 1 without dropout
  std::vector<double> output;
};

void run_forward(const MLPModel& m, std::span<const double> x, Rng* rng, Activations& a) {
  if (static_cast<int>(x.size()) != m.input_dim)
    throw DomainError(fmt::format("expected {} features, got {}", m.input_dim, x.size()));
  const auto h = static_cast<std::size_t>(m.hidden_dim), in = x.size(), out = static_cast<std::size_t>(m.output_dim);
  a.pre.assign(h, 0.0);
  a.hidden.assign(h, 0.0);
  a.mask.assign(h, 1.0);
  a.output.assign(out, 0.0);
  const double keep = 1.0 - m.dropout_rate;
  for (std::size_t k = 0; k < h; ++k) {
    const double* row = &m.w1[k * in];
    double z = m.b1[k];
    for (std::size_t i = 0; i < in; ++i) z += row[i] * x[i];
    a.pre[k] = z;
    if (rng && m.dropout_rate > 0.0) a.mask[k] = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
    a.hidden[k] = std::max(z, 0.0) * a.mask[k];
  }
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = &m.w2[o * h];
    double y = m.b2[o];
    for (std::size_t k = 0; k < h; ++k) y += row[k] * a.hidden[k];
    a.output[o] = y;
  }
}

}  // namespace

std::vector<double> forward(const MLPModel& model, std::span<const double> features, bool training, Rng* rng) {
  if (training && !rng) throw DomainError("training-mode forward pass needs an rng for dropout");
  Activations a;
  run_forward(model, features, training ? rng : nullptr, a);
  return a.output;
}

double msle_loss(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size() || predicted.empty())
    throw DomainError(fmt::format("msle needs equal non-empty sizes, got {} and {}", predicted.size(), target.size()));
  double sum = 0.0;
  for (std::size_t d = 0; d < predicted.size(); ++d) {
    if (!(predicted[d] > -1.0) || !(target[d] > -1.0))
      throw DomainError(fmt::format("msle is undefined for values <= -1 (dimension {}: {}, {})", d, predicted[d],
                                    target[d]));
    const double e = std::log1p(predicted[d]) - std::log1p(target[d]);
    sum += e * e;
  }
  return sum / static_cast<double>(predicted.size());
}

double loss_and_gradients(const MLPModel& m, std::span<const Sample> batch, Gradients& g, bool clip_negative,
                          Rng* rng) {
  if (batch.empty()) throw DomainError("empty batch");
  const auto h = static_cast<std::size_t>(m.hidden_dim), in = static_cast<std::size_t>(m.input_dim),
             out = static_cast<std::size_t>(m.output_dim);
  g.w1.assign(h * in, 0.0);
  g.b1.assign(h, 0.0);
  g.w2.assign(out * h, 0.0);
  g.b2.assign(out, 0.0);
  const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(out));
  double total = 0.0;
  Activations a;
  std::vector<double> dy(out), dh(h);
  for (const auto& s : batch) {
    run_forward(m, s.features, rng, a);
    if (s.target.size() != out) throw DomainError(fmt::format("expected {} targets, got {}", out, s.target.size()));
    for (std::size_t o = 0; o < out; ++o) {
      double p = a.output[o];
      bool clipped = false;
      if (clip_negative && p < 0.0) {
        p = 0.0;
        clipped = true;
      }
      if (!(p > -1.0) || !(s.target[o] > -1.0))
        throw DomainError(fmt::format("msle is undefined for values <= -1 (output {}: {})", o, p));
      const double e = std::log1p(p) - std::log1p(s.target[o]);
      total += e * e;
      dy[o] = clipped ? 0.0 : 2.0 * e / (1.0 + p) * scale;
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      if (dy[o] == 0.0) continue;
      g.b2[o] += dy[o];
      double* grow = &g.w2[o * h];
      const double* wrow = &m.w2[o * h];
      for (std::size_t k = 0; k < h; ++k) {
        grow[k] += dy[o] * a.hidden[k];
        dh[k] += wrow[k] * dy[o];
      }
    }
    for (std::size_t k = 0; k < h; ++k) {
      const double d = a.pre[k] > 0.0 ? dh[k] * a.mask[k] : 0.0;
      if (d == 0.0) continue;
      g.b1[k] += d;
      double* grow = &g.w1[k * in];
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * s.features[i];
    }
  }
  return total * scale;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError(fmt::format("batch size {} must be >= 1", batch_size));
  if (epochs < 1) throw ConfigError(fmt::format("epochs {} must be >= 1", epochs));
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
    throw ConfigError("Adam moments must lie in [0, 1) and epsilon must be > 0");
  if (decay_every < 1 || !(decay_factor > 0.0 && decay_factor <= 1.0))
    throw ConfigError("learning-rate decay needs decay_every >= 1 and decay_factor in (0, 1]");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError(fmt::format("validation fraction {} outside [0, 1)", validation_fraction));
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate outside [0, 1)");
}

namespace {

struct Adam {
  std::vector<double> m, v;
  void step(std::vector<double>& w, const std::vector<double>& g, double lr, const TrainConfig& c, double bc1,
            double bc2) {
    if (m.empty()) m.assign(w.size(), 0.0), v.assign(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + c.epsilon);
    }
  }
};

double mean_loss(const MLPModel& m, const std::vector<Sample>& samples) {
  double sum = 0.0;
  for (const auto& s : samples) {
    auto p = forward(m, s.features, false);
    for (auto& v : p) v = std::max(v, 0.0);
    sum += msle_loss(p, s.target);
  }
  return sum / static_cast<double>(samples.size());
}

}  // namespace

TrainResult train(const std::vector<DesignRecord>& corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.size() <= static_cast<std::size_t>(config.batch_size))
    throw ConfigError(fmt::format("corpus of {} records must exceed the batch size {}", corpus.size(),
                                  config.batch_size));
  const auto cells = corpus.front().stretch.size();
  for (std::size_t r = 0; r < corpus.size(); ++r)
    if (corpus[r].stretch.size() != cells)
      throw DomainError(fmt::format("corpus record {} has {} cells, expected {}; train one model per N", r,
                                    corpus[r].stretch.size(), cells));

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(config.seed, 0));
  split_rng.shuffle(std::span<std::size_t>(order));
  auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(corpus.size())));
  if (config.validation_fraction > 0.0) n_val = std::max<std::size_t>(n_val, 1);
  n_val = std::min(n_val, corpus.size() - 1);

  TrainResult result;
  result.validation_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  std::vector<std::vector<double>> x_rows, t_rows;
  for (std::size_t i : train_idx) {
    x_rows.push_back(raw_features(corpus[i].stretch, corpus[i].fixed));
    t_rows.push_back(raw_targets(corpus[i].target));
  }
  MLPModel model = init_model(static_cast<int>(cells), config.hidden_dim, config.dropout_rate,
                              derive_seed(config.seed, 1));
  model.feature_scaler = MinMaxScaler::fit(x_rows);
  model.target_scaler = MinMaxScaler::fit(t_rows);
  for (std::size_t d : model.feature_scaler.degenerate_dims())
    result.warnings.push_back(fmt::format("feature {} is constant ({}); pinned to 0", d, model.feature_scaler.min[d]));
  for (std::size_t d : model.target_scaler.degenerate_dims())
    result.warnings.push_back(fmt::format("target {} is constant ({}); pinned to 0", d, model.target_scaler.min[d]));

  auto to_sample = [&](std::size_t i) {
    return Sample{model.feature_scaler.transform(raw_features(corpus[i].stretch, corpus[i].fixed)),
                  model.target_scaler.transform(raw_targets(corpus[i].target))};
  };
  std::vector<Sample> train_set, val_set;
  for (std::size_t i : train_idx) train_set.push_back(to_sample(i));
  for (std::size_t i : result.validation_indices) val_set.push_back(to_sample(i));

  Rng batch_rng(derive_seed(config.seed, 2));
  Rng dropout_rng(derive_seed(config.seed, 3));
  Adam a_w1, a_b1, a_w2, a_b2;
  Gradients g;
  std::vector<Sample> batch;
  std::size_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.learning_rate * std::pow(config.decay_factor, epoch / config.decay_every);
    batch_rng.shuffle(std::span<Sample>(train_set));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train_set.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const auto end = std::min(train_set.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const Sample> b(train_set.data() + start, end - start);
      loss_sum += loss_and_gradients(model, b, g, true, &dropout_rng);
      ++batches;
      ++t;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
      a_w1.step(model.w1, g.w1, lr, config, bc1, bc2);
      a_b1.step(model.b1, g.b1, lr, config, bc1, bc2);
      a_w2.step(model.w2, g.w2, lr, config, bc1, bc2);
      a_b2.step(model.b2, g.b2, lr, config, bc1, bc2);
    }
    result.train_loss.push_back(loss_sum / static_cast<double>(batches));
    result.validation_loss.push_back(val_set.empty() ? std::nan("") : mean_loss(model, val_set));
    result.learning_rate.push_back(lr);
  }
  model.validate();
  result.model = std::move(model);
  return result;
}

StationDesign predict(const MLPModel& model, const StretchParams& stretch, const FixedParams& fixed,
                      const DesignBounds& bounds) {
  const auto z = forward(model, featurize(model, stretch, fixed), false);
  const auto raw = model.target_scaler.inverse(z);
  return project({raw[0], raw[1], raw[2], raw[3]}, bounds, stretch);
}

// ---------------------------------------------------------------------------
// Persistence

std::string model_to_json(const MLPModel& m) {
  nlohmann::ordered_json doc;
  doc["format"] = "ctms-mlp";
  doc["version"] = 1;
  doc["cells"] = m.cells;
  doc["input_dim"] = m.input_dim;
  doc["hidden_dim"] = m.hidden_dim;
  doc["output_dim"] = m.output_dim;
  doc["dropout_rate"] = m.dropout_rate;
  doc["feature_scaler"] = {{"min", m.feature_scaler.min}, {"max", m.feature_scaler.max}};
  doc["target_scaler"] = {{"min", m.target_scaler.min}, {"max", m.target_scaler.max}};
  doc["w1"] = m.w1;
  doc["b1"] = m.b1;
  doc["w2"] = m.w2;
  doc["b2"] = m.b2;
  return doc.dump(1);
}

MLPModel model_from_json(const std::string& text) {
  MLPModel m;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "ctms-mlp") throw ParseError("not a ctms-mlp model file");
    if (doc.at("version").get<int>() != 1) throw ParseError("unsupported model version");
    m.cells = doc.at("cells").get<int>();
    m.input_dim = doc.at("input_dim").get<int>();
    m.hidden_dim = doc.at("hidden_dim").get<int>();
    m.output_dim = doc.at("output_dim").get<int>();
    m.dropout_rate = doc.at("dropout_rate").get<double>();
    m.feature_scaler = {doc.at("feature_scaler").at("min").get<std::vector<double>>(),
                        doc.at("feature_scaler").at("max").get<std::vector<double>>()};
    m.target_scaler = {doc.at("target_scaler").at("min").get<std::vector<double>>(),
                       doc.at("target_scaler").at("max").get<std::vector<double>>()};
    m.w1 = doc.at("w1").get<std::vector<double>>();
    m.b1 = doc.at("b1").get<std::vector<double>>();
    m.w2 = doc.at("w2").get<std::vector<double>>();
    m.b2 = doc.at("b2").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model file: {}", e.what()));
  }
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw ParseError(fmt::format("model file: {}", e.what()));
  }
  return m;
}

void save_model(const MLPModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("{}: cannot write model file", path.string()));
  out << model_to_json(model) << '\n';
}

MLPModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("{}: cannot open model file", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

void write_loss_csv(std::ostream& out, const TrainResult& r) {
  out << "epoch,train_loss,validation_loss,learning_rate\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e)
    out << fmt::format("{},{},{},{}\n", e + 1, r.train_loss[e], r.validation_loss[e], r.learning_rate[e]);
}

}  // namespace ctms
