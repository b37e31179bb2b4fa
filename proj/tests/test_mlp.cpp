#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "ctms/error.hpp"
#include "ctms/mlp.hpp"
#include "ctms/scenario.hpp"
#include "test_support.hpp"

using namespace ctms;
using namespace ctms::testing;

namespace {

std::vector<Sample> random_samples(Rng& rng, int input_dim, int count) {
  std::vector<Sample> out(static_cast<std::size_t>(count));
  for (auto& s : out) {
    for (int i = 0; i < input_dim; ++i) s.features.push_back(rng.uniform());
    for (int o = 0; o < 4; ++o) s.target.push_back(rng.uniform());
  }
  return out;
}

/// Random record with a target that depends smoothly on the stretch, so a
/// model has something to learn.
DesignRecord synthetic_record(Rng& rng, int cells) {
  StretchRanges ranges;
  ranges.cells = cells;
  DesignRecord r;
  r.stretch = random_stretch(ranges, rng);
  double worst = 1e9;
  int where = 1;
  for (int i = 1; i <= cells - 2; ++i)
    if (r.stretch.cell(i + 2).capacity < worst) worst = r.stretch.cell(i + 2).capacity, where = i;
  r.target = {where, where + 2, 720.0 * (r.stretch.cell(1).capacity - 1500.0) / 1000.0,
              0.2 * (r.stretch.cell(2).jam_density - 70.0) / 30.0};
  return r;
}

}  // namespace

TEST_CASE("min-max scaling") {
  const auto s = MinMaxScaler::fit({{0.0, 5.0, 1.0}, {2.0, 5.0, 3.0}, {1.0, 5.0, 2.0}});
  CHECK(s.transform(std::vector<double>{0.0, 5.0, 1.0}) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(s.transform(std::vector<double>{2.0, 5.0, 3.0}) == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(s.degenerate_dims() == std::vector<std::size_t>{1});
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> x{rng.uniform(-3.0, 5.0), 5.0, rng.uniform(0.0, 9.0)};
    const auto back = s.inverse(s.transform(x));
    for (std::size_t d = 0; d < 3; ++d) CHECK(std::abs(back[d] - x[d]) <= 1e-12 * std::max(1.0, std::abs(x[d])));
  }
}

TEST_CASE("featurization") {
  const auto a2 = *builtin_scenario("a2");
  const auto raw = raw_features(a2.stretch, a2.fixed);
  REQUIRE(raw.size() == 6 * 15 + 3);
  CHECK(raw[0] == 0.65);
  CHECK(raw[90] == 0.95);
  CHECK(raw[91] == 1500.0);
  CHECK(raw[92] == 2.0);

  MinMaxScaler ranges{std::vector<double>(93, 0.0), std::vector<double>(93, 1.0)};
  for (std::size_t c = 0; c < 15; ++c) {
    const double lo[] = {0.3, 80.0, 10.0, 1500.0, 70.0, 0.0}, hi[] = {1.0, 110.0, 40.0, 2500.0, 100.0, 1.0};
    for (std::size_t f = 0; f < 6; ++f) ranges.min[6 * c + f] = lo[f], ranges.max[6 * c + f] = hi[f];
  }
  ranges.min[90] = 0.9, ranges.max[90] = 1.0;
  ranges.min[91] = 1000.0, ranges.max[91] = 2000.0;
  ranges.min[92] = 1.0, ranges.max[92] = 3.0;
  CHECK(featurize(a2.stretch, a2.fixed, ranges)[0] == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<CellParams> lows(15, {0.3, 80.0, 10.0, 1500.0, 70.0, 0.0});
  std::vector<CellParams> highs(15, {1.0, 110.0, 40.0, 2500.0, 100.0, 0.5});
  ranges.max[5] = 0.5;
  for (std::size_t c = 0; c < 15; ++c) ranges.max[6 * c + 5] = 0.5;
  for (double z : featurize(StretchParams(lows), {0.9, 1000.0, 1}, ranges)) CHECK(z == 0.0);
  for (double z : featurize(StretchParams(highs), {1.0, 2000.0, 3}, ranges)) CHECK(z == 1.0);

  const auto model = init_model(10, 8, 0.2, 1);
  CHECK_THROWS_AS(featurize(model, a2.stretch, a2.fixed), DomainError);
}

TEST_CASE("forward pass") {
  auto model = init_model(3, 7, 0.2, 9);
  const std::vector<double> x(static_cast<std::size_t>(model.input_dim), 0.5);
  SUBCASE("zero weights give the output bias") {
    std::fill(model.w1.begin(), model.w1.end(), 0.0);
    std::fill(model.w2.begin(), model.w2.end(), 0.0);
    model.b2 = {0.1, 0.2, 0.3, 0.4};
    CHECK(forward(model, x, false) == model.b2);
  }
  SUBCASE("inference is deterministic, training mode draws dropout") {
    CHECK(forward(model, x, false) == forward(model, x, false));
    Rng rng(1);
    bool differs = false;
    for (int k = 0; k < 20 && !differs; ++k) differs = forward(model, x, true, &rng) != forward(model, x, false);
    CHECK(differs);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(forward(model, std::vector<double>(3, 0.0), false), DomainError);
  }
}

TEST_CASE("mean squared logarithmic error") {
  const std::vector<double> a{0.1, 0.5, 0.9, 0.0}, b{0.3, 0.2, 0.8, 0.4};
  CHECK(msle_loss(a, a) == 0.0);
  CHECK(msle_loss(std::vector<double>{std::exp(1.0) - 1.0}, std::vector<double>{0.0}) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(msle_loss(a, b) == msle_loss(b, a));
  CHECK_THROWS_AS(msle_loss(std::vector<double>{-1.0}, std::vector<double>{0.0}), DomainError);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    auto model = init_model(2, 5, 0.0, rng.next());
    for (auto& b : model.b1) b = rng.uniform(-0.1, 0.1);
    for (auto& b : model.b2) b = 0.8 + rng.uniform(0.0, 0.2);  // keep predictions above 0
    const auto batch = random_samples(rng, model.input_dim, 6);
    Gradients g;
    loss_and_gradients(model, batch, g, false);
    const auto loss_at = [&](MLPModel& m) {
      Gradients unused;
      return loss_and_gradients(m, batch, unused, false);
    };
    const auto check_all = [&](std::vector<double>& weights, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < weights.size(); ++i) {
        const double saved = weights[i], h = 1e-6;
        weights[i] = saved + h;
        const double up = loss_at(model);
        weights[i] = saved - h;
        const double down = loss_at(model);
        weights[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        CHECK(std::abs(numeric - analytic[i]) <= 1e-5 * std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4}));
      }
    };
    check_all(model.w1, g.w1);
    check_all(model.b1, g.b1);
    check_all(model.w2, g.w2);
    check_all(model.b2, g.b2);
  }
}

TEST_CASE("training memorizes a constant corpus") {
  Rng rng(1);
  const auto record = synthetic_record(rng, 4);
  const std::vector<DesignRecord> corpus(80, record);
  TrainConfig config;
  config.batch_size = 16;
  config.epochs = 20;
  config.seed = 4;
  const auto result = train(corpus, config);
  CHECK(result.validation_loss.size() == 20);
  CHECK(result.validation_loss.back() <= 1e-6);
  CHECK_FALSE(result.warnings.empty());
}

TEST_CASE("training reduces the validation loss and is deterministic") {
  Rng rng(10);
  std::vector<DesignRecord> corpus;
  for (int k = 0; k < 400; ++k) corpus.push_back(synthetic_record(rng, 5));
  TrainConfig config;
  config.batch_size = 32;
  config.epochs = 60;
  config.seed = 8;
  const auto a = train(corpus, config);
  CHECK(a.validation_loss.back() < a.validation_loss.front());
  CHECK(a.validation_indices.size() == 80);
  CHECK(a.learning_rate[39] == 1e-3);
  CHECK(a.learning_rate[40] == 5e-4);
  const auto b = train(corpus, config);
  CHECK(a.model == b.model);
  CHECK(a.validation_loss == b.validation_loss);

  std::ostringstream csv;
  write_loss_csv(csv, a);
  CHECK(csv.str().rfind("epoch,train_loss,validation_loss,learning_rate\n1,", 0) == 0);

  const auto path = std::filesystem::temp_directory_path() / "ctms_test_model.json";
  save_model(a.model, path);
  CHECK(load_model(path) == a.model);
  std::filesystem::remove(path);
}

TEST_CASE("training preconditions") {
  Rng rng(1);
  std::vector<DesignRecord> corpus;
  for (int k = 0; k < 10; ++k) corpus.push_back(synthetic_record(rng, 4));
  TrainConfig config;
  CHECK_THROWS_AS(train(corpus, config), ConfigError);  // corpus smaller than a batch
  config.batch_size = 4;
  corpus.push_back(synthetic_record(rng, 5));
  CHECK_THROWS_AS(train(corpus, config), DomainError);  // mixed N
  config.epochs = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("prediction decodes and projects the network output") {
  auto model = init_model(15, 6, 0.2, 3);
  std::fill(model.w1.begin(), model.w1.end(), 0.0);
  std::fill(model.w2.begin(), model.w2.end(), 0.0);
  model.b2 = {4.4, 6.2, 95.3, 0.19};
  const auto a2 = *builtin_scenario("a2");
  CHECK(predict(model, a2.stretch, a2.fixed, a2.bounds) == StationDesign{4, 6, 95.3, 0.19});
  model.b2 = {40.0, -3.0, 1e5, -1.0};
  const auto clamped = predict(model, a2.stretch, a2.fixed, a2.bounds);
  CHECK(is_feasible(clamped, a2.bounds, a2.stretch));
  CHECK(clamped == StationDesign{13, 15, 720.0, 0.0});
}

TEST_CASE("model files are validated") {
  CHECK_THROWS_AS(model_from_json("{\"format\": \"other\"}"), ParseError);
  auto model = init_model(3, 4, 0.2, 1);
  auto text = model_to_json(model);
  CHECK(model_from_json(text) == model);
  model.w2.pop_back();
  CHECK_THROWS_AS(model_from_json(model_to_json(model)), ParseError);
}
