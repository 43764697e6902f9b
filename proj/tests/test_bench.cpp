#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "nefreg/bench.hpp"
#include "nefreg/error.hpp"
#include "nefreg/random.hpp"

using namespace nefreg;

TEST_CASE("signal formulas") {
  CHECK(signal_eval(Signal::HeaviSine, 0.5) == doctest::Approx(-2.0));
  CHECK(signal_eval(Signal::Doppler, 0.0) == 0.0);
  CHECK(signal_eval(Signal::Doppler, 0.25) ==
        doctest::Approx(std::sqrt(0.1875) * std::sin(2.0 * 3.14159265358979323846 * 1.05 / 0.3)));
  CHECK(signal_eval(Signal::Blocks, 0.5) == signal_eval(Signal::Blocks, 0.6));
  CHECK(signal_eval(Signal::Blocks, 0.5) != signal_eval(Signal::Blocks, 0.7));
  CHECK(signal_eval(Signal::Bumps, 0.0) > 0.0);
  for (double t : {-0.1, 1.1}) {
    try {
      signal_eval(Signal::Doppler, t);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DomainError);
    }
  }
}

TEST_CASE("signal names round trip") {
  for (Signal s : kAllSignals) CHECK(parse_signal(signal_name(s)) == s);
  CHECK_FALSE(parse_signal("sine").has_value());
}

TEST_CASE("normalization hits the requested range") {
  for (Signal s : kAllSignals) {
    const auto f = normalize_signal(s, 0.1, 0.9);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < kReferenceGridSize; ++i) {
      const double v = f(static_cast<double>(i) / (kReferenceGridSize - 1));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(lo == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.9).epsilon(1e-12));
  }
  try {
    affine_normalization(2.0, 2.0, 0.0, 1.0);
    FAIL("expected BadRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadRange);
  }
  CHECK_THROWS_AS(normalize_signal(Signal::Doppler, 1.0, 0.5), Error);
  const auto m = affine_normalization(-1.0, 3.0, 0.0, 2.0);
  CHECK(m.scale == 0.5);
  CHECK(m.offset == 0.5);
}

TEST_CASE("default ranges") {
  CHECK(default_signal_range(FamilyModel::poisson()) == std::pair{0.1, 2.0});
  CHECK(default_signal_range(FamilyModel::binomial(1)) == std::pair{0.1, 0.9});
  CHECK(default_signal_range(FamilyModel::gamma(1.0)) == std::pair{0.5, 10.0});
}

TEST_CASE("seed mixing") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(mix_seed(1, "doppler/n=640", 0) != mix_seed(1, "doppler/n=640", 1));
  CHECK(mix_seed(1, "doppler/n=640", 0) != mix_seed(2, "doppler/n=640", 0));
  static_assert(mix_seed(1, "x", 2) == splitmix64(splitmix64(1 ^ fnv1a64("x")) + 2));
}

TEST_CASE("configuration errors") {
  SimConfig cfg;
  cfg.reps = 0;
  try {
    run_simulation(cfg);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
  }
  cfg.reps = 2;
  cfg.family = FamilyModel::gamma(1.0);
  cfg.variants = {VstVariant::anscombe()};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SimConfig{};
  cfg.range_lo = 1.0;
  cfg.range_hi = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SimConfig{};
  cfg.family = FamilyModel::binomial(1);
  cfg.range_hi = 1.2;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("bin counts used by the harness") {
  SimConfig cfg;
  const auto doppler = normalize_signal(Signal::Doppler, 0.1, 2.0);
  CHECK(simulation_bin_count(cfg, doppler, 640) == 128);
  CHECK(simulation_bin_count(cfg, doppler, 10240) == 2048);
  cfg.family = FamilyModel::binomial(1);
  const auto bern = normalize_signal(Signal::Doppler, 0.1, 0.9);
  double mean = 0.0;
  for (int i = 1; i <= 1280; ++i) mean += bern(i / 1280.0);
  mean /= 1280.0;
  const double target = 5.0 / std::min(mean, 1.0 - mean);
  const std::size_t t = simulation_bin_count(cfg, bern, 1280);
  CHECK(1280.0 / t >= target);
  CHECK(1280.0 / (2 * t) < target);
  cfg.t_override = 32;
  CHECK(simulation_bin_count(cfg, bern, 1280) == 32);
}

TEST_CASE("three-cell report") {
  SimConfig cfg;
  cfg.variants = {VstVariant::mean_matching(), VstVariant::anscombe(), VstVariant::bartlett()};
  cfg.reps = 10;
  const auto rep = run_simulation(cfg);
  REQUIRE(rep.cells.size() == 3);
  CHECK_FALSE(rep.any_failed());
  const SimCell* mm = rep.find("doppler/n=640/mm/blockjs");
  REQUIRE(mm != nullptr);
  CHECK(mm->reps == 10);
  CHECK(mm->seeds.size() == 10);
  CHECK(mm->seeds[3] == mix_seed(1, "doppler/n=640", 3));
  CHECK(mm->std_error.has_value());
  CHECK(mm->t_count == 128);
  CHECK(rep.find("doppler/n=640/anscombe/blockjs") != nullptr);
  CHECK(rep.find("nope") == nullptr);
  // Paired design: every variant sees the same data seeds.
  CHECK(rep.cells[1].seeds == mm->seeds);
}

TEST_CASE("cells reproduce in isolation and across thread counts") {
  SimConfig cfg;
  cfg.signals = {Signal::HeaviSine, Signal::Blocks};
  cfg.n_list = {640, 1280};
  cfg.rules = {ThresholdRule::BlockJS, ThresholdRule::NeighCoeff};
  cfg.reps = 6;
  cfg.threads = 1;
  const auto one = run_simulation(cfg);
  cfg.threads = 4;
  const auto four = run_simulation(cfg);
  REQUIRE(one.cells.size() == 8);
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    CHECK(one.cells[i].label == four.cells[i].label);
    CHECK(one.cells[i].mse == four.cells[i].mse);
  }
  const auto& target = one.cells[5];
  const auto solo = run_cell(cfg, target.signal, target.n, target.variant, target.rule);
  CHECK(solo.label == target.label);
  CHECK(solo.mse == target.mse);
  CHECK(solo.mean_mse == target.mean_mse);
  CHECK(report_json(one, false) == report_json(four, false));
}

TEST_CASE("single replication has no standard error") {
  SimConfig cfg;
  cfg.reps = 1;
  const auto rep = run_simulation(cfg);
  CHECK_FALSE(rep.cells[0].std_error.has_value());
}

TEST_CASE("failures are recorded per cell") {
  SimConfig cfg;
  cfg.n_list = {640, 2048};
  cfg.t_override = 1024;  // more bins than observations at n = 640
  cfg.reps = 2;
  const auto rep = run_simulation(cfg);
  CHECK(rep.any_failed());
  REQUIRE(rep.cells[0].error.has_value());
  CHECK(rep.cells[0].error->find("replication 0") != std::string::npos);
  CHECK(std::isnan(rep.cells[0].mean_mse));
  CHECK_FALSE(rep.cells[1].error.has_value());

  cfg.n_list = {32};
  try {
    run_simulation(cfg);
    FAIL("expected TooFewObservations");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewObservations);
  }
}

TEST_CASE("serialization") {
  SimConfig cfg;
  cfg.reps = 3;
  const auto rep = run_simulation(cfg);
  const auto j = nlohmann::json::parse(report_json(rep));
  REQUIRE(j.contains("config"));
  REQUIRE(j["cells"].size() == 1);
  const auto& c = j["cells"][0];
  for (const char* key :
       {"label", "mean_mse", "stderr", "r", "seed", "seeds", "clamp_rate", "ms", "error"}) {
    CHECK(c.contains(key));
  }
  CHECK(c["r"] == 3);
  CHECK_FALSE(nlohmann::json::parse(report_json(rep, false))["cells"][0].contains("ms"));
  const auto cj = nlohmann::json::parse(config_json(cfg));
  CHECK(cj["family"] == "poisson");
  CHECK_FALSE(cj.contains("threads"));

  std::ostringstream os;
  write_report_csv(os, rep);
  const std::string csv = os.str();
  CHECK(csv.rfind("label,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("monte carlo moments") {
  const auto fam = FamilyModel::poisson();
  const auto a = mc_transform_moments(fam, VstVariant::mean_matching(), 2.0, 5, 1000, 4);
  const auto b = mc_transform_moments(fam, VstVariant::mean_matching(), 2.0, 5, 1000, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  const auto one = mc_transform_moments(fam, VstVariant::mean_matching(), 2.0, 5, 1, 4);
  CHECK_FALSE(one.variance.has_value());
  CHECK_THROWS_AS(mc_transform_moments(FamilyModel::nef_ghs(1.0), VstVariant::mean_matching(),
                                       0.0, 5, 10, 1),
                  Error);
  CHECK_THROWS_AS(mc_transform_moments(fam, VstVariant::mean_matching(), 2.0, 5, 0, 1), Error);
}
