#include "nefreg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "nefreg/error.hpp"
#include "nefreg/format.hpp"

namespace nefreg {

namespace {

using Json = nlohmann::ordered_json;

struct Combo {
  VstVariant variant;
  ThresholdRule rule;
};

// One (signal, n) pair: the data-generating side shared by its cells.
struct DataCell {
  Signal signal;
  std::size_t n;
  TestSignal truth_fn;
  std::size_t t_count;
  std::vector<double> truth;  // f(j / T), j = 1..T
  std::string label;
  std::optional<std::string> setup_error;
};

struct RepOutcome {
  double mse = std::numeric_limits<double>::quiet_NaN();
  std::size_t clamps = 0;
  double ms = 0.0;
  std::optional<std::string> error;
};

std::string data_label(Signal s, std::size_t n) {
  return std::string(signal_name(s)) + "/n=" + std::to_string(n);
}

bool counts_family(FamilyKind k) {
  return k == FamilyKind::Poisson || k == FamilyKind::NegBinomial ||
         k == FamilyKind::GammaPoisson;
}

DataCell make_data_cell(const SimConfig& cfg, Signal s, std::size_t n) {
  const auto [lo, hi] = cfg.resolved_range();
  TestSignal fn = normalize_signal(s, lo, hi);
  std::size_t t = 0;
  try {
    t = simulation_bin_count(cfg, fn, n);
  } catch (const Error& e) {
    return {s, n, fn, 0, {}, data_label(s, n), std::string(e.what())};
  }
  std::vector<double> truth(t);
  for (std::size_t j = 0; j < t; ++j) {
    truth[j] = fn(static_cast<double>(j + 1) / static_cast<double>(t));
  }
  return {s, n, fn, t, std::move(truth), data_label(s, n), std::nullopt};
}

FitConfig fit_config(const SimConfig& cfg, const DataCell& cell, const Combo& combo) {
  FitConfig fc;
  fc.family = cfg.family;
  fc.variant = combo.variant;
  fc.rule = combo.rule;
  fc.j0 = cfg.j0;
  fc.t_override = cell.t_count;
  return fc;
}

std::vector<RepOutcome> run_replication(const SimConfig& cfg, const DataCell& cell,
                                        std::size_t rep, std::span<const Combo> combos) {
  std::vector<RepOutcome> out(combos.size());
  if (cell.setup_error) {
    for (auto& o : out) o.error = *cell.setup_error;
    return out;
  }
  const std::uint64_t seed = mix_seed(cfg.seed, cell.label, rep);
  std::vector<double> y;
  try {
    y = simulate_observations(cfg.family, cell.truth_fn, cell.n, seed);
  } catch (const Error& e) {
    for (auto& o : out) o.error = "replication " + std::to_string(rep) + ": " + e.what();
    return out;
  }
  for (std::size_t c = 0; c < combos.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const EstimateResult res = fit(y, fit_config(cfg, cell, combos[c]));
      out[c].mse = evaluate_mse(res, cell.truth);
      out[c].clamps = res.clamp_events;
    } catch (const Error& e) {
      out[c].error = "replication " + std::to_string(rep) + ": " + e.what();
    }
    out[c].ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  }
  return out;
}

// results[rep] holds one outcome per combo.
SimCell reduce_cell(const SimConfig& cfg, const DataCell& cell, const Combo& combo,
                    std::size_t combo_index, const std::vector<std::vector<RepOutcome>>& results) {
  SimCell sc{data_label(cell.signal, cell.n) + "/" + combo.variant.name() + "/" +
                 std::string(rule_name(combo.rule)),
             cell.signal,
             cell.n,
             combo.variant,
             combo.rule,
             0, 0.0, std::nullopt, 0, 0, {}, {}, 0.0, 0.0, std::nullopt};
  sc.t_count = cell.t_count;
  sc.reps = cfg.reps;
  sc.seed = cfg.seed;
  std::size_t clamps = 0;
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    const RepOutcome& o = results[r][combo_index];
    sc.seeds.push_back(mix_seed(cfg.seed, cell.label, r));
    sc.mse.push_back(o.mse);
    sc.ms += o.ms;
    clamps += o.clamps;
    if (o.error && !sc.error) sc.error = o.error;
  }
  if (sc.error) {
    sc.mean_mse = std::numeric_limits<double>::quiet_NaN();
    return sc;
  }
  double sum = 0.0;
  for (double v : sc.mse) sum += v;
  const double reps = static_cast<double>(cfg.reps);
  sc.mean_mse = sum / reps;
  if (cfg.reps > 1) {
    double ss = 0.0;
    for (double v : sc.mse) ss += (v - sc.mean_mse) * (v - sc.mean_mse);
    sc.std_error = std::sqrt(ss / (reps - 1.0) / reps);
  }
  sc.clamp_rate = static_cast<double>(clamps) / (reps * static_cast<double>(cell.t_count));
  return sc;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) task(i);
  };
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json config_to_json(const SimConfig& cfg) {
  const auto [lo, hi] = cfg.resolved_range();
  Json j;
  j["family"] = cfg.family.name();
  Json variants = Json::array();
  for (const auto& v : cfg.variants) variants.push_back(v.name());
  j["vsts"] = variants;
  Json rules = Json::array();
  for (auto r : cfg.rules) rules.push_back(std::string(rule_name(r)));
  j["rules"] = rules;
  Json signals = Json::array();
  for (auto s : cfg.signals) signals.push_back(std::string(signal_name(s)));
  j["signals"] = signals;
  j["n_list"] = cfg.n_list;
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  j["range"] = {lo, hi};
  j["min_count_per_bin"] = cfg.min_count_per_bin;
  j["bins"] = cfg.t_override ? Json(*cfg.t_override) : Json(nullptr);
  j["j0"] = cfg.j0;
  j["wavelet"] = "symmlet8";
  return j;
}

}  // namespace

std::string_view rule_name(ThresholdRule rule) {
  return rule == ThresholdRule::BlockJS ? "blockjs" : "neighcoeff";
}

std::optional<ThresholdRule> parse_rule(std::string_view name) {
  if (name == "blockjs") return ThresholdRule::BlockJS;
  if (name == "neighcoeff") return ThresholdRule::NeighCoeff;
  return std::nullopt;
}

std::pair<double, double> default_signal_range(const FamilyModel& family) {
  switch (family.kind()) {
    case FamilyKind::Binomial: return {0.1 * family.r(), 0.9 * family.r()};
    case FamilyKind::BetaBinomial: return {0.1, 0.9};
    case FamilyKind::NefGhs: return {-5.0, 5.0};
    case FamilyKind::Gamma: return {0.5, 10.0};
    default: return {0.1, 2.0};
  }
}

void SimConfig::validate() const {
  if (reps < 1) throw Error(ErrorKind::ConfigError, "replications must be at least 1");
  if (variants.empty() || rules.empty() || signals.empty() || n_list.empty()) {
    throw Error(ErrorKind::ConfigError, "variants, rules, signals and n list must be nonempty");
  }
  if (!(min_count_per_bin > 0.0)) {
    throw Error(ErrorKind::ConfigError, "minimum count per bin must be positive");
  }
  if (family.kind() == FamilyKind::NefGhs) {
    throw Error(ErrorKind::UnsupportedSampling, "no sampler for NEF-GHS");
  }
  for (const auto& v : variants) vst_constants(family, v);
  const auto [lo, hi] = resolved_range();
  if (!(lo < hi)) throw Error(ErrorKind::BadRange, "signal range must satisfy lo < hi");
  const Interval dom = family.mean_domain();
  if (!dom.contains_open(lo) || !dom.contains_open(hi)) {
    throw Error(ErrorKind::BadRange, "signal range must lie inside the mean domain of " +
                                         family.name());
  }
  const std::size_t floor_n = std::size_t{1} << (j0 + 2);
  for (std::size_t n : n_list) {
    if (n < floor_n) {
      throw Error(ErrorKind::TooFewObservations,
                  "n = " + std::to_string(n) + " is below 2^(j0+2)");
    }
  }
}

std::pair<double, double> SimConfig::resolved_range() const {
  const auto def = default_signal_range(family);
  return {range_lo.value_or(def.first), range_hi.value_or(def.second)};
}

std::size_t simulation_bin_count(const SimConfig& cfg, const TestSignal& signal, std::size_t n) {
  if (cfg.t_override) return *cfg.t_override;
  double mean = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    mean += signal(static_cast<double>(i) / static_cast<double>(n));
  }
  mean /= static_cast<double>(n);

  std::optional<double> target;
  const FamilyKind kind = cfg.family.kind();
  const double r = cfg.family.r();
  if (counts_family(kind)) {
    target = cfg.min_count_per_bin / mean;
  } else if (kind == FamilyKind::Binomial) {
    target = cfg.min_count_per_bin / std::min(mean, r - mean);
  } else if (kind == FamilyKind::BetaBinomial) {
    target = cfg.min_count_per_bin / (r * std::min(mean, 1.0 - mean));
  }
  return select_bin_count(n, Regime::Qvf, target, cfg.j0);
}

std::vector<double> simulate_observations(const FamilyModel& family, const TestSignal& signal,
                                          std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1) / static_cast<double>(n);
    y[i] = sample(family, signal(t), rng);
  }
  return y;
}

SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();

  std::vector<Combo> combos;
  for (const auto& v : cfg.variants) {
    for (auto r : cfg.rules) combos.push_back({v, r});
  }
  std::vector<DataCell> cells;
  for (Signal s : cfg.signals) {
    for (std::size_t n : cfg.n_list) cells.push_back(make_data_cell(cfg, s, n));
  }

  // outcomes[cell][rep][combo]
  std::vector<std::vector<std::vector<RepOutcome>>> outcomes(
      cells.size(), std::vector<std::vector<RepOutcome>>(cfg.reps));
  parallel_for(cells.size() * cfg.reps, cfg.threads, [&](std::size_t task) {
    const std::size_t c = task / cfg.reps;
    const std::size_t r = task % cfg.reps;
    outcomes[c][r] = run_replication(cfg, cells[c], r, combos);
  });

  SimReport report{cfg, {}};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t k = 0; k < combos.size(); ++k) {
      report.cells.push_back(reduce_cell(cfg, cells[c], combos[k], k, outcomes[c]));
    }
  }
  return report;
}

SimCell run_cell(const SimConfig& cfg, Signal signal, std::size_t n, const VstVariant& variant,
                 ThresholdRule rule) {
  cfg.validate();
  const DataCell cell = make_data_cell(cfg, signal, n);
  const Combo combo{variant, rule};
  std::vector<std::vector<RepOutcome>> outcomes(cfg.reps);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    outcomes[r] = run_replication(cfg, cell, r, std::span<const Combo>(&combo, 1));
  });
  return reduce_cell(cfg, cell, combo, 0, outcomes);
}

bool SimReport::any_failed() const {
  return std::any_of(cells.begin(), cells.end(), [](const SimCell& c) { return c.error.has_value(); });
}

const SimCell* SimReport::find(std::string_view label) const {
  for (const auto& c : cells) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

McMoments mc_transform_moments(const FamilyModel& family, const VstVariant& variant, double mu,
                               int m, std::size_t draws, std::uint64_t seed) {
  if (draws < 1) throw Error(ErrorKind::ConfigError, "need at least one draw");
  if (family.kind() == FamilyKind::NefGhs) {
    throw Error(ErrorKind::UnsupportedSampling, "no sampler for NEF-GHS");
  }
  RandomStream rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double h = hm_transform(family, variant, sample_sum(family, mu, m, rng), m);
    const double delta = h - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (h - mean);
  }
  McMoments out{mean, std::nullopt, draws};
  if (draws > 1) out.variance = m2 / static_cast<double>(draws - 1);
  return out;
}

std::string report_json(const SimReport& report, bool include_timing) {
  Json root;
  root["config"] = config_to_json(report.config);
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json j;
    j["label"] = c.label;
    j["signal"] = std::string(signal_name(c.signal));
    j["n"] = c.n;
    j["vst"] = c.variant.name();
    j["rule"] = std::string(rule_name(c.rule));
    j["t"] = c.t_count;
    j["mean_mse"] = number_or_null(c.mean_mse);
    j["stderr"] = c.std_error ? number_or_null(*c.std_error) : Json(nullptr);
    j["r"] = c.reps;
    j["seed"] = c.seed;
    j["seeds"] = c.seeds;
    j["clamp_rate"] = number_or_null(c.clamp_rate);
    if (include_timing) j["ms"] = c.ms;
    j["error"] = c.error ? Json(*c.error) : Json(nullptr);
    cells.push_back(std::move(j));
  }
  root["cells"] = std::move(cells);
  return root.dump(2);
}

void write_report_csv(std::ostream& os, const SimReport& report, bool include_timing) {
  os << "label,signal,n,vst,rule,t,mean_mse,stderr,r,seed,clamp_rate";
  if (include_timing) os << ",ms";
  os << ",error\n";
  for (const auto& c : report.cells) {
    os << c.label << ',' << signal_name(c.signal) << ',' << c.n << ',' << c.variant.name() << ','
       << rule_name(c.rule) << ',' << c.t_count << ','
       << (std::isfinite(c.mean_mse) ? shortest(c.mean_mse) : "") << ','
       << (c.std_error ? shortest(*c.std_error) : "") << ',' << c.reps << ',' << c.seed << ','
       << shortest(c.clamp_rate);
    if (include_timing) os << ',' << shortest(c.ms);
    os << ',';
    if (c.error) {
      std::string e = *c.error;
      std::replace(e.begin(), e.end(), '"', '\'');
      os << '"' << e << '"';
    }
    os << '\n';
  }
}

std::string config_json(const SimConfig& cfg) { return config_to_json(cfg).dump(); }

}  // namespace nefreg
