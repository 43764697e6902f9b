#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "nefreg/bench.hpp"
#include "nefreg/diagnostics.hpp"
#include "nefreg/error.hpp"
#include "nefreg/estimator.hpp"
#include "nefreg/format.hpp"

namespace nefreg::cli {

namespace {

using Json = nlohmann::ordered_json;

// Raised for flag values that parse but make no sense; maps to exit 2.
struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(std::string_view token) {
  const std::string t = trim(token);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

struct FamilyFlags {
  std::string name = "poisson";
  double r = 1.0;
  std::optional<double> sigma;
  double k = 1.0;

  void add_to(CLI::App* app) {
    app->add_option("--family", name,
                    "poisson, bernoulli, binomial, negbin, gamma, nefghs, gamma-poisson, "
                    "beta-binomial")
        ->capture_default_str();
    app->add_option("--r", r, "known shape / trial count")->capture_default_str();
    app->add_option("--sigma", sigma, "over-dispersion constant (gamma-poisson, beta-binomial)");
    app->add_option("--k", k, "beta-binomial concentration a + b")->capture_default_str();
  }

  FamilyModel resolve() const {
    auto int_r = [&] {
      if (r < 1.0 || r != std::floor(r)) throw FlagError("--r must be a positive integer");
      return static_cast<int>(r);
    };
    try {
      if (name == "poisson") return FamilyModel::poisson();
      if (name == "bernoulli") return FamilyModel::binomial(1);
      if (name == "binomial") return FamilyModel::binomial(int_r());
      if (name == "negbin") return FamilyModel::neg_binomial(r);
      if (name == "gamma") return FamilyModel::gamma(r);
      if (name == "nefghs") return FamilyModel::nef_ghs(r);
      if (name == "gamma-poisson") return FamilyModel::gamma_poisson(sigma.value_or(1.0));
      if (name == "beta-binomial") {
        return FamilyModel::beta_binomial(int_r(), k, sigma.value_or(0.0));
      }
    } catch (const Error& e) {
      throw FlagError(e.what());
    }
    throw FlagError("unknown family '" + name + "'");
  }
};

VstVariant parse_variant(const std::string& token) {
  if (token == "mm") return VstVariant::mean_matching();
  if (token == "bartlett") return VstVariant::bartlett();
  if (token == "anscombe") return VstVariant::anscombe();
  if (token == "general") return VstVariant::general_nef();
  if (token == "c0") return VstVariant::custom(0.0);
  if (token == "c14") return VstVariant::custom(0.25);
  if (token == "c38") return VstVariant::custom(0.375);
  if (token == "c12") return VstVariant::custom(0.5);
  if (token.rfind("c=", 0) == 0) {
    if (auto v = parse_double(std::string_view(token).substr(2))) return VstVariant::custom(*v);
  }
  throw FlagError("unknown VST variant '" + token + "'");
}

ThresholdRule parse_rule_flag(const std::string& token) {
  if (auto r = parse_rule(token)) return *r;
  throw FlagError("unknown thresholding rule '" + token + "'");
}

WaveletFilter parse_wavelet(const std::string& token) {
  if (token == "symmlet8") return WaveletFilter::symmlet8();
  if (token == "haar") return WaveletFilter::haar();
  throw FlagError("unknown wavelet '" + token + "'");
}

std::pair<double, double> parse_pair(const std::string& text, const char* flag) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw FlagError(std::string(flag) + " expects lo:hi");
  auto a = parse_double(parts[0]);
  auto b = parse_double(parts[1]);
  if (!a || !b) throw FlagError(std::string(flag) + " expects numbers");
  return {*a, *b};
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("NEFREG_THREADS")) {
    if (auto v = parse_double(env); v && *v >= 0.0) return static_cast<unsigned>(*v);
  }
  return 0;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path);
}

std::string config_line(const Json& cfg) { return "#config: " + cfg.dump() + "\n"; }

// ---- fit ----------------------------------------------------------------

struct FitFlags {
  FamilyFlags family;
  std::string input;
  std::string output = "-";
  std::string vst = "mm";
  std::string rule = "blockjs";
  std::string regime = "qvf";
  std::string wavelet = "symmlet8";
  std::string noise = "theory";
  int j0 = kDefaultPrimaryLevel;
  std::optional<std::size_t> bins;
  std::optional<double> target_per_bin;
  std::optional<std::size_t> block_length;
  double lambda = kLambdaStar;
  bool seedless = false;
};

int cmd_fit(const FitFlags& flags, std::ostream& out, std::ostream& err) {
  FitConfig cfg;
  try {
    cfg.family = flags.family.resolve();
    cfg.variant = parse_variant(flags.vst);
    cfg.rule = parse_rule_flag(flags.rule);
    if (flags.regime == "qvf") {
      cfg.regime = Regime::Qvf;
    } else if (flags.regime == "general") {
      cfg.regime = Regime::GeneralNef;
    } else {
      throw FlagError("unknown regime '" + flags.regime + "'");
    }
    cfg.filter = parse_wavelet(flags.wavelet);
    if (flags.noise == "theory") {
      cfg.noise = NoiseEstimate::Theoretical;
    } else if (flags.noise == "mad") {
      cfg.noise = NoiseEstimate::Robust;
    } else {
      throw FlagError("unknown noise estimate '" + flags.noise + "'");
    }
    cfg.j0 = flags.j0;
    cfg.t_override = flags.bins;
    cfg.target_per_bin = flags.target_per_bin;
    cfg.block_length = flags.block_length;
    cfg.lambda_star = flags.lambda;
    try {
      vst_constants(cfg.family, cfg.regime == Regime::GeneralNef ? VstVariant::general_nef()
                                                                  : cfg.variant);
    } catch (const Error& e) {
      throw FlagError(e.what());
    }
  } catch (const FlagError& e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }

  std::vector<double> y;
  try {
    y = read_observations(flags.input);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }

  const EstimateResult res = fit(y, cfg);

  Json header;
  header["command"] = "fit";
  header["input"] = flags.input;
  header["n"] = y.size();
  header["family"] = cfg.family.name();
  header["vst"] = res.variant.name();
  header["rule"] = std::string(rule_name(cfg.rule));
  header["regime"] = flags.regime;
  header["wavelet"] = cfg.filter.name();
  header["j0"] = cfg.j0;
  header["bins"] = res.binned.t_count;
  header["target_per_bin"] = cfg.target_per_bin ? Json(*cfg.target_per_bin) : Json(nullptr);
  header["lambda"] = cfg.lambda_star;
  header["block_length"] = res.block_length;
  header["noise"] = flags.noise;
  header["noise_variance"] = res.noise_variance;

  std::ostringstream os;
  os << config_line(header) << "t,f_hat,g_hat\n";
  for (std::size_t j = 0; j < res.grid.size(); ++j) {
    os << shortest(res.grid[j]) << ',' << shortest(res.f_hat[j]) << ',' << shortest(res.g_hat[j])
       << '\n';
  }
  if (flags.output == "-") {
    out << os.str();
  } else {
    write_file(flags.output, os.str());
  }
  err << "bins=" << res.binned.t_count << " n=" << y.size()
      << " clamp_events=" << res.clamp_events << "\n";
  return kOk;
}

// ---- simulate -----------------------------------------------------------

struct SimFlags {
  FamilyFlags family;
  std::string signals = "doppler";
  std::string n_list = "640";
  long long reps = 100;
  std::string vsts = "mm";
  std::string rules = "blockjs";
  std::uint64_t seed = 1;
  std::optional<unsigned> threads;
  std::optional<std::string> range;
  double min_count = 5.0;
  std::optional<std::size_t> bins;
  int j0 = kDefaultPrimaryLevel;
  std::string output = "simulation";
  bool no_timing = false;
};

SimConfig build_sim_config(const SimFlags& flags) {
  SimConfig cfg;
  cfg.family = flags.family.resolve();
  if (flags.reps < 1) throw FlagError("--reps must be at least 1");
  cfg.reps = static_cast<std::size_t>(flags.reps);
  cfg.seed = flags.seed;
  cfg.variants.clear();
  for (const auto& v : split(flags.vsts, ',')) cfg.variants.push_back(parse_variant(v));
  cfg.rules.clear();
  for (const auto& r : split(flags.rules, ',')) cfg.rules.push_back(parse_rule_flag(r));
  cfg.signals.clear();
  if (flags.signals == "all") {
    cfg.signals.assign(std::begin(kAllSignals), std::end(kAllSignals));
  } else {
    for (const auto& s : split(flags.signals, ',')) {
      auto sig = parse_signal(s);
      if (!sig) throw FlagError("unknown signal '" + s + "'");
      cfg.signals.push_back(*sig);
    }
  }
  cfg.n_list.clear();
  for (const auto& tok : split(flags.n_list, ',')) {
    auto v = parse_double(tok);
    if (!v || *v < 1.0 || *v != std::floor(*v)) throw FlagError("bad --n-list entry '" + tok + "'");
    cfg.n_list.push_back(static_cast<std::size_t>(*v));
  }
  if (flags.range) {
    const auto [lo, hi] = parse_pair(*flags.range, "--range");
    cfg.range_lo = lo;
    cfg.range_hi = hi;
  }
  cfg.min_count_per_bin = flags.min_count;
  cfg.t_override = flags.bins;
  cfg.j0 = flags.j0;
  cfg.threads = resolve_threads(flags.threads);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw FlagError(e.what());
  }
  return cfg;
}

int cmd_simulate(const SimFlags& flags, std::ostream& err) {
  SimConfig cfg;
  try {
    cfg = build_sim_config(flags);
  } catch (const FlagError& e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }
  const SimReport report = run_simulation(cfg);
  const bool timing = !flags.no_timing;
  write_file(flags.output + ".json", report_json(report, timing) + "\n");
  std::ostringstream csv;
  csv << "#config: " << config_json(cfg) << "\n";
  write_report_csv(csv, report, timing);
  write_file(flags.output + ".csv", csv.str());
  for (const auto& c : report.cells) {
    if (c.error) err << "cell " << c.label << " failed: " << *c.error << "\n";
  }
  err << report.cells.size() << " cells written to " << flags.output << ".{json,csv}\n";
  return report.any_failed() ? kCellFailure : kOk;
}

// ---- vst-diag -----------------------------------------------------------

struct DiagFlags {
  FamilyFlags family;
  std::optional<int> m;
  std::optional<std::string> m_range;
  std::string variants = "mm";
  std::optional<std::string> grid;
  double mu = 1.0;
  bool mc = false;
  std::size_t draws = 100000;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

struct Moments {
  double mean;
  double variance;
  double bound;
};

bool exact_supported(const FamilyModel& f) {
  const auto k = f.kind();
  return k == FamilyKind::Poisson || k == FamilyKind::Binomial ||
         k == FamilyKind::NegBinomial || k == FamilyKind::Gamma;
}

int cmd_vst_diag(const DiagFlags& flags, std::ostream& err) {
  FamilyModel family = FamilyModel::poisson();
  std::vector<std::pair<std::string, VstVariant>> variants;
  std::vector<double> grid;
  std::vector<int> m_values;
  try {
    family = flags.family.resolve();
    for (const auto& tok : split(flags.variants, ',')) {
      VstVariant v = parse_variant(tok);
      try {
        vst_constants(family, v);
      } catch (const Error& e) {
        throw FlagError(e.what());
      }
      variants.emplace_back(tok, v);
    }
    if (flags.m.has_value() == flags.m_range.has_value()) {
      throw FlagError("give exactly one of --m and --m-range");
    }
    if (flags.m) {
      if (*flags.m < 1) throw FlagError("--m must be positive");
      if (!flags.grid) throw FlagError("--m needs --grid lo:hi:steps");
      const auto parts = split(*flags.grid, ':');
      if (parts.size() != 3) throw FlagError("--grid expects lo:hi:steps");
      auto lo = parse_double(parts[0]);
      auto hi = parse_double(parts[1]);
      auto steps = parse_double(parts[2]);
      if (!lo || !hi || !steps || *steps < 1 || *steps != std::floor(*steps) ||
          (*steps > 1 && !(*lo < *hi))) {
        throw FlagError("bad --grid '" + *flags.grid + "'");
      }
      const auto count = static_cast<std::size_t>(*steps);
      for (std::size_t i = 0; i < count; ++i) {
        grid.push_back(count == 1 ? *lo
                                  : *lo + (*hi - *lo) * static_cast<double>(i) /
                                              static_cast<double>(count - 1));
      }
      for (double g : grid) {
        if (!family.mean_domain().contains_open(g)) {
          throw FlagError("grid point " + shortest(g) + " outside the mean domain");
        }
      }
      m_values.push_back(*flags.m);
    } else {
      const auto [a, b] = parse_pair(*flags.m_range, "--m-range");
      if (a < 1 || b < a || a != std::floor(a) || b != std::floor(b)) {
        throw FlagError("bad --m-range '" + *flags.m_range + "'");
      }
      for (int m = static_cast<int>(a); m <= static_cast<int>(b); ++m) m_values.push_back(m);
      if (!family.mean_domain().contains_open(flags.mu)) {
        throw FlagError("--mu outside the mean domain");
      }
    }
    if (flags.mc && flags.draws < 2) throw FlagError("--draws must be at least 2");
  } catch (const FlagError& e) {
    err << "error: " << e.what() << "\n";
    return kBadFlags;
  }

  const bool use_mc = !exact_supported(family);
  if (use_mc && !flags.mc) {
    err << "error: no exact moments for " << family.name() << "; pass --mc for Monte Carlo\n";
    return kNumericFailure;
  }

  auto moments = [&](const VstVariant& v, double mu, int m) -> Moments {
    if (!use_mc) {
      const TransformMoments t = exact_transform_moments(family, v, mu, m);
      return {t.mean, t.variance, t.truncation_bound};
    }
    const McMoments mc = mc_transform_moments(family, v, mu, m, flags.draws, flags.seed);
    return {mc.mean, mc.variance.value_or(std::nan("")), std::nan("")};
  };

  std::filesystem::create_directories(flags.out_dir);
  try {
    for (const auto& [token, variant] : variants) {
      Json header;
      header["command"] = "vst-diag";
      header["family"] = family.name();
      header["variant"] = variant.name();
      header["source"] = use_mc ? "monte_carlo" : "exact";
      if (use_mc) {
        header["draws"] = flags.draws;
        header["seed"] = flags.seed;
      }
      std::ostringstream os;
      std::string file;
      char buf[160];
      if (flags.m) {
        const int m = *flags.m;
        header["m"] = m;
        header["grid"] = *flags.grid;
        os << config_line(header) << "mu,scaled_bias,scaled_variance,truncation_bound\n";
        const double root_m = std::sqrt(static_cast<double>(m));
        for (double mu : grid) {
          const Moments mom = moments(variant, mu, m);
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", mu,
                        root_m * (mom.mean - g_apply(family, mu)), m * mom.variance, mom.bound);
          os << buf;
        }
        file = flags.family.name + "_" + token + "_m" + std::to_string(m) + ".csv";
      } else {
        header["m_range"] = *flags.m_range;
        header["mu"] = flags.mu;
        os << config_line(header) << "m,bias,variance,truncation_bound\n";
        const double target = g_apply(family, flags.mu);
        for (int m : m_values) {
          const Moments mom = moments(variant, flags.mu, m);
          std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", m, mom.mean - target,
                        mom.variance, mom.bound);
          os << buf;
        }
        file = flags.family.name + "_" + token + "_m" + std::to_string(m_values.front()) + "-" +
               std::to_string(m_values.back()) + ".csv";
      }
      write_file((std::filesystem::path(flags.out_dir) / file).string(), os.str());
      err << "wrote " << file << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
  return kOk;
}

}  // namespace

std::vector<double> read_observations(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (first) {
      first = false;
      if (!parse_double(fields.front())) continue;  // header row
    }
    if (fields.size() > 2) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 1 or 2 columns");
    }
    auto v = parse_double(fields.back());
    if (!v) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": not a number: '" +
                               fields.back() + "'");
    }
    values.push_back(*v);
  }
  if (is.bad()) throw std::runtime_error("error reading " + path);
  if (values.empty()) throw std::runtime_error(path + " holds no observations");
  return values;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonparametric regression in exponential families"};
  app.name("nefreg");
  app.require_subcommand(1);

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "estimate a mean function from observations");
  fit_flags.family.add_to(fit_cmd);
  fit_cmd->add_option("input", fit_flags.input, "CSV of observations")->required();
  fit_cmd->add_option("-o,--output", fit_flags.output, "estimate CSV ('-' for stdout)")
      ->capture_default_str();
  fit_cmd->add_option("--vst", fit_flags.vst, "mm, bartlett, anscombe, general, c0, c14, c38, "
                                              "c12 or c=<offset>")
      ->capture_default_str();
  fit_cmd->add_option("--rule", fit_flags.rule, "blockjs or neighcoeff")->capture_default_str();
  fit_cmd->add_option("--regime", fit_flags.regime, "qvf or general")->capture_default_str();
  fit_cmd->add_option("--wavelet", fit_flags.wavelet, "symmlet8 or haar")->capture_default_str();
  fit_cmd->add_option("--noise", fit_flags.noise, "theory (1/n) or mad")->capture_default_str();
  fit_cmd->add_option("--j0", fit_flags.j0, "primary resolution level")->capture_default_str();
  fit_cmd->add_option("--bins", fit_flags.bins, "explicit number of bins T");
  fit_cmd->add_option("--target-per-bin", fit_flags.target_per_bin,
                      "choose the largest T with n/T at least this");
  fit_cmd->add_option("--block-length", fit_flags.block_length, "BlockJS block length");
  fit_cmd->add_option("--lambda", fit_flags.lambda, "BlockJS threshold constant")
      ->capture_default_str();
  fit_cmd->add_flag("--seedless", fit_flags.seedless, "accepted for scripts; fit uses no RNG");

  SimFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "replicated fits of normalized test signals");
  sim_flags.family.add_to(sim_cmd);
  sim_cmd->add_option("--signals", sim_flags.signals, "comma list or 'all'")->capture_default_str();
  sim_cmd->add_option("--n-list", sim_flags.n_list, "comma list of sample sizes")
      ->capture_default_str();
  sim_cmd->add_option("--reps", sim_flags.reps, "replications per cell")->capture_default_str();
  sim_cmd->add_option("--vsts", sim_flags.vsts, "comma list of VST variants")->capture_default_str();
  sim_cmd->add_option("--rules", sim_flags.rules, "comma list of rules")->capture_default_str();
  sim_cmd->add_option("--seed", sim_flags.seed, "master seed")->capture_default_str();
  sim_cmd->add_option("--threads", sim_flags.threads, "worker threads (default NEFREG_THREADS "
                                                      "or all cores)");
  sim_cmd->add_option("--range", sim_flags.range, "signal range lo:hi on the mean scale");
  sim_cmd->add_option("--min-count", sim_flags.min_count, "average counts per bin")
      ->capture_default_str();
  sim_cmd->add_option("--bins", sim_flags.bins, "explicit number of bins T");
  sim_cmd->add_option("--j0", sim_flags.j0, "primary resolution level")->capture_default_str();
  sim_cmd->add_option("-o,--output", sim_flags.output, "output prefix for .json and .csv")
      ->capture_default_str();
  sim_cmd->add_flag("--no-timing", sim_flags.no_timing, "omit wall-time fields");

  DiagFlags diag_flags;
  auto* diag_cmd = app.add_subcommand("vst-diag", "exact bias and variance of VST variants");
  diag_flags.family.add_to(diag_cmd);
  diag_cmd->add_option("--m", diag_flags.m, "observations per bin");
  diag_cmd->add_option("--m-range", diag_flags.m_range, "a:b, per-m table at --mu");
  diag_cmd->add_option("--variants", diag_flags.variants, "comma list of variants")
      ->capture_default_str();
  diag_cmd->add_option("--grid", diag_flags.grid, "lo:hi:steps mean grid");
  diag_cmd->add_option("--mu", diag_flags.mu, "mean for --m-range")->capture_default_str();
  diag_cmd->add_flag("--mc", diag_flags.mc, "Monte Carlo fallback for families without exact moments");
  diag_cmd->add_option("--draws", diag_flags.draws, "Monte Carlo draws")->capture_default_str();
  diag_cmd->add_option("--seed", diag_flags.seed, "Monte Carlo seed")->capture_default_str();
  diag_cmd->add_option("--out-dir", diag_flags.out_dir, "directory for curve CSVs")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kBadFlags;
  }

  try {
    if (*fit_cmd) {
      const int code = cmd_fit(fit_flags, out, err);
      if (code == kBadFlags) err << fit_cmd->help();
      return code;
    }
    if (*sim_cmd) {
      const int code = cmd_simulate(sim_flags, err);
      if (code == kBadFlags) err << sim_cmd->help();
      return code;
    }
    const int code = cmd_vst_diag(diag_flags, err);
    if (code == kBadFlags) err << diag_cmd->help();
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.kind() == ErrorKind::SupportError) return kBadInput;
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
}

}  // namespace nefreg::cli
