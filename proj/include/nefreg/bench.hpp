#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nefreg/estimator.hpp"
#include "nefreg/families.hpp"
#include "nefreg/signals.hpp"

namespace nefreg {

// Replicated fits of normalized test signals.
//
// Replication r of every (signal, n) pair draws its data with
// mix_seed(seed, "<signal>/n=<n>", r). All variant/rule cells of that pair
// fit the same draws, so VST and rule comparisons are paired.
struct SimConfig {
  FamilyModel family = FamilyModel::poisson();
  std::vector<VstVariant> variants{VstVariant::mean_matching()};
  std::vector<ThresholdRule> rules{ThresholdRule::BlockJS};
  std::vector<Signal> signals{Signal::Doppler};
  std::vector<std::size_t> n_list{640};
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  // Mean-scale range for the normalized signals; family default when empty.
  std::optional<double> range_lo;
  std::optional<double> range_hi;
  // Minimum average count per bin that sets T for count families (successes
  // and failures each, for Binomial). Continuous families use n^(3/4).
  double min_count_per_bin = 5.0;
  std::optional<std::size_t> t_override;
  int j0 = kDefaultPrimaryLevel;
  // Worker threads; 0 means hardware concurrency. Results do not depend on it.
  unsigned threads = 0;

  void validate() const;
  std::pair<double, double> resolved_range() const;
};

// Default normalization range for a family: [0.1, 2] for count families,
// [0.5, 10] for Gamma means, [0.1 r, 0.9 r] for Binomial.
std::pair<double, double> default_signal_range(const FamilyModel& family);

struct SimCell {
  std::string label;  // "<signal>/n=<n>/<vst>/<rule>"
  Signal signal;
  std::size_t n;
  VstVariant variant;
  ThresholdRule rule;
  std::size_t t_count = 0;
  double mean_mse = 0.0;
  std::optional<double> std_error;  // empty when reps == 1 or on failure
  std::size_t reps = 0;
  std::uint64_t seed = 0;              // master seed
  std::vector<std::uint64_t> seeds;    // per-replication data seeds
  std::vector<double> mse;             // per replication
  double clamp_rate = 0.0;             // clamp events per estimated grid point
  double ms = 0.0;                     // wall time spent fitting this cell
  std::optional<std::string> error;    // first failure, tagged with replication
};

struct SimReport {
  SimConfig config;
  std::vector<SimCell> cells;  // signal-major, then n, variant, rule

  bool any_failed() const;
  const SimCell* find(std::string_view label) const;
};

std::string_view rule_name(ThresholdRule rule);
std::optional<ThresholdRule> parse_rule(std::string_view name);

// Number of bins the harness uses for a normalized signal at sample size n.
std::size_t simulation_bin_count(const SimConfig& cfg, const TestSignal& signal, std::size_t n);

// Data for one replication: Y_i ~ family(f(i / n)), i = 1..n.
std::vector<double> simulate_observations(const FamilyModel& family, const TestSignal& signal,
                                          std::size_t n, std::uint64_t seed);

SimReport run_simulation(const SimConfig& cfg);

// Recompute one cell on its own; equals the matching cell of the full run.
SimCell run_cell(const SimConfig& cfg, Signal signal, std::size_t n, const VstVariant& variant,
                 ThresholdRule rule);

struct McMoments {
  double mean;
  std::optional<double> variance;  // empty for a single draw
  std::size_t draws;
};

// Seeded Monte Carlo moments of H_m(X), X a sum of m draws with mean mu.
McMoments mc_transform_moments(const FamilyModel& family, const VstVariant& variant, double mu,
                               int m, std::size_t draws, std::uint64_t seed);

// Resolved configuration as one-line JSON (thread count excluded).
std::string config_json(const SimConfig& cfg);

// JSON: {"config": {...}, "cells": [{label, signal, n, vst, rule, t, mean_mse,
// stderr, r, seed, seeds, clamp_rate, ms, error}]}; non-finite numbers are
// null.
std::string report_json(const SimReport& report, bool include_timing = true);
// One row per cell with the same fields except seeds.
void write_report_csv(std::ostream& os, const SimReport& report, bool include_timing = true);

}  // namespace nefreg
