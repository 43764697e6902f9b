#include "nefreg/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nefreg/error.hpp"

namespace nefreg {

namespace {

// Symmlet 8 lowpass taps as published (Daubechies, "Ten Lectures on
// Wavelets"; identical to PyWavelets sym8 rec_lo and WaveLab's
// MakeONFilter('Symmlet', 8)), normalized to sum sqrt(2).
constexpr double kSymmlet8[16] = {
    0.0018899503327594609,  -0.0003029205147213668, -0.01495225833704823,
    0.003808752013890615,   0.049137179673607506,   -0.027219029917056003,
    -0.05194583810770904,   0.3644418948353314,     0.7771857517005235,
    0.4813596512583722,     -0.061273359067658524,  -0.1432942383508097,
    0.007607487324917605,   0.03169508781149298,    -0.0005421323317911481,
    -0.0033824159510061256,
};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
  int level = 0;
  while ((std::size_t{1} << level) < n) ++level;
  return level;
}

void analysis_step(std::span<const double> x, const WaveletFilter& f, std::vector<double>& approx,
                   std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  const auto h = f.lowpass();
  const auto g = f.highpass();
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double v = x[(2 * k + i) % n];
      a += h[i] * v;
      d += g[i] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail,
                                   const WaveletFilter& f) {
  const std::size_t half = approx.size();
  const std::size_t n = 2 * half;
  const auto h = f.lowpass();
  const auto g = f.highpass();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      out[(2 * k + i) % n] += approx[k] * h[i] + detail[k] * g[i];
    }
  }
  return out;
}

}  // namespace

WaveletFilter::WaveletFilter(std::string name, std::vector<double> lowpass)
    : name_(std::move(name)), lowpass_(std::move(lowpass)) {
  const std::size_t len = lowpass_.size();
  if (len < 2 || len % 2 != 0) {
    throw Error(ErrorKind::ConfigError, "filter " + name_ + " needs an even number of taps");
  }
  double sum = 0.0;
  for (double v : lowpass_) sum += v;
  if (std::abs(sum - std::numbers::sqrt2) > 1e-12) {
    throw Error(ErrorKind::ConfigError, "filter " + name_ + " taps must sum to sqrt(2)");
  }
  for (std::size_t shift = 0; shift < len; shift += 2) {
    double dot = 0.0;
    for (std::size_t k = 0; k + shift < len; ++k) dot += lowpass_[k] * lowpass_[k + shift];
    if (std::abs(dot - (shift == 0 ? 1.0 : 0.0)) > 1e-10) {
      throw Error(ErrorKind::ConfigError, "filter " + name_ + " is not orthonormal");
    }
  }
  highpass_.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    highpass_[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass_[len - 1 - k];
  }
}

WaveletFilter WaveletFilter::haar() {
  return WaveletFilter("haar", {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2});
}

WaveletFilter WaveletFilter::symmlet8() {
  return WaveletFilter("symmlet8", {std::begin(kSymmlet8), std::end(kSymmlet8)});
}

std::size_t WaveletCoeffs::size() const noexcept {
  std::size_t total = gross.size();
  for (const auto& d : details) total += d.size();
  return total;
}

std::vector<double> WaveletCoeffs::flatten() const {
  std::vector<double> out(gross);
  out.reserve(size());
  for (const auto& d : details) out.insert(out.end(), d.begin(), d.end());
  return out;
}

WaveletCoeffs dwt(std::span<const double> x, const WaveletFilter& filter, int j0) {
  if (j0 < 0 || j0 > 40) throw Error(ErrorKind::BadLength, "primary level out of range");
  const std::size_t n = x.size();
  if (!is_power_of_two(n) || n < (std::size_t{1} << (j0 + 1))) {
    throw Error(ErrorKind::BadLength, "input length " + std::to_string(n) +
                                          " is not a power of two >= 2^(j0+1)");
  }
  if ((std::size_t{1} << j0) < filter.length()) {
    throw Error(ErrorKind::FilterTooLongForLevel,
                "2^j0 = " + std::to_string(std::size_t{1} << j0) + " is shorter than " +
                    filter.name() + " (" + std::to_string(filter.length()) + " taps)");
  }

  WaveletCoeffs out;
  out.j0 = j0;
  out.top_level = log2_exact(n);
  out.details.resize(static_cast<std::size_t>(out.top_level - j0));

  std::vector<double> current(x.begin(), x.end());
  std::vector<double> approx;
  for (int level = out.top_level - 1; level >= j0; --level) {
    analysis_step(current, filter, approx, out.details[static_cast<std::size_t>(level - j0)]);
    current.swap(approx);
  }
  out.gross = std::move(current);
  return out;
}

std::vector<double> idwt(const WaveletCoeffs& coeffs, const WaveletFilter& filter) {
  const std::size_t base = std::size_t{1} << coeffs.j0;
  if (coeffs.j0 < 0 || coeffs.top_level <= coeffs.j0 || coeffs.gross.size() != base ||
      coeffs.details.size() != static_cast<std::size_t>(coeffs.top_level - coeffs.j0)) {
    throw Error(ErrorKind::BadShape, "malformed coefficient tree");
  }
  std::vector<double> current = coeffs.gross;
  for (std::size_t i = 0; i < coeffs.details.size(); ++i) {
    if (coeffs.details[i].size() != (base << i)) {
      throw Error(ErrorKind::BadShape, "detail level has the wrong size", i);
    }
    current = synthesis_step(current, coeffs.details[i], filter);
  }
  return current;
}

std::vector<CoeffBlock> block_partition(std::size_t level_size, std::size_t block_length) {
  std::vector<CoeffBlock> blocks;
  if (level_size == 0) return blocks;
  const std::size_t len = std::clamp<std::size_t>(block_length, 1, level_size);
  for (std::size_t start = 0; start < level_size; start += len) {
    CoeffBlock block;
    block.home_count = std::min(len, level_size - start);
    block.indices.reserve(len);
    for (std::size_t i = 0; i < len; ++i) block.indices.push_back((start + i) % level_size);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace nefreg
