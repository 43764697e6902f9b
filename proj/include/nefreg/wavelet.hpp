#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nefreg {

// Orthonormal two-channel filter bank. The highpass taps follow from the
// lowpass by g_k = (-1)^k h_{L-1-k}.
class WaveletFilter {
 public:
  WaveletFilter(std::string name, std::vector<double> lowpass);

  static WaveletFilter haar();
  // Daubechies' least-asymmetric filter with 8 vanishing moments (16 taps).
  static WaveletFilter symmlet8();

  const std::string& name() const noexcept { return name_; }
  std::span<const double> lowpass() const noexcept { return lowpass_; }
  std::span<const double> highpass() const noexcept { return highpass_; }
  std::size_t length() const noexcept { return lowpass_.size(); }

 private:
  std::string name_;
  std::vector<double> lowpass_;
  std::vector<double> highpass_;
};

// Periodized pyramid coefficients, coarsest first.
struct WaveletCoeffs {
  int j0 = 0;
  int top_level = 0;                         // J, with 2^J input samples
  std::vector<double> gross;                 // 2^j0 scaling coefficients
  std::vector<std::vector<double>> details;  // details[i] is level j0 + i, size 2^(j0+i)

  std::size_t size() const noexcept;
  std::vector<double> flatten() const;
};

// W x down to level j0. No 1/sqrt(T) scaling here.
// BadLength if x is not a power of two of length >= 2^(j0+1);
// FilterTooLongForLevel if 2^j0 is shorter than the filter.
WaveletCoeffs dwt(std::span<const double> x, const WaveletFilter& filter, int j0);

// Inverse of dwt. BadShape on a malformed tree.
std::vector<double> idwt(const WaveletCoeffs& coeffs, const WaveletFilter& filter);

struct CoeffBlock {
  std::vector<std::size_t> indices;  // zero-based positions within the level
  std::size_t home_count;            // leading entries this block estimates
};

// Contiguous blocks of length L within one level. L is clipped to the level
// size; if L does not divide the level, the final block wraps to the start of
// the level to reach length L, and those wrapped entries are not its home.
std::vector<CoeffBlock> block_partition(std::size_t level_size, std::size_t block_length);

}  // namespace nefreg
