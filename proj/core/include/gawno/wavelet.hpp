#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gawno/tensor.hpp"

namespace gawno {

/// Orthonormal Daubechies filter bank. Coefficients are embedded constants;
/// the registry validates the orthonormality and quadrature-mirror invariants
/// the first time any filter is requested.
struct WaveletFilter {
  std::string name;
  std::vector<double> dec_lo;  // analysis low-pass, ascending index
  std::vector<double> dec_hi;  // dec_hi[k] = (-1)^k * dec_lo[L-1-k]
  std::vector<double> rec_lo;  // time-reversed dec_lo
  std::vector<double> rec_hi;  // time-reversed dec_hi

  int length() const { return static_cast<int>(dec_lo.size()); }

  /// Looks up one of {db1, db3, db6, db8}; unknown name -> ConfigError.
  static const WaveletFilter& get(const std::string& name);
  static const std::vector<std::string>& supported();

  /// Throws NumericError if any filter-bank invariant fails.
  void validate() const;
};

/// Depth and retention parameters of the lifting transforms. Bands at levels
/// strictly greater than keep_from survive downlifting.
struct DecompositionConfig {
  int levels = 2;     // m
  int keep_from = 1;  // h

  void validate() const;
};

/// Output of an m-level decomposition: details[0] is the coarsest band D_m,
/// details[m-1] the finest band D_1.
struct WaveletCoeffs {
  Tensor approx;                // (B, C, n/2^m)
  std::vector<Tensor> details;  // details[j] has length n/2^(m-j)

  int levels() const { return static_cast<int>(details.size()); }
};

/// Single-level periodized DWT along the length axis: circular correlation
/// with dec_lo / dec_hi keeping even-indexed outputs,
///   approx[k] = sum_j dec_lo[j] * x[(2k+j) mod n],
/// and likewise for detail with dec_hi. Differentiable; the adjoint is the
/// synthesis bank.
std::pair<Tensor, Tensor> dwt1(const Tensor& x, const WaveletFilter& f);

/// Exact inverse of dwt1 (the transpose of the analysis map, equivalently
/// upsampling plus circular convolution with the rec filters):
///   x[(2k+j) mod n] += rec_lo[L-1-j] * approx[k] + rec_hi[L-1-j] * detail[k].
Tensor idwt1(const Tensor& approx, const Tensor& detail, const WaveletFilter& f);

/// m recursive applications of dwt1 to the approximation band.
WaveletCoeffs wavedec(const Tensor& x, const WaveletFilter& f, int levels);

/// Exact inverse of wavedec.
Tensor waverec(const WaveletCoeffs& coeffs, const WaveletFilter& f);

/// Domain-halving transform: decompose cfg.levels deep, then reconstruct
/// using only the bands at levels > cfg.keep_from. Output length is
/// n / 2^keep_from (n/2 for the default keep_from = 1).
Tensor downlift(const Tensor& x, const WaveletFilter& f, const DecompositionConfig& cfg);

/// Domain-doubling transform: decompose cfg.levels deep, reconstruct all
/// levels plus one extra synthesis step with a zero detail band of length n.
/// Output length is 2n.
Tensor uplift(const Tensor& x, const WaveletFilter& f, const DecompositionConfig& cfg);

}  // namespace gawno
