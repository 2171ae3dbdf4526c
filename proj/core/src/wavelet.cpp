#include "gawno/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gawno {

namespace {

// Daubechies analysis low-pass banks (dbN has 2N taps), normalized so the
// taps sum to sqrt(2). The registry derives dec_hi and the rec filters and
// verifies the filter-bank invariants before first use.
const std::map<std::string, std::vector<double>>& lowpass_table() {
  static const std::map<std::string, std::vector<double>> table = {
      {"db1", {0.7071067811865476, 0.7071067811865476}},
      {"db3",
       {0.03522629188570953, -0.08544127388202666, -0.13501102001025458,
        0.45987750211849154, 0.8068915093110925, 0.33267055295008263}},
      {"db6",
       {-0.0010773010853084796, 0.004777257510945511, 0.0005538422011614961,
        -0.03158203931748603, 0.027522865530305727, 0.09750160558732304,
        -0.12976686756726194, -0.22626469396543983, 0.31525035170919763,
        0.7511339080210954, 0.49462389039845306, 0.11154074335010947}},
      {"db8",
       {-0.00011747678412476953, 0.0006754494064505693, -0.00039174037337694705,
        -0.004870352993451574, 0.008746094047405777, 0.013981027917398282,
        -0.044088253930794755, -0.017369301001807547, 0.12874742662047847,
        0.0004724845739132828, -0.2840155429615469, -0.015829105256349306,
        0.5853546836542067, 0.6756307362972898, 0.31287159091429995,
        0.05441584224310401}},
  };
  return table;
}

WaveletFilter build_filter(const std::string& name, const std::vector<double>& lo) {
  WaveletFilter f;
  f.name = name;
  f.dec_lo = lo;
  const size_t L = lo.size();
  f.dec_hi.resize(L);
  for (size_t k = 0; k < L; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    f.dec_hi[k] = sign * lo[L - 1 - k];
  }
  f.rec_lo.assign(f.dec_lo.rbegin(), f.dec_lo.rend());
  f.rec_hi.assign(f.dec_hi.rbegin(), f.dec_hi.rend());
  f.validate();
  return f;
}

const std::map<std::string, WaveletFilter>& registry() {
  static const std::map<std::string, WaveletFilter> reg = [] {
    std::map<std::string, WaveletFilter> r;
    for (const auto& [name, lo] : lowpass_table()) r[name] = build_filter(name, lo);
    return r;
  }();
  return reg;
}

void require_even_length(const Tensor& x, const char* op) {
  if (x.rank() != 3) {
    throw ShapeError(std::string(op) + ": expected rank-3 tensor, got " + shape_str(x.shape()));
  }
  if (x.dim(2) % 2 != 0) {
    throw ShapeError(std::string(op) + ": length " + std::to_string(x.dim(2)) + " is odd");
  }
}

void require_divisible(std::int64_t n, int levels, const char* op) {
  const std::int64_t block = std::int64_t{1} << levels;
  if (levels < 1 || n % block != 0) {
    throw ShapeError(std::string(op) + ": length " + std::to_string(n) +
                     " not divisible by 2^" + std::to_string(levels));
  }
}

// Analysis bank applied to one row of length n, writing n/2 approx and
// detail coefficients. Shared by the forward dwt and the idwt adjoint.
void analysis_row(const double* x, std::int64_t n, const WaveletFilter& f,
                  double* approx, double* detail) {
  const int L = f.length();
  const std::int64_t half = n / 2;
  for (std::int64_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (int j = 0; j < L; ++j) {
      const double xv = x[(2 * k + j) % n];
      a += f.dec_lo[j] * xv;
      d += f.dec_hi[j] * xv;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// Synthesis bank (exact transpose of analysis_row): scatters one row of
// approx/detail coefficients into a length-n row, accumulating.
void synthesis_row_accum(const double* approx, const double* detail, std::int64_t half,
                         const WaveletFilter& f, double* x) {
  const int L = f.length();
  const std::int64_t n = 2 * half;
  for (std::int64_t k = 0; k < half; ++k) {
    const double a = approx[k];
    const double d = detail[k];
    for (int j = 0; j < L; ++j) {
      x[(2 * k + j) % n] += f.dec_lo[j] * a + f.dec_hi[j] * d;
    }
  }
}

using Impl = std::shared_ptr<detail::TensorImpl>;

}  // namespace

const WaveletFilter& WaveletFilter::get(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [k, v] : reg) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown wavelet '" + name + "' (supported: " + known + ")");
  }
  return it->second;
}

const std::vector<std::string>& WaveletFilter::supported() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, f] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

void WaveletFilter::validate() const {
  const size_t L = dec_lo.size();
  if (L == 0 || L % 2 != 0 || dec_hi.size() != L || rec_lo.size() != L || rec_hi.size() != L) {
    throw NumericError("wavelet '" + name + "': malformed filter bank");
  }
  double sum_lo = 0.0, sum_hi = 0.0, energy = 0.0;
  for (size_t k = 0; k < L; ++k) {
    sum_lo += dec_lo[k];
    sum_hi += dec_hi[k];
    energy += dec_lo[k] * dec_lo[k];
  }
  const double sqrt2 = std::sqrt(2.0);
  if (std::abs(sum_lo - sqrt2) > 1e-12) {
    throw NumericError("wavelet '" + name + "': sum(dec_lo) != sqrt(2)");
  }
  if (std::abs(sum_hi) > 1e-12) {
    throw NumericError("wavelet '" + name + "': sum(dec_hi) != 0");
  }
  if (std::abs(energy - 1.0) > 1e-12) {
    throw NumericError("wavelet '" + name + "': sum(dec_lo^2) != 1");
  }
  // Orthogonality across even shifts, needed for perfect reconstruction.
  for (size_t s = 2; s < L; s += 2) {
    double dot = 0.0;
    for (size_t k = 0; k + s < L; ++k) dot += dec_lo[k] * dec_lo[k + s];
    if (std::abs(dot) > 1e-12) {
      throw NumericError("wavelet '" + name + "': dec_lo not orthogonal at shift " +
                         std::to_string(s));
    }
  }
  for (size_t k = 0; k < L; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    if (std::abs(dec_hi[k] - sign * dec_lo[L - 1 - k]) > 1e-15 ||
        std::abs(rec_lo[k] - dec_lo[L - 1 - k]) > 1e-15 ||
        std::abs(rec_hi[k] - dec_hi[L - 1 - k]) > 1e-15) {
      throw NumericError("wavelet '" + name + "': QMF / reversal relation violated");
    }
  }
}

void DecompositionConfig::validate() const {
  if (levels < 1) throw ConfigError("decomposition levels must be >= 1, got " + std::to_string(levels));
  if (keep_from < 0 || keep_from >= levels) {
    throw ConfigError("keep_from must satisfy 0 <= keep_from < levels, got keep_from=" +
                      std::to_string(keep_from) + " levels=" + std::to_string(levels));
  }
}

std::pair<Tensor, Tensor> dwt1(const Tensor& x, const WaveletFilter& f) {
  require_even_length(x, "dwt1");
  const std::int64_t B = x.dim(0), C = x.dim(1), n = x.dim(2), half = n / 2;
  Tensor approx(Shape{B, C, half});
  Tensor detail_t(Shape{B, C, half});
  {
    const double* xp = x.data().data();
    double* ap = approx.data().data();
    double* dp = detail_t.data().data();
    for (std::int64_t r = 0; r < B * C; ++r) {
      analysis_row(xp + r * n, n, f, ap + r * half, dp + r * half);
    }
  }
  if (tracing({&x})) {
    approx.set_requires_grad(true);
    detail_t.set_requires_grad(true);
    Impl xi = x.impl_ptr(), ai = approx.impl_ptr(), di = detail_t.impl_ptr();
    Graph::active()->record([xi, ai, di, f, B, C, n, half] {
      if (!xi->requires_grad) return;
      const bool has_a = !ai->grad.empty(), has_d = !di->grad.empty();
      if (!has_a && !has_d) return;
      std::vector<double> zero(static_cast<size_t>(half), 0.0);
      double* gx = xi->grad_buffer().data();
      for (std::int64_t r = 0; r < B * C; ++r) {
        const double* ga = has_a ? ai->grad.data() + r * half : zero.data();
        const double* gd = has_d ? di->grad.data() + r * half : zero.data();
        synthesis_row_accum(ga, gd, half, f, gx + r * n);
      }
    });
  }
  return {approx, detail_t};
}

Tensor idwt1(const Tensor& approx, const Tensor& detail_t, const WaveletFilter& f) {
  if (approx.rank() != 3 || approx.shape() != detail_t.shape()) {
    throw ShapeError("idwt1: approx " + shape_str(approx.shape()) + " and detail " +
                     shape_str(detail_t.shape()) + " must be equal rank-3 shapes");
  }
  const std::int64_t B = approx.dim(0), C = approx.dim(1), half = approx.dim(2), n = 2 * half;
  Tensor out(Shape{B, C, n});
  {
    const double* ap = approx.data().data();
    const double* dp = detail_t.data().data();
    double* xp = out.data().data();
    for (std::int64_t r = 0; r < B * C; ++r) {
      synthesis_row_accum(ap + r * half, dp + r * half, half, f, xp + r * n);
    }
  }
  if (tracing({&approx, &detail_t})) {
    out.set_requires_grad(true);
    Impl ai = approx.impl_ptr(), di = detail_t.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([ai, di, oi, f, B, C, n, half] {
      if (oi->grad.empty()) return;
      const double* gy = oi->grad.data();
      std::vector<double> ga(static_cast<size_t>(half)), gd(static_cast<size_t>(half));
      for (std::int64_t r = 0; r < B * C; ++r) {
        analysis_row(gy + r * n, n, f, ga.data(), gd.data());
        if (ai->requires_grad) {
          double* dst = ai->grad_buffer().data() + r * half;
          for (std::int64_t k = 0; k < half; ++k) dst[k] += ga[k];
        }
        if (di->requires_grad) {
          double* dst = di->grad_buffer().data() + r * half;
          for (std::int64_t k = 0; k < half; ++k) dst[k] += gd[k];
        }
      }
    });
  }
  return out;
}

WaveletCoeffs wavedec(const Tensor& x, const WaveletFilter& f, int levels) {
  require_even_length(x, "wavedec");
  require_divisible(x.dim(2), levels, "wavedec");
  WaveletCoeffs coeffs;
  coeffs.details.resize(static_cast<size_t>(levels));
  Tensor current = x;
  for (int j = 1; j <= levels; ++j) {
    auto [a, d] = dwt1(current, f);
    coeffs.details[static_cast<size_t>(levels - j)] = d;
    current = a;
  }
  coeffs.approx = current;
  return coeffs;
}

Tensor waverec(const WaveletCoeffs& coeffs, const WaveletFilter& f) {
  if (!coeffs.approx.defined() || coeffs.details.empty()) {
    throw ShapeError("waverec: empty coefficient set");
  }
  Tensor current = coeffs.approx;
  for (const Tensor& d : coeffs.details) current = idwt1(current, d, f);
  return current;
}

Tensor downlift(const Tensor& x, const WaveletFilter& f, const DecompositionConfig& cfg) {
  cfg.validate();
  require_even_length(x, "downlift");
  require_divisible(x.dim(2), cfg.levels, "downlift");
  WaveletCoeffs coeffs = wavedec(x, f, cfg.levels);
  Tensor current = coeffs.approx;
  // Bands at levels <= keep_from are dropped; details[j] sits at level m-j.
  for (int j = 0; j < cfg.levels - cfg.keep_from; ++j) {
    current = idwt1(current, coeffs.details[static_cast<size_t>(j)], f);
  }
  return current;
}

Tensor uplift(const Tensor& x, const WaveletFilter& f, const DecompositionConfig& cfg) {
  cfg.validate();
  require_even_length(x, "uplift");
  require_divisible(x.dim(2), cfg.levels, "uplift");
  WaveletCoeffs coeffs = wavedec(x, f, cfg.levels);
  Tensor current = waverec(coeffs, f);
  Tensor zero_detail(Shape{x.dim(0), x.dim(1), x.dim(2)});
  return idwt1(current, zero_detail, f);
}

}  // namespace gawno
