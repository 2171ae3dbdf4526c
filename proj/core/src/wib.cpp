#include "gawno/wib.hpp"

namespace gawno {

namespace {

using Impl = std::shared_ptr<detail::TensorImpl>;

void require_rank3(const Tensor& x, const char* op) {
  if (x.rank() != 3) {
    throw ShapeError(std::string(op) + ": expected rank-3 tensor, got " + shape_str(x.shape()));
  }
}

}  // namespace

void WibConfig::validate() const {
  if (in_channels < 1 || out_channels < 1) {
    throw ConfigError("wib: channel counts must be positive");
  }
  decomposition.validate();
  WaveletFilter::get(wavelet);
}

std::int64_t WibConfig::band_length(std::int64_t n) const {
  return n >> decomposition.levels;
}

std::int64_t WibConfig::output_length(std::int64_t n) const {
  switch (mode) {
    case WibMode::kPlain:
      return n;
    case WibMode::kDownlift:
      return n >> decomposition.keep_from;
    case WibMode::kUplift:
      return 2 * n;
  }
  return n;
}

std::int64_t WibConfig::length_multiple() const {
  const int extra = mode == WibMode::kDownlift ? 1 : 0;
  return std::int64_t{1} << (decomposition.levels + extra);
}

Tensor kernel_multiply(const Tensor& wv, const Tensor& r) {
  require_rank3(wv, "kernel_multiply");
  if (r.rank() != 3 || r.dim(0) != wv.dim(1) || r.dim(2) != wv.dim(2)) {
    throw ShapeError("kernel_multiply: coefficients " + shape_str(wv.shape()) +
                     " incompatible with kernel " + shape_str(r.shape()));
  }
  const std::int64_t B = wv.dim(0), dv = wv.dim(1), k = wv.dim(2), dout = r.dim(1);
  Tensor out(Shape{B, dout, k});
  {
    const double* wp = wv.data().data();
    const double* rp = r.data().data();
    double* op = out.data().data();
    for (std::int64_t b = 0; b < B; ++b) {
      for (std::int64_t o = 0; o < dout; ++o) {
        double* row = op + (b * dout + o) * k;
        for (std::int64_t i = 0; i < dv; ++i) {
          const double* rrow = rp + (i * dout + o) * k;
          const double* wrow = wp + (b * dv + i) * k;
          for (std::int64_t t = 0; t < k; ++t) row[t] += rrow[t] * wrow[t];
        }
      }
    }
  }
  if (tracing({&wv, &r})) {
    out.set_requires_grad(true);
    Impl wi = wv.impl_ptr(), ri = r.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([wi, ri, oi, B, dv, k, dout] {
      if (oi->grad.empty()) return;
      const double* gy = oi->grad.data();
      if (wi->requires_grad) {
        double* gw = wi->grad_buffer().data();
        const double* rp = ri->value.data();
        for (std::int64_t b = 0; b < B; ++b) {
          for (std::int64_t o = 0; o < dout; ++o) {
            const double* grow = gy + (b * dout + o) * k;
            for (std::int64_t i = 0; i < dv; ++i) {
              const double* rrow = rp + (i * dout + o) * k;
              double* dst = gw + (b * dv + i) * k;
              for (std::int64_t t = 0; t < k; ++t) dst[t] += rrow[t] * grow[t];
            }
          }
        }
      }
      if (ri->requires_grad) {
        double* gr = ri->grad_buffer().data();
        const double* wp = wi->value.data();
        for (std::int64_t b = 0; b < B; ++b) {
          for (std::int64_t o = 0; o < dout; ++o) {
            const double* grow = gy + (b * dout + o) * k;
            for (std::int64_t i = 0; i < dv; ++i) {
              const double* wrow = wp + (b * dv + i) * k;
              double* dst = gr + (i * dout + o) * k;
              for (std::int64_t t = 0; t < k; ++t) dst[t] += wrow[t] * grow[t];
            }
          }
        }
      }
    });
  }
  return out;
}

Tensor avg_pairs(const Tensor& x) {
  require_rank3(x, "avg_pairs");
  if (x.dim(2) % 2 != 0) {
    throw ShapeError("avg_pairs: length " + std::to_string(x.dim(2)) + " is odd");
  }
  const std::int64_t rows = x.dim(0) * x.dim(1), n = x.dim(2), half = n / 2;
  Tensor out(Shape{x.dim(0), x.dim(1), half});
  const double* xp = x.data().data();
  double* op = out.data().data();
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t t = 0; t < half; ++t) {
      op[r * half + t] = 0.5 * (xp[r * n + 2 * t] + xp[r * n + 2 * t + 1]);
    }
  }
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi, rows, n, half] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      double* gx = xi->grad_buffer().data();
      for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t t = 0; t < half; ++t) {
          const double g = 0.5 * gy[r * half + t];
          gx[r * n + 2 * t] += g;
          gx[r * n + 2 * t + 1] += g;
        }
      }
    });
  }
  return out;
}

Tensor repeat2(const Tensor& x) {
  require_rank3(x, "repeat2");
  const std::int64_t rows = x.dim(0) * x.dim(1), n = x.dim(2), twice = 2 * n;
  Tensor out(Shape{x.dim(0), x.dim(1), twice});
  const double* xp = x.data().data();
  double* op = out.data().data();
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t t = 0; t < n; ++t) {
      op[r * twice + 2 * t] = xp[r * n + t];
      op[r * twice + 2 * t + 1] = xp[r * n + t];
    }
  }
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi, rows, n, twice] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      double* gx = xi->grad_buffer().data();
      for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t t = 0; t < n; ++t) {
          gx[r * n + t] += gy[r * twice + 2 * t] + gy[r * twice + 2 * t + 1];
        }
      }
    });
  }
  return out;
}

Tensor wib_forward(const Tensor& v, const WibConfig& cfg, const WibParams& params) {
  cfg.validate();
  require_rank3(v, "wib_forward");
  if (v.dim(1) != cfg.in_channels) {
    throw ShapeError("wib_forward: input " + shape_str(v.shape()) + " has " +
                     std::to_string(v.dim(1)) + " channels, config expects " +
                     std::to_string(cfg.in_channels));
  }
  const std::int64_t B = v.dim(0), n = v.dim(2);
  if (n % cfg.length_multiple() != 0) {
    throw ShapeError("wib_forward: length " + std::to_string(n) +
                     " not divisible by " + std::to_string(cfg.length_multiple()));
  }
  const std::int64_t band = cfg.band_length(n);
  const Shape want{cfg.in_channels, cfg.out_channels, band};
  if (params.kernel_approx.shape() != want || params.kernel_detail.shape() != want) {
    throw ShapeError("wib_forward: kernel shape " + shape_str(params.kernel_approx.shape()) +
                     " does not match expected " + shape_str(want));
  }

  const WaveletFilter& f = WaveletFilter::get(cfg.wavelet);
  const int m = cfg.decomposition.levels;
  const int h = cfg.decomposition.keep_from;
  const bool pass_through = cfg.in_channels == cfg.out_channels;

  WaveletCoeffs coeffs = wavedec(v, f, m);
  Tensor cur = kernel_multiply(coeffs.approx, params.kernel_approx);
  cur = idwt1(cur, kernel_multiply(coeffs.details[0], params.kernel_detail), f);

  // Finer bands (levels m-1 .. 1) carry no kernel; they survive only when the
  // channel counts agree, otherwise the block substitutes zeros.
  auto finer_band = [&](int j) -> Tensor {
    const Tensor& d = coeffs.details[static_cast<size_t>(j)];
    if (pass_through) return d;
    return Tensor(Shape{B, cfg.out_channels, d.dim(2)});
  };

  int reconstruct_to = 0;  // level the spectral path stops at
  switch (cfg.mode) {
    case WibMode::kPlain:
      reconstruct_to = 0;
      break;
    case WibMode::kDownlift:
      reconstruct_to = h;
      break;
    case WibMode::kUplift:
      reconstruct_to = 0;
      break;
  }
  for (int level = m - 1; level >= reconstruct_to + 1; --level) {
    cur = idwt1(cur, finer_band(m - level), f);
  }
  if (cfg.mode == WibMode::kUplift) {
    cur = idwt1(cur, Tensor(Shape{B, cfg.out_channels, n}), f);
  }

  Tensor residual = linear(v, params.conv_weight, params.conv_bias);
  if (cfg.mode == WibMode::kDownlift) {
    for (int j = 0; j < h; ++j) residual = avg_pairs(residual);
  } else if (cfg.mode == WibMode::kUplift) {
    residual = repeat2(residual);
  }

  Tensor out = add(cur, residual);
  return cfg.activation == Activation::kGelu ? gelu(out) : out;
}

}  // namespace gawno
