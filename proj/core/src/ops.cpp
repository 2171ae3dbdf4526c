#include "gawno/ops.hpp"

#include <cmath>
#include <cstdint>

namespace gawno {

namespace {

constexpr double kBceEps = 1e-7;
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()) + " differ");
  }
}

void require_rank3(const Tensor& x, const char* op) {
  if (x.rank() != 3) {
    throw ShapeError(std::string(op) + ": expected rank-3 tensor, got " +
                     shape_str(x.shape()));
  }
}

using Impl = std::shared_ptr<detail::TensorImpl>;

}  // namespace

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank3(x, "linear");
  if (w.rank() != 2 || b.rank() != 1 || w.dim(1) != x.dim(1) || b.dim(0) != w.dim(0)) {
    throw ShapeError("linear: incompatible shapes x" + shape_str(x.shape()) +
                     " w" + shape_str(w.shape()) + " b" + shape_str(b.shape()));
  }
  const std::int64_t B = x.dim(0), F = x.dim(1), n = x.dim(2), C = w.dim(0);
  Tensor out(Shape{B, C, n});
  {
    const double* xp = x.data().data();
    const double* wp = w.data().data();
    const double* bp = b.data().data();
    double* op = out.data().data();
    for (std::int64_t i = 0; i < B; ++i) {
      for (std::int64_t c = 0; c < C; ++c) {
        double* row = op + (i * C + c) * n;
        for (std::int64_t t = 0; t < n; ++t) row[t] = bp[c];
        for (std::int64_t f = 0; f < F; ++f) {
          const double wcf = wp[c * F + f];
          if (wcf == 0.0) continue;
          const double* xrow = xp + (i * F + f) * n;
          for (std::int64_t t = 0; t < n; ++t) row[t] += wcf * xrow[t];
        }
      }
    }
  }
  if (tracing({&x, &w, &b})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), wi = w.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, wi, bi, oi, B, F, n, C] {
      if (oi->grad.empty()) return;
      const double* gy = oi->grad.data();
      if (xi->requires_grad) {
        double* gx = xi->grad_buffer().data();
        const double* wp = wi->value.data();
        for (std::int64_t i = 0; i < B; ++i) {
          for (std::int64_t c = 0; c < C; ++c) {
            const double* grow = gy + (i * C + c) * n;
            for (std::int64_t f = 0; f < F; ++f) {
              const double wcf = wp[c * F + f];
              if (wcf == 0.0) continue;
              double* gxrow = gx + (i * F + f) * n;
              for (std::int64_t t = 0; t < n; ++t) gxrow[t] += wcf * grow[t];
            }
          }
        }
      }
      if (wi->requires_grad) {
        double* gw = wi->grad_buffer().data();
        const double* xp = xi->value.data();
        for (std::int64_t i = 0; i < B; ++i) {
          for (std::int64_t c = 0; c < C; ++c) {
            const double* grow = gy + (i * C + c) * n;
            for (std::int64_t f = 0; f < F; ++f) {
              const double* xrow = xp + (i * F + f) * n;
              double acc = 0.0;
              for (std::int64_t t = 0; t < n; ++t) acc += grow[t] * xrow[t];
              gw[c * F + f] += acc;
            }
          }
        }
      }
      if (bi->requires_grad) {
        double* gb = bi->grad_buffer().data();
        for (std::int64_t i = 0; i < B; ++i) {
          for (std::int64_t c = 0; c < C; ++c) {
            const double* grow = gy + (i * C + c) * n;
            double acc = 0.0;
            for (std::int64_t t = 0; t < n; ++t) acc += grow[t];
            gb[c] += acc;
          }
        }
      }
    });
  }
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out(x.shape());
  const auto xv = x.data();
  auto ov = out.data();
  for (std::int64_t i = 0; i < x.size(); ++i) {
    ov[i] = xv[i] * norm_cdf(xv[i]);
  }
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      const double* xv = xi->value.data();
      double* gx = xi->grad_buffer().data();
      for (size_t i = 0; i < xi->value.size(); ++i) {
        gx[i] += gy[i] * (norm_cdf(xv[i]) + xv[i] * norm_pdf(xv[i]));
      }
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.shape());
  const auto xv = x.data();
  auto ov = out.data();
  for (std::int64_t i = 0; i < x.size(); ++i) ov[i] = logistic(xv[i]);
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      const double* s = oi->value.data();
      double* gx = xi->grad_buffer().data();
      for (size_t i = 0; i < xi->value.size(); ++i) {
        gx[i] += gy[i] * s[i] * (1.0 - s[i]);
      }
    });
  }
  return out;
}

Tensor bce_loss(const Tensor& p, const Tensor& target) {
  require_same_shape(p, target, "bce_loss");
  const std::int64_t N = p.size();
  const auto pv = p.data();
  const auto tv = target.data();
  double acc = 0.0;
  for (std::int64_t i = 0; i < N; ++i) {
    const double q = std::clamp(pv[i], kBceEps, 1.0 - kBceEps);
    acc -= tv[i] * std::log(q) + (1.0 - tv[i]) * std::log(1.0 - q);
  }
  Tensor out = Tensor::scalar(acc / static_cast<double>(N));
  if (tracing({&p})) {
    out.set_requires_grad(true);
    Impl pi = p.impl_ptr(), ti = target.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([pi, ti, oi, N] {
      if (oi->grad.empty() || !pi->requires_grad) return;
      const double g = oi->grad[0] / static_cast<double>(N);
      const double* pv = pi->value.data();
      const double* tv = ti->value.data();
      double* gp = pi->grad_buffer().data();
      for (std::int64_t i = 0; i < N; ++i) {
        const double q = std::clamp(pv[i], kBceEps, 1.0 - kBceEps);
        gp[i] += g * (q - tv[i]) / (q * (1.0 - q));
      }
    });
  }
  return out;
}

Tensor bce_logits_loss(const Tensor& logits, const Tensor& target) {
  require_same_shape(logits, target, "bce_logits_loss");
  const std::int64_t N = logits.size();
  const auto xv = logits.data();
  const auto tv = target.data();
  double acc = 0.0;
  for (std::int64_t i = 0; i < N; ++i) {
    // softplus(x) - t*x evaluated as max(x,0) - t*x + log1p(exp(-|x|)).
    acc += std::max(xv[i], 0.0) - tv[i] * xv[i] + std::log1p(std::exp(-std::abs(xv[i])));
  }
  Tensor out = Tensor::scalar(acc / static_cast<double>(N));
  if (tracing({&logits})) {
    out.set_requires_grad(true);
    Impl xi = logits.impl_ptr(), ti = target.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, ti, oi, N] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double g = oi->grad[0] / static_cast<double>(N);
      const double* xv = xi->value.data();
      const double* tv = ti->value.data();
      double* gp = xi->grad_buffer().data();
      for (std::int64_t i = 0; i < N; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-xv[i]));
        gp[i] += g * (s - tv[i]);
      }
    });
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank3(a, "concat_channels");
  require_rank3(b, "concat_channels");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2)) {
    throw ShapeError("concat_channels: shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()) + " differ in batch or length");
  }
  const std::int64_t B = a.dim(0), C1 = a.dim(1), C2 = b.dim(1), n = a.dim(2);
  Tensor out(Shape{B, C1 + C2, n});
  {
    const double* ap = a.data().data();
    const double* bp = b.data().data();
    double* op = out.data().data();
    for (std::int64_t i = 0; i < B; ++i) {
      std::copy(ap + i * C1 * n, ap + (i + 1) * C1 * n, op + i * (C1 + C2) * n);
      std::copy(bp + i * C2 * n, bp + (i + 1) * C2 * n, op + i * (C1 + C2) * n + C1 * n);
    }
  }
  if (tracing({&a, &b})) {
    out.set_requires_grad(true);
    Impl ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([ai, bi, oi, B, C1, C2, n] {
      if (oi->grad.empty()) return;
      const double* gy = oi->grad.data();
      if (ai->requires_grad) {
        double* ga = ai->grad_buffer().data();
        for (std::int64_t i = 0; i < B; ++i) {
          const double* src = gy + i * (C1 + C2) * n;
          double* dst = ga + i * C1 * n;
          for (std::int64_t j = 0; j < C1 * n; ++j) dst[j] += src[j];
        }
      }
      if (bi->requires_grad) {
        double* gb = bi->grad_buffer().data();
        for (std::int64_t i = 0; i < B; ++i) {
          const double* src = gy + i * (C1 + C2) * n + C1 * n;
          double* dst = gb + i * C2 * n;
          for (std::int64_t j = 0; j < C2 * n; ++j) dst[j] += src[j];
        }
      }
    });
  }
  return out;
}

namespace {

template <typename Fwd>
Tensor elementwise_binary(const Tensor& a, const Tensor& b, const char* name,
                          Fwd fwd, double da, double db) {
  require_same_shape(a, b, name);
  Tensor out(a.shape());
  const auto av = a.data();
  const auto bv = b.data();
  auto ov = out.data();
  for (std::int64_t i = 0; i < a.size(); ++i) ov[i] = fwd(av[i], bv[i]);
  if (tracing({&a, &b})) {
    out.set_requires_grad(true);
    Impl ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([ai, bi, oi, da, db] {
      if (oi->grad.empty()) return;
      const double* gy = oi->grad.data();
      const size_t N = oi->value.size();
      if (ai->requires_grad) {
        double* ga = ai->grad_buffer().data();
        for (size_t i = 0; i < N; ++i) ga[i] += da * gy[i];
      }
      if (bi->requires_grad) {
        double* gb = bi->grad_buffer().data();
        for (size_t i = 0; i < N; ++i) gb[i] += db * gy[i];
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "add", [](double x, double y) { return x + y; }, 1.0, 1.0);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "sub", [](double x, double y) { return x - y; }, 1.0, -1.0);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  const auto av = a.data();
  const auto bv = b.data();
  auto ov = out.data();
  for (std::int64_t i = 0; i < a.size(); ++i) ov[i] = av[i] * bv[i];
  if (tracing({&a, &b})) {
    out.set_requires_grad(true);
    Impl ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([ai, bi, oi] {
      if (oi->grad.empty()) return;
      const double* gy = oi->grad.data();
      const size_t N = oi->value.size();
      if (ai->requires_grad) {
        double* ga = ai->grad_buffer().data();
        const double* bv = bi->value.data();
        for (size_t i = 0; i < N; ++i) ga[i] += bv[i] * gy[i];
      }
      if (bi->requires_grad) {
        double* gb = bi->grad_buffer().data();
        const double* av = ai->value.data();
        for (size_t i = 0; i < N; ++i) gb[i] += av[i] * gy[i];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, double c) {
  Tensor out(x.shape());
  const auto xv = x.data();
  auto ov = out.data();
  for (std::int64_t i = 0; i < x.size(); ++i) ov[i] = c * xv[i];
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi, c] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      double* gx = xi->grad_buffer().data();
      for (size_t i = 0; i < xi->value.size(); ++i) gx[i] += c * gy[i];
    });
  }
  return out;
}

Tensor sum_all(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  Tensor out = Tensor::scalar(acc);
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double g = oi->grad[0];
      double* gx = xi->grad_buffer().data();
      for (size_t i = 0; i < xi->value.size(); ++i) gx[i] += g;
    });
  }
  return out;
}

Tensor mean_last(const Tensor& x) {
  require_rank3(x, "mean_last");
  const std::int64_t B = x.dim(0), C = x.dim(1), n = x.dim(2);
  Tensor out(Shape{B, C, 1});
  const double* xp = x.data().data();
  double* op = out.data().data();
  for (std::int64_t r = 0; r < B * C; ++r) {
    double acc = 0.0;
    for (std::int64_t t = 0; t < n; ++t) acc += xp[r * n + t];
    op[r] = acc / static_cast<double>(n);
  }
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi, B, C, n] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      double* gx = xi->grad_buffer().data();
      const double inv = 1.0 / static_cast<double>(n);
      for (std::int64_t r = 0; r < B * C; ++r) {
        const double g = gy[r] * inv;
        for (std::int64_t t = 0; t < n; ++t) gx[r * n + t] += g;
      }
    });
  }
  return out;
}

Tensor mean_channels(const Tensor& x) {
  require_rank3(x, "mean_channels");
  const std::int64_t B = x.dim(0), C = x.dim(1), n = x.dim(2);
  Tensor out(Shape{B, 1, n});
  const double* xp = x.data().data();
  double* op = out.data().data();
  const double inv = 1.0 / static_cast<double>(C);
  for (std::int64_t i = 0; i < B; ++i) {
    for (std::int64_t t = 0; t < n; ++t) {
      double acc = 0.0;
      for (std::int64_t c = 0; c < C; ++c) acc += xp[(i * C + c) * n + t];
      op[i * n + t] = acc * inv;
    }
  }
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi, B, C, n] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      double* gx = xi->grad_buffer().data();
      const double inv = 1.0 / static_cast<double>(C);
      for (std::int64_t i = 0; i < B; ++i) {
        for (std::int64_t c = 0; c < C; ++c) {
          for (std::int64_t t = 0; t < n; ++t) {
            gx[(i * C + c) * n + t] += gy[i * n + t] * inv;
          }
        }
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.size()) {
    throw ShapeError("reshape: element count mismatch, " + shape_str(x.shape()) +
                     " -> " + shape_str(shape));
  }
  Tensor out = Tensor::from(std::move(shape),
                            std::vector<double>(x.data().begin(), x.data().end()));
  if (tracing({&x})) {
    out.set_requires_grad(true);
    Impl xi = x.impl_ptr(), oi = out.impl_ptr();
    Graph::active()->record([xi, oi] {
      if (oi->grad.empty() || !xi->requires_grad) return;
      const double* gy = oi->grad.data();
      double* gx = xi->grad_buffer().data();
      for (size_t i = 0; i < xi->value.size(); ++i) gx[i] += gy[i];
    });
  }
  return out;
}

}  // namespace gawno
