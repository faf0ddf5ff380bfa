#include "popcast_ref/naive.hpp"

#include <algorithm>
#include <cmath>

#include "popcast/error.hpp"

namespace popcast::ref {

Tensor<double> conv2d(const Tensor<double>& x, const Tensor<double>& w,
                      const Tensor<double>& b, int stride, int pad) {
  const std::size_t ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t co = w.dim(0), k = w.dim(2);
  require(w.dim(1) == ci, "ref conv2d: channel mismatch");
  const std::size_t oh = (h + 2 * pad - k) / stride + 1;
  const std::size_t ow = (wd + 2 * pad - k) / stride + 1;
  Tensor<double> y({co, oh, ow});
  for (std::size_t f = 0; f < co; ++f)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = b(f);
        for (std::size_t c = 0; c < ci; ++c)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(oy) * stride - pad + ky;
              const long ix = static_cast<long>(ox) * stride - pad + kx;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) ||
                  ix >= static_cast<long>(wd))
                continue;
              acc += x(c, iy, ix) * w[((f * ci + c) * k + ky) * k + kx];
            }
        y(f, oy, ox) = acc;
      }
  return y;
}

Tensor<double> maxpool2d(const Tensor<double>& x, int k, int stride) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t oh = (h - k) / stride + 1, ow = (w - k) / stride + 1;
  Tensor<double> y({c, oh, ow});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double m = x(ch, oy * stride, ox * stride);
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx)
            m = std::max(m, x(ch, oy * stride + ky, ox * stride + kx));
        y(ch, oy, ox) = m;
      }
  return y;
}

Tensor<double> lrn(const Tensor<double>& x, int n, double alpha, double beta,
                   double kconst) {
  const long c = static_cast<long>(x.dim(0));
  const std::size_t h = x.dim(1), w = x.dim(2);
  Tensor<double> y(x.shape());
  const int half = (n - 1) / 2;
  for (long ch = 0; ch < c; ++ch)
    for (std::size_t yy = 0; yy < h; ++yy)
      for (std::size_t xx = 0; xx < w; ++xx) {
        double s = 0.0;
        for (long j = ch - half; j <= ch + half; ++j)
          if (j >= 0 && j < c) s += x(j, yy, xx) * x(j, yy, xx);
        y(ch, yy, xx) =
            x(ch, yy, xx) / std::pow(kconst + (alpha / n) * s, beta);
      }
  return y;
}

Tensor<double> dense(const Tensor<double>& x, const Tensor<double>& w,
                     const Tensor<double>& b) {
  const std::size_t m = w.dim(0), d = w.dim(1);
  require(x.size() == d, "ref dense: dimension mismatch");
  Tensor<double> y({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = b(i);
    for (std::size_t j = 0; j < d; ++j) acc += w(i, j) * x[j];
    y(i) = acc;
  }
  return y;
}

namespace {
double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

LstmResult lstm_sequence(const std::vector<Tensor<double>>& xs,
                         const Tensor<double>& wx, const Tensor<double>& wh,
                         const Tensor<double>& b, const Tensor<double>& h0,
                         const Tensor<double>& c0) {
  const std::size_t hid = h0.size();
  Tensor<double> h = h0, c = c0;
  for (const auto& x : xs) {
    const std::size_t d = x.size();
    std::vector<double> z(4 * hid, 0.0);
    for (std::size_t r = 0; r < 4 * hid; ++r) {
      double acc = b(r);
      for (std::size_t j = 0; j < d; ++j) acc += wx(r, j) * x[j];
      for (std::size_t j = 0; j < hid; ++j) acc += wh(r, j) * h(j);
      z[r] = acc;
    }
    Tensor<double> hn({hid}), cn({hid});
    for (std::size_t u = 0; u < hid; ++u) {
      const double gi = sigmoid(z[u]);
      const double gf = sigmoid(z[hid + u]);
      const double gg = std::tanh(z[2 * hid + u]);
      const double go = sigmoid(z[3 * hid + u]);
      cn(u) = gf * c(u) + gi * gg;
      hn(u) = go * std::tanh(cn(u));
    }
    h = hn;
    c = cn;
  }
  return {h, c};
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && a.size() >= 2, "ref spearman: bad input");
  const std::size_t n = a.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t less = 0, equal = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) ++less;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = less + (equal + 1) * 0.5;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0 || db == 0) return 0.0;
  return num / std::sqrt(da * db);
}

double svm_dual_objective(const std::vector<std::vector<double>>& kernel,
                          const std::vector<int>& y,
                          const std::vector<double>& alpha) {
  const std::size_t n = alpha.size();
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) obj += alpha[i];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
  return obj;
}

namespace {
// projection of v onto { 0 <= a <= C, sum_i y_i a_i = 0 }
std::vector<double> project(const std::vector<double>& v,
                            const std::vector<int>& y, double C) {
  const std::size_t n = v.size();
  auto eval = [&](double lam) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double a = std::clamp(v[i] + lam * y[i], 0.0, C);
      s += y[i] * a;
    }
    return s;
  };
  double lo = -1.0, hi = 1.0;
  while (eval(lo) > 0) lo *= 2.0;
  while (eval(hi) < 0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) > 0)
      hi = mid;
    else
      lo = mid;
  }
  const double lam = 0.5 * (lo + hi);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::clamp(v[i] + lam * y[i], 0.0, C);
  return out;
}
}  // namespace

QpResult svm_dual_qp(const std::vector<std::vector<double>>& kernel,
                     const std::vector<int>& y, double C, int iterations) {
  const std::size_t n = y.size();
  // Lipschitz bound via max row sum of |Q|
  double lip = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::fabs(kernel[i][j]);
    lip = std::max(lip, row);
  }
  const double step = 1.0 / std::max(lip, 1e-12);

  // accelerated projected gradient with restart on objective decrease
  std::vector<double> alpha(n, 0.0), prev(n, 0.0), look(n, 0.0), grad(n),
      trial(n);
  double t = 1.0;
  double best_obj = 0.0;
  std::vector<double> best = alpha;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double g = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        g -= y[i] * y[j] * kernel[i][j] * look[j];
      grad[i] = g;
    }
    for (std::size_t i = 0; i < n; ++i) trial[i] = look[i] + step * grad[i];
    prev = alpha;
    alpha = project(trial, y, C);
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i)
      look[i] = alpha[i] + beta * (alpha[i] - prev[i]);
    t = t_next;

    const double obj = svm_dual_objective(kernel, y, alpha);
    if (obj > best_obj) {
      best_obj = obj;
      best = alpha;
    } else if (obj < best_obj - 1e-12) {
      // restart the momentum when the ascent stalls
      look = alpha;
      t = 1.0;
    }
  }
  return {best, best_obj};
}

}  // namespace popcast::ref
