#include "popcast/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace popcast::ops {

namespace {

template <typename T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

// Output size floors: (H + 2*pad - K)/stride + 1. The fixed network
// architecture additionally insists on exact geometry (build_model rejects
// stages with a remainder), but the raw kernel accepts any window that fits.
void check_conv_geometry(std::size_t h, std::size_t w, std::size_t k,
                         int stride, int pad) {
  require(stride >= 1, "conv2d: stride must be positive");
  require(pad >= 0, "conv2d: pad must be non-negative");
  require(k <= h + 2 * pad && k <= w + 2 * pad,
          "conv2d: kernel does not fit in padded input");
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>& b, int stride, int pad) {
  require(x.rank() == 3, "conv2d: input must be [C,H,W]");
  require(w.rank() == 4, "conv2d: weights must be [C',C,K,K]");
  require(w.dim(1) == x.dim(0),
          "conv2d: input channels " + x.shape_str() +
              " do not match kernel channels " + w.shape_str());
  require(w.dim(2) == w.dim(3), "conv2d: kernel must be square");
  require(b.size() == w.dim(0), "conv2d: bias size mismatch");

  const std::size_t ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t co = w.dim(0), k = w.dim(2);
  check_conv_geometry(h, wd, k, stride, pad);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1;
  const std::size_t ow = (wd + 2 * pad - k) / stride + 1;

  Tensor<T> y({co, oh, ow});
  const T* xd = x.data();
  const T* wdat = w.data();
  T* yd = y.data();

#pragma omp parallel for collapse(2) schedule(static) if (co * oh * ow > 2048)
  for (std::size_t f = 0; f < co; ++f)
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const long y0 = static_cast<long>(oy) * stride - pad;
      const std::size_t ky_lo = y0 < 0 ? std::size_t(-y0) : 0;
      const std::size_t ky_hi =
          std::min<std::size_t>(k, std::size_t(static_cast<long>(h) - y0));
      for (std::size_t ox = 0; ox < ow; ++ox) {
        T acc = b[f];
        const long x0 = static_cast<long>(ox) * stride - pad;
        const std::size_t kx_lo = x0 < 0 ? std::size_t(-x0) : 0;
        const std::size_t kx_hi =
            std::min<std::size_t>(k, std::size_t(static_cast<long>(wd) - x0));
        const std::size_t kx_n = kx_hi > kx_lo ? kx_hi - kx_lo : 0;
        for (std::size_t c = 0; c < ci; ++c)
          for (std::size_t ky = ky_lo; ky < ky_hi; ++ky) {
            const T* xp = xd + (c * h + std::size_t(y0 + long(ky))) * wd +
                          std::size_t(x0 + long(kx_lo));
            const T* wp = wdat + ((f * ci + c) * k + ky) * k + kx_lo;
            T inner = T(0);
            for (std::size_t n = 0; n < kx_n; ++n) inner += xp[n] * wp[n];
            acc += inner;
          }
        yd[(f * oh + oy) * ow + ox] = acc;
      }
    }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, int stride,
                     int pad, const Tensor<T>& dy, Tensor<T>& dx,
                     Tensor<T>& dw, Tensor<T>& db) {
  const std::size_t ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t co = w.dim(0), k = w.dim(2);
  const std::size_t oh = dy.dim(1), ow = dy.dim(2);
  require(dy.dim(0) == co, "conv2d backward: dy channel mismatch");
  require(dx.same_shape(x) && dw.same_shape(w) && db.size() == co,
          "conv2d backward: gradient shape mismatch");

  const T* xd = x.data();
  const T* wdat = w.data();
  const T* dyd = dy.data();

  // input gradient: gather per input cell, deterministic for any thread count
#pragma omp parallel for collapse(2) schedule(static) if (ci * h * wd > 2048)
  for (std::size_t c = 0; c < ci; ++c)
    for (std::size_t iy = 0; iy < h; ++iy) {
      for (std::size_t ix = 0; ix < wd; ++ix) {
        T acc = T(0);
        if (stride == 1) {
          // oy = iy + pad - ky, valid while 0 <= oy < oh
          const long ky_lo = std::max(0L, long(iy) + pad - long(oh) + 1);
          const long ky_hi = std::min(long(k), long(iy) + pad + 1);
          const long kx_lo = std::max(0L, long(ix) + pad - long(ow) + 1);
          const long kx_hi = std::min(long(k), long(ix) + pad + 1);
          const long x_off = long(ix) + pad;
          for (std::size_t f = 0; f < co; ++f)
            for (long ky = ky_lo; ky < ky_hi; ++ky) {
              const std::size_t oy = std::size_t(long(iy) + pad - ky);
              const T* dyrow = dyd + (f * oh + oy) * ow;
              const T* wrow = wdat + ((f * ci + c) * k + ky) * k;
              T inner = T(0);
              for (long kx = kx_lo; kx < kx_hi; ++kx)
                inner += dyrow[x_off - kx] * wrow[kx];
              acc += inner;
            }
        } else {
          for (std::size_t f = 0; f < co; ++f)
            for (std::size_t ky = 0; ky < k; ++ky) {
              const long num_y =
                  static_cast<long>(iy) + pad - static_cast<long>(ky);
              if (num_y < 0 || num_y % stride != 0) continue;
              const std::size_t oy = num_y / stride;
              if (oy >= oh) continue;
              for (std::size_t kx = 0; kx < k; ++kx) {
                const long num_x =
                    static_cast<long>(ix) + pad - static_cast<long>(kx);
                if (num_x < 0 || num_x % stride != 0) continue;
                const std::size_t ox = num_x / stride;
                if (ox >= ow) continue;
                acc += dyd[(f * oh + oy) * ow + ox] *
                       wdat[((f * ci + c) * k + ky) * k + kx];
              }
            }
        }
        dx(c, iy, ix) += acc;
      }
    }

  // weight gradient: one independent sum per weight element
#pragma omp parallel for collapse(2) schedule(static) if (co * ci * k * k > 256)
  for (std::size_t f = 0; f < co; ++f)
    for (std::size_t c = 0; c < ci; ++c) {
      for (std::size_t ky = 0; ky < k; ++ky) {
        // iy = oy*stride - pad + ky must land in [0, h)
        long oy_start = 0;
        while (oy_start < long(oh) &&
               long(oy_start) * stride - pad + long(ky) < 0)
          ++oy_start;
        for (std::size_t kx = 0; kx < k; ++kx) {
          long ox_start = 0;
          while (ox_start < long(ow) &&
                 long(ox_start) * stride - pad + long(kx) < 0)
            ++ox_start;
          long ox_end = long(ow);
          while (ox_end > ox_start &&
                 long(ox_end - 1) * stride - pad + long(kx) >= long(wd))
            --ox_end;
          T acc = T(0);
          for (std::size_t oy = std::size_t(oy_start); oy < oh; ++oy) {
            const long iy =
                static_cast<long>(oy) * stride - pad + static_cast<long>(ky);
            if (iy >= static_cast<long>(h)) break;
            const T* xrow = xd + (c * h + iy) * wd;
            const T* dyrow = dyd + (f * oh + oy) * ow;
            const long x_base = -pad + static_cast<long>(kx);
            if (stride == 1) {
              const T* xp = xrow + x_base + ox_start;
              T inner = T(0);
              for (long ox = ox_start; ox < ox_end; ++ox)
                inner += dyrow[ox] * xp[ox - ox_start];
              acc += inner;
            } else {
              for (long ox = ox_start; ox < ox_end; ++ox)
                acc += dyrow[ox] * xrow[ox * stride + x_base];
            }
          }
          dw[((f * ci + c) * k + ky) * k + kx] += acc;
        }
      }
    }

  for (std::size_t f = 0; f < co; ++f) {
    T acc = T(0);
    for (std::size_t i = 0; i < oh * ow; ++i) acc += dyd[f * oh * ow + i];
    db[f] += acc;
  }
}

template <typename T>
MaxPoolOut<T> maxpool2d_forward(const Tensor<T>& x, int k, int stride) {
  require(x.rank() == 3, "maxpool2d: input must be [C,H,W]");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  require(k >= 1 && stride >= 1, "maxpool2d: k and stride must be positive");
  require(static_cast<std::size_t>(k) <= h && static_cast<std::size_t>(k) <= w,
          "maxpool2d: window larger than input");
  const std::size_t oh = (h - k) / stride + 1, ow = (w - k) / stride + 1;

  MaxPoolOut<T> out{Tensor<T>({c, oh, ow}),
                    std::vector<std::size_t>(c * oh * ow)};

#pragma omp parallel for schedule(static) if (c > 1 && oh * ow > 1024)
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        // first occurrence in row-major order wins ties
        std::size_t best = (ch * h + oy * stride) * w + ox * stride;
        T m = x[best];
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const std::size_t idx =
                (ch * h + oy * stride + ky) * w + ox * stride + kx;
            if (x[idx] > m) {
              m = x[idx];
              best = idx;
            }
          }
        out.y(ch, oy, ox) = m;
        out.argmax[(ch * oh + oy) * ow + ox] = best;
      }
  return out;
}

template <typename T>
void maxpool2d_backward(const MaxPoolOut<T>& out, const Tensor<T>& dy,
                        Tensor<T>& dx) {
  require(dy.same_shape(out.y), "maxpool2d backward: dy shape mismatch");
  const std::size_t c = out.y.dim(0);
  const std::size_t per_ch = out.y.dim(1) * out.y.dim(2);
  // scatter is serial within a channel; windows never cross channels
#pragma omp parallel for schedule(static) if (c > 1 && per_ch > 1024)
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < per_ch; ++i) {
      const std::size_t o = ch * per_ch + i;
      dx[out.argmax[o]] += dy[o];
    }
}

template <typename T>
Tensor<T> lrn_forward(const Tensor<T>& x, int n, double alpha, double beta,
                      double kconst, Tensor<T>* denom_cache) {
  require(x.rank() == 3, "lrn: input must be [C,H,W]");
  require(n >= 1 && n % 2 == 1, "lrn: window size must be odd and >= 1");
  require(kconst > 0, "lrn: kconst must be > 0");
  const long c = static_cast<long>(x.dim(0));
  const std::size_t hw = x.dim(1) * x.dim(2);
  const int half = (n - 1) / 2;
  Tensor<T> y(x.shape());
  Tensor<T> den(x.shape());

#pragma omp parallel for schedule(static) if (hw > 1024)
  for (std::size_t p = 0; p < hw; ++p)
    for (long ch = 0; ch < c; ++ch) {
      T s = T(0);
      for (long j = std::max(0L, ch - half); j <= std::min(c - 1, ch + half);
           ++j) {
        const T v = x[j * hw + p];
        s += v * v;
      }
      const T d = static_cast<T>(kconst) + static_cast<T>(alpha / n) * s;
      den[ch * hw + p] = d;
      y[ch * hw + p] = x[ch * hw + p] * std::pow(d, static_cast<T>(-beta));
    }
  if (denom_cache) *denom_cache = std::move(den);
  return y;
}

template <typename T>
void lrn_backward(const Tensor<T>& x, const Tensor<T>& denom, int n,
                  double alpha, double beta, const Tensor<T>& dy,
                  Tensor<T>& dx) {
  const long c = static_cast<long>(x.dim(0));
  const std::size_t hw = x.dim(1) * x.dim(2);
  const int half = (n - 1) / 2;
  const T bconst = static_cast<T>(beta);
  const T scale = static_cast<T>(alpha / n);

  // out[ch] = x[ch] * den[ch]^-beta; x[j] appears in den of its window.
  // One pow per (channel, position): g[ch] = dy[ch] * den[ch]^(-beta-1).
#pragma omp parallel if (hw > 1024)
  {
    std::vector<T> g(c);
#pragma omp for schedule(static)
    for (std::size_t p = 0; p < hw; ++p) {
      for (long ch = 0; ch < c; ++ch)
        g[ch] = dy[ch * hw + p] *
                std::pow(denom[ch * hw + p], -bconst - T(1));
      for (long j = 0; j < c; ++j) {
        T window = T(0);
        for (long ch = std::max(0L, j - half);
             ch <= std::min(c - 1, j + half); ++ch)
          window += g[ch] * x[ch * hw + p];
        dx[j * hw + p] += g[j] * denom[j * hw + p] -
                          T(2) * bconst * scale * x[j * hw + p] * window;
      }
    }
  }
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const std::size_t n = x.size();
#pragma omp parallel for schedule(static) if (n > 16384)
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
void relu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
  const std::size_t n = x.size();
#pragma omp parallel for schedule(static) if (n > 16384)
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > T(0)) dx[i] += dy[i];
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w,
                        const Tensor<T>& b) {
  require(w.rank() == 2, "dense: weights must be [M,D]");
  require(x.size() == w.dim(1),
          "dense: input length " + std::to_string(x.size()) +
              " does not match weight input dimension " +
              std::to_string(w.dim(1)));
  const std::size_t m = w.dim(0), d = w.dim(1);
  Tensor<T> y({m});
#pragma omp parallel for schedule(static) if (m * d > 65536)
  for (std::size_t i = 0; i < m; ++i) {
    T acc = b[i];
    const T* row = w.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
    y(i) = acc;
  }
  return y;
}

template <typename T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy,
                    Tensor<T>& dx, Tensor<T>& dw, Tensor<T>& db) {
  const std::size_t m = w.dim(0), d = w.dim(1);
  require(dy.size() == m, "dense backward: dy size mismatch");
#pragma omp parallel for schedule(static) if (m * d > 65536)
  for (std::size_t j = 0; j < d; ++j) {
    T acc = T(0);
    for (std::size_t i = 0; i < m; ++i) acc += w(i, j) * dy[i];
    dx[j] += acc;
  }
#pragma omp parallel for schedule(static) if (m * d > 65536)
  for (std::size_t i = 0; i < m; ++i) {
    T* row = dw.data() + i * d;
    const T g = dy[i];
    for (std::size_t j = 0; j < d; ++j) row[j] += g * x[j];
    db[i] += g;
  }
}

template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& x, double drop_ratio, bool train,
                          Rng& rng, Tensor<T>* mask_cache) {
  require(drop_ratio >= 0.0 && drop_ratio < 1.0,
          "dropout: drop_ratio must be in [0,1)");
  if (!train) {
    if (mask_cache) *mask_cache = Tensor<T>(x.shape(), T(1));
    return x;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - drop_ratio));
  Tensor<T> mask(x.shape());
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T f = rng.uniform() < drop_ratio ? T(0) : keep_scale;
    mask[i] = f;
    y[i] = x[i] * f;
  }
  if (mask_cache) *mask_cache = std::move(mask);
  return y;
}

template <typename T>
void dropout_backward(const Tensor<T>& mask, const Tensor<T>& dy,
                      Tensor<T>& dx) {
  for (std::size_t i = 0; i < mask.size(); ++i) dx[i] += dy[i] * mask[i];
}

template <typename T>
void lstm_step_forward(const Tensor<T>& x, const Tensor<T>& h_prev,
                       const Tensor<T>& c_prev, const Tensor<T>& wx,
                       const Tensor<T>& wh, const Tensor<T>& b, Tensor<T>& h,
                       Tensor<T>& c, LstmStepCache<T>* cache) {
  require(h_prev.same_shape(c_prev), "lstm_step: hidden/cell shape mismatch");
  const std::size_t hid = h_prev.size(), d = x.size();
  require(wx.rank() == 2 && wx.dim(0) == 4 * hid && wx.dim(1) == d,
          "lstm_step: wx shape mismatch");
  require(wh.rank() == 2 && wh.dim(0) == 4 * hid && wh.dim(1) == hid,
          "lstm_step: wh shape mismatch");
  require(b.size() == 4 * hid, "lstm_step: bias shape mismatch");

  Tensor<T> z({4 * hid});
#pragma omp parallel for schedule(static) if (hid * (d + hid) > 65536)
  for (std::size_t r = 0; r < 4 * hid; ++r) {
    T acc = b[r];
    const T* wxr = wx.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) acc += wxr[j] * x[j];
    const T* whr = wh.data() + r * hid;
    for (std::size_t j = 0; j < hid; ++j) acc += whr[j] * h_prev[j];
    z(r) = acc;
  }

  Tensor<T> gi({hid}), gf({hid}), gg({hid}), go({hid});
  h = Tensor<T>({hid});
  c = Tensor<T>({hid});
  Tensor<T> tanh_c({hid});
  for (std::size_t u = 0; u < hid; ++u) {
    gi(u) = sigmoid(z(u));
    gf(u) = sigmoid(z(hid + u));
    gg(u) = std::tanh(z(2 * hid + u));
    go(u) = sigmoid(z(3 * hid + u));
    c(u) = gf(u) * c_prev[u] + gi(u) * gg(u);
    tanh_c(u) = std::tanh(c(u));
    h(u) = go(u) * tanh_c(u);
  }
  if (cache)
    *cache = LstmStepCache<T>{x, h_prev, c_prev, gi, gf, gg, go, c, tanh_c};
}

template <typename T>
void lstm_step_backward(const LstmStepCache<T>& cc, const Tensor<T>& wx,
                        const Tensor<T>& wh, const Tensor<T>& dh,
                        const Tensor<T>& dc, Tensor<T>& dx, Tensor<T>& dh_prev,
                        Tensor<T>& dc_prev, Tensor<T>& dwx, Tensor<T>& dwh,
                        Tensor<T>& db) {
  const std::size_t hid = cc.h_prev.size(), d = cc.x.size();
  Tensor<T> dz({4 * hid});
  for (std::size_t u = 0; u < hid; ++u) {
    const T dgo = dh[u] * cc.tanh_c[u];
    const T dct = dc[u] + dh[u] * cc.go[u] * (T(1) - cc.tanh_c[u] * cc.tanh_c[u]);
    const T dgi = dct * cc.gg[u];
    const T dgf = dct * cc.c_prev[u];
    const T dgg = dct * cc.gi[u];
    dc_prev[u] += dct * cc.gf[u];
    dz(u) = dgi * cc.gi[u] * (T(1) - cc.gi[u]);
    dz(hid + u) = dgf * cc.gf[u] * (T(1) - cc.gf[u]);
    dz(2 * hid + u) = dgg * (T(1) - cc.gg[u] * cc.gg[u]);
    dz(3 * hid + u) = dgo * cc.go[u] * (T(1) - cc.go[u]);
  }

#pragma omp parallel for schedule(static) if (hid * (d + hid) > 65536)
  for (std::size_t j = 0; j < d; ++j) {
    T acc = T(0);
    for (std::size_t r = 0; r < 4 * hid; ++r) acc += wx(r, j) * dz(r);
    dx[j] += acc;
  }
#pragma omp parallel for schedule(static) if (hid * hid > 65536)
  for (std::size_t j = 0; j < hid; ++j) {
    T acc = T(0);
    for (std::size_t r = 0; r < 4 * hid; ++r) acc += wh(r, j) * dz(r);
    dh_prev[j] += acc;
  }
#pragma omp parallel for schedule(static) if (hid * (d + hid) > 65536)
  for (std::size_t r = 0; r < 4 * hid; ++r) {
    T* wxr = dwx.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) wxr[j] += dz(r) * cc.x[j];
    T* whr = dwh.data() + r * hid;
    for (std::size_t j = 0; j < hid; ++j) whr[j] += dz(r) * cc.h_prev[j];
    db[r] += dz(r);
  }
}

template <typename T>
LstmState<T> lstm_step(const Tensor<T>& x, const LstmState<T>& state,
                       const LstmParams<T>& params, LstmStepCache<T>* cache) {
  LstmState<T> next;
  lstm_step_forward(x, state.hidden, state.cell, params.wx.value,
                    params.wh.value, params.b.value, next.hidden, next.cell,
                    cache);
  return next;
}

template <typename T>
Tensor<T> softmax_forward(const Tensor<T>& logits) {
  Tensor<T> y(logits.shape());
  T m = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) m = std::max(m, logits[i]);
  T sum = T(0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    y[i] = std::exp(logits[i] - m);
    sum += y[i];
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= sum;
  return y;
}

template <typename T>
void softmax_backward(const Tensor<T>& probs, const Tensor<T>& dprobs,
                      Tensor<T>& dlogits) {
  T dot = T(0);
  for (std::size_t i = 0; i < probs.size(); ++i) dot += dprobs[i] * probs[i];
  for (std::size_t i = 0; i < probs.size(); ++i)
    dlogits[i] += probs[i] * (dprobs[i] - dot);
}

template <typename T>
T loss_forward(const Tensor<T>& probs, int label, LossKind kind, double floor) {
  require(probs.size() == 2, "loss: probs must have length 2");
  require(label == 0 || label == 1, "loss: label must be 0 or 1");
  if (kind == LossKind::squared) {
    const T d = probs[1] - static_cast<T>(label);
    return d * d;
  }
  const T p = std::max(probs[label], static_cast<T>(floor));
  return -std::log(p);
}

template <typename T>
Tensor<T> loss_backward(const Tensor<T>& probs, int label, LossKind kind,
                        double floor) {
  Tensor<T> d({2}, T(0));
  if (kind == LossKind::squared) {
    d(1) = T(2) * (probs[1] - static_cast<T>(label));
    return d;
  }
  if (probs[label] > static_cast<T>(floor))
    d(label) = -T(1) / probs[label];
  return d;
}

#define POPCAST_INSTANTIATE_OPS(T)                                            \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&,    \
                                       const Tensor<T>&, int, int);           \
  template void conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, int,   \
                                   int, const Tensor<T>&, Tensor<T>&,         \
                                   Tensor<T>&, Tensor<T>&);                   \
  template MaxPoolOut<T> maxpool2d_forward<T>(const Tensor<T>&, int, int);    \
  template void maxpool2d_backward<T>(const MaxPoolOut<T>&, const Tensor<T>&, \
                                      Tensor<T>&);                            \
  template Tensor<T> lrn_forward<T>(const Tensor<T>&, int, double, double,    \
                                    double, Tensor<T>*);                      \
  template void lrn_backward<T>(const Tensor<T>&, const Tensor<T>&, int,      \
                                double, double, const Tensor<T>&, Tensor<T>&);\
  template Tensor<T> relu_forward<T>(const Tensor<T>&);                       \
  template void relu_backward<T>(const Tensor<T>&, const Tensor<T>&,          \
                                 Tensor<T>&);                                 \
  template Tensor<T> dense_forward<T>(const Tensor<T>&, const Tensor<T>&,     \
                                      const Tensor<T>&);                      \
  template void dense_backward<T>(const Tensor<T>&, const Tensor<T>&,         \
                                  const Tensor<T>&, Tensor<T>&, Tensor<T>&,   \
                                  Tensor<T>&);                                \
  template Tensor<T> dropout_forward<T>(const Tensor<T>&, double, bool, Rng&, \
                                        Tensor<T>*);                          \
  template void dropout_backward<T>(const Tensor<T>&, const Tensor<T>&,       \
                                    Tensor<T>&);                              \
  template void lstm_step_forward<T>(const Tensor<T>&, const Tensor<T>&,      \
                                     const Tensor<T>&, const Tensor<T>&,      \
                                     const Tensor<T>&, const Tensor<T>&,      \
                                     Tensor<T>&, Tensor<T>&,                  \
                                     LstmStepCache<T>*);                      \
  template void lstm_step_backward<T>(                                        \
      const LstmStepCache<T>&, const Tensor<T>&, const Tensor<T>&,            \
      const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&, Tensor<T>&, \
      Tensor<T>&, Tensor<T>&, Tensor<T>&);                                    \
  template LstmState<T> lstm_step<T>(const Tensor<T>&, const LstmState<T>&,   \
                                     const LstmParams<T>&,                    \
                                     LstmStepCache<T>*);                      \
  template Tensor<T> softmax_forward<T>(const Tensor<T>&);                    \
  template void softmax_backward<T>(const Tensor<T>&, const Tensor<T>&,       \
                                    Tensor<T>&);                              \
  template T loss_forward<T>(const Tensor<T>&, int, LossKind, double);        \
  template Tensor<T> loss_backward<T>(const Tensor<T>&, int, LossKind, double);

POPCAST_INSTANTIATE_OPS(float)
POPCAST_INSTANTIATE_OPS(double)

}  // namespace popcast::ops
