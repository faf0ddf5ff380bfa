#include <algorithm>
#include <cmath>

#include "popcast/error.hpp"
#include "popcast/shallow.hpp"

namespace popcast::shallow {

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b,
                  double gamma) {
  require(a.size() == b.size(), "rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

constexpr double kStepEps = 1e-12;

struct SmoState {
  const std::vector<std::vector<double>>& k;
  const std::vector<int>& y;
  double C, tol;
  std::vector<double> alpha;
  std::vector<double> err;  // E_i = f(x_i) - y_i, kept exact incrementally
  double b = 0.0;
  Rng& rng;

  SmoState(const std::vector<std::vector<double>>& kmat,
           const std::vector<int>& labels, double c, double t, Rng& r)
      : k(kmat), y(labels), C(c), tol(t), alpha(labels.size(), 0.0),
        err(labels.size()), rng(r) {
    for (std::size_t i = 0; i < y.size(); ++i) err[i] = -double(y[i]);
  }

  bool non_bound(std::size_t i) const {
    return alpha[i] > 0.0 && alpha[i] < C;
  }

  bool violates_kkt(std::size_t i) const {
    const double r = err[i] * y[i];
    return (r < -tol && alpha[i] < C) || (r > tol && alpha[i] > 0.0);
  }

  bool take_step(std::size_t i, std::size_t j) {
    if (i == j) return false;
    const double ai = alpha[i], aj = alpha[j];
    const int yi = y[i], yj = y[j];
    const double s = yi * yj;
    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, aj - ai);
      hi = std::min(C, C + aj - ai);
    } else {
      lo = std::max(0.0, ai + aj - C);
      hi = std::min(C, ai + aj);
    }
    if (lo >= hi) return false;

    const double kii = k[i][i], kjj = k[j][j], kij = k[i][j];
    const double eta = kii + kjj - 2.0 * kij;
    double aj_new;
    if (eta > 0.0) {
      aj_new = std::clamp(aj + yj * (err[i] - err[j]) / eta, lo, hi);
    } else {
      // flat direction: evaluate the objective at both ends
      const double f1 = yi * (err[i] + b) - ai * kii - s * aj * kij;
      const double f2 = yj * (err[j] + b) - s * ai * kij - aj * kjj;
      const double l1 = ai + s * (aj - lo);
      const double h1 = ai + s * (aj - hi);
      const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * kii +
                            0.5 * lo * lo * kjj + s * lo * l1 * kij;
      const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * kii +
                            0.5 * hi * hi * kjj + s * hi * h1 * kij;
      if (obj_lo < obj_hi - kStepEps)
        aj_new = lo;
      else if (obj_hi < obj_lo - kStepEps)
        aj_new = hi;
      else
        return false;
    }
    if (std::fabs(aj_new - aj) < kStepEps * (aj_new + aj + kStepEps))
      return false;
    const double ai_new = std::clamp(ai + s * (aj - aj_new), 0.0, C);

    const double di = (ai_new - ai) * yi, dj = (aj_new - aj) * yj;
    const double b1 = b - err[i] - di * kii - dj * kij;
    const double b2 = b - err[j] - di * kij - dj * kjj;
    double b_new;
    if (ai_new > 0.0 && ai_new < C)
      b_new = b1;
    else if (aj_new > 0.0 && aj_new < C)
      b_new = b2;
    else
      b_new = 0.5 * (b1 + b2);

    const double db = b_new - b;
    for (std::size_t t = 0; t < err.size(); ++t)
      err[t] += di * k[i][t] + dj * k[j][t] + db;
    alpha[i] = ai_new;
    alpha[j] = aj_new;
    b = b_new;
    return true;
  }

  bool examine(std::size_t i) {
    if (!violates_kkt(i)) return false;
    // second choice: max |E_i - E_j| over non-bound points, seeded tie break
    double best = -1.0;
    std::vector<std::size_t> ties;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (j == i || !non_bound(j)) continue;
      const double gap = std::fabs(err[i] - err[j]);
      if (gap > best + 1e-15) {
        best = gap;
        ties.assign(1, j);
      } else if (gap > best - 1e-15) {
        ties.push_back(j);
      }
    }
    if (!ties.empty()) {
      const std::size_t j = ties[rng.uniform_int(ties.size())];
      if (take_step(i, j)) return true;
    }
    const std::size_t n = alpha.size();
    std::size_t start = rng.uniform_int(n);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t j = (start + t) % n;
      if (non_bound(j) && take_step(i, j)) return true;
    }
    start = rng.uniform_int(n);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t j = (start + t) % n;
      if (take_step(i, j)) return true;
    }
    return false;
  }
};

}  // namespace

SmoResult smo_solve(const std::vector<std::vector<double>>& kernel,
                    const std::vector<int>& y, double C, double tol,
                    int max_passes, Rng& rng) {
  require(!y.empty() && kernel.size() == y.size(),
          "smo_solve: bad problem size");
  require(C > 0 && tol > 0, "smo_solve: C and tol must be positive");
  SmoState st(kernel, y, C, tol, rng);

  SmoResult out;
  bool examine_all = true;
  int changed = 0;
  int passes = 0;
  bool converged = false;
  while (passes < max_passes) {
    changed = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!examine_all && !st.non_bound(i)) continue;
      if (st.examine(i)) ++changed;
    }
    ++passes;
    if (examine_all) {
      if (changed == 0) {
        converged = true;  // full sweep found no violation above tol
        break;
      }
      examine_all = false;
    } else if (changed == 0) {
      examine_all = true;
    }
  }
  // Recompute the bias from the final alphas: the pairwise updates leave b
  // anywhere in the KKT-feasible interval when few points are non-bound.
  const std::size_t n = y.size();
  double lo_bound = -1e300, hi_bound = 1e300;
  double nb_sum = 0.0;
  int nb_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double f0 = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      f0 += st.alpha[j] * y[j] * kernel[i][j];
    const double pinned = y[i] - f0;  // b making y_i*f_i == 1
    const double slack = 1e-9 * C;
    const bool at_zero = st.alpha[i] <= slack;
    const bool at_c = st.alpha[i] >= C - slack;
    if (!at_zero && !at_c) {
      nb_sum += pinned;
      ++nb_count;
    } else if ((at_zero && y[i] > 0) || (at_c && y[i] < 0)) {
      lo_bound = std::max(lo_bound, pinned);
    } else {
      hi_bound = std::min(hi_bound, pinned);
    }
  }
  out.alpha = std::move(st.alpha);
  if (nb_count > 0)
    out.bias = nb_sum / nb_count;
  else if (lo_bound > -1e299 && hi_bound < 1e299)
    out.bias = 0.5 * (lo_bound + hi_bound);
  else
    out.bias = st.b;
  out.converged = converged;
  out.passes = passes;
  return out;
}

namespace {

std::vector<std::vector<double>> kernel_matrix(
    const std::vector<std::vector<double>>& x, double gamma) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n));
#pragma omp parallel for schedule(static) if (n > 64)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = rbf_kernel(x[i], x[j], gamma);
      k[i][j] = v;
      k[j][i] = v;
    }
  return k;
}

double decision_from_dual(const std::vector<std::vector<double>>& k,
                          const std::vector<double>& alpha,
                          const std::vector<int>& y, double b,
                          std::size_t col) {
  double s = b;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0.0) s += alpha[i] * y[i] * k[i][col];
  return s;
}

}  // namespace

std::pair<double, double> fit_platt(const std::vector<double>& decision,
                                    const std::vector<int>& y) {
  require(decision.size() == y.size() && !decision.empty(),
          "fit_platt: bad input");
  double prior1 = 0, prior0 = 0;
  for (int v : y) (v > 0 ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  const std::size_t n = decision.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = y[i] > 0 ? hi : lo;

  // Newton with backtracking on the regularized Platt likelihood
  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double pa, double pb) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = pa * decision[i] + pb;
      // stable log(1+exp(z)) split
      if (z >= 0)
        obj += target[i] * z + std::log1p(std::exp(-z));
      else
        obj += (target[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return obj;
  };
  double fval = objective(a, b);
  const double min_step = 1e-10, sigma = 1e-12;
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = a * decision[i] + b;
      double p, q;
      if (z >= 0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += decision[i] * decision[i] * d2;
      h22 += d2;
      h21 += decision[i] * d2;
      const double d1 = target[i] - p;
      g1 += decision[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-5 && std::fabs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= min_step) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;
  }
  // probability must stay monotone increasing in the decision value
  if (a > -1e-6) a = -1e-6;
  return {a, b};
}

SvmModel svm_train(const std::vector<std::vector<double>>& x,
                   const std::vector<int>& y, double C, double gamma,
                   double tol, int max_passes, std::uint64_t seed) {
  require(!x.empty() && x.size() == y.size(),
          "svm_train: empty or mismatched training set");
  bool pos = false, neg = false;
  for (int v : y) {
    require(v == 1 || v == -1, "svm_train: labels must be -1/+1");
    (v > 0 ? pos : neg) = true;
  }
  require(pos && neg, "svm_train: both classes must be present");
  require(gamma > 0, "svm_train: gamma must be positive");

  SvmModel model;
  model.C = C;
  model.gamma = gamma;
  model.standardizer = Standardizer::fit(x);
  std::vector<std::vector<double>> xs;
  xs.reserve(x.size());
  for (const auto& row : x) xs.push_back(model.standardizer.apply(row));
  const std::size_t n = xs.size();

  // held-out decision values for calibration: 3-fold internal split
  std::vector<double> cal_dec;
  std::vector<int> cal_y;
  Rng rng(seed);
  if (n >= 9) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + rng.uniform_int(n - i);
      std::swap(perm[i], perm[j]);
    }
    for (int fold = 0; fold < 3; ++fold) {
      std::vector<std::size_t> tr, te;
      for (std::size_t i = 0; i < n; ++i)
        (static_cast<int>(i % 3) == fold ? te : tr).push_back(perm[i]);
      bool fp = false, fn = false;
      for (std::size_t i : tr) (y[i] > 0 ? fp : fn) = true;
      if (!fp || !fn) continue;
      std::vector<std::vector<double>> xtr;
      std::vector<int> ytr;
      for (std::size_t i : tr) {
        xtr.push_back(xs[i]);
        ytr.push_back(y[i]);
      }
      const auto ktr = kernel_matrix(xtr, gamma);
      Rng fold_rng = Rng(seed).fork(10 + fold);
      const SmoResult res = smo_solve(ktr, ytr, C, tol, max_passes, fold_rng);
      for (std::size_t i : te) {
        double s = res.bias;
        for (std::size_t t = 0; t < xtr.size(); ++t)
          if (res.alpha[t] > 0.0)
            s += res.alpha[t] * ytr[t] * rbf_kernel(xtr[t], xs[i], gamma);
        cal_dec.push_back(s);
        cal_y.push_back(y[i]);
      }
    }
  }

  const auto k = kernel_matrix(xs, gamma);
  Rng main_rng = Rng(seed).fork(1);
  const SmoResult res = smo_solve(k, y, C, tol, max_passes, main_rng);
  model.bias = res.bias;
  model.converged = res.converged;

  if (cal_dec.empty()) {
    // too few samples for an internal split: calibrate on training scores
    for (std::size_t i = 0; i < n; ++i) {
      cal_dec.push_back(decision_from_dual(k, res.alpha, y, res.bias, i));
      cal_y.push_back(y[i]);
    }
  }
  std::tie(model.platt_a, model.platt_b) = fit_platt(cal_dec, cal_y);

  for (std::size_t i = 0; i < n; ++i)
    if (res.alpha[i] > 1e-12) {
      model.support.push_back(xs[i]);
      model.coef.push_back(res.alpha[i] * y[i]);
    }
  return model;
}

double svm_decision(const SvmModel& model, const std::vector<double>& x) {
  const std::vector<double> xs = model.standardizer.apply(x);
  double s = model.bias;
  for (std::size_t i = 0; i < model.support.size(); ++i)
    s += model.coef[i] * rbf_kernel(model.support[i], xs, model.gamma);
  return s;
}

std::array<double, 2> svm_predict_proba(const SvmModel& model,
                                        const std::vector<double>& x) {
  const double s = svm_decision(model, x);
  const double z = model.platt_a * s + model.platt_b;
  const double p = 1.0 / (1.0 + std::exp(z));
  return {1.0 - p, p};
}

}  // namespace popcast::shallow
