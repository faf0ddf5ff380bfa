#include "popcast/shallow.hpp"

#include <cmath>
#include <fstream>

#include "popcast/detail/binio.hpp"
#include "popcast/error.hpp"

namespace popcast::shallow {

namespace {
double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& x) {
  require(!x.empty(), "standardizer: empty sample set");
  const std::size_t n = x.size(), d = x[0].size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (const auto& row : x) {
    require(row.size() == d, "standardizer: ragged feature matrix");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  }
  for (std::size_t j = 0; j < d; ++j) s.mean[j] /= double(n);
  std::vector<double> var(d, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - s.mean[j];
      var[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / double(n));
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(const std::vector<double>& v) const {
  require(v.size() == mean.size(),
          "standardizer: feature dimension mismatch (got " +
              std::to_string(v.size()) + ", expected " +
              std::to_string(mean.size()) + ")");
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    out[j] = (v[j] - mean[j]) / scale[j];
  return out;
}

// --- logistic regression ------------------------------------------------------

LogRegGrad logreg_loss_grad(const std::vector<std::vector<double>>& x,
                            const std::vector<int>& y,
                            const std::vector<double>& w, double b,
                            double l2) {
  const std::size_t n = x.size(), d = w.size();
  LogRegGrad out;
  out.grad_w.assign(d, 0.0);
  out.grad_b = 0.0;
  out.loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * x[i][j];
    const double p = sigmoid(z);
    const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
    out.loss += y[i] ? -std::log(pc) : -std::log(1.0 - pc);
    const double r = p - y[i];
    for (std::size_t j = 0; j < d; ++j) out.grad_w[j] += r * x[i][j];
    out.grad_b += r;
  }
  out.loss /= double(n);
  out.grad_b /= double(n);
  double wnorm2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    out.grad_w[j] = out.grad_w[j] / double(n) + l2 * w[j];
    wnorm2 += w[j] * w[j];
  }
  out.loss += 0.5 * l2 * wnorm2;
  return out;
}

LogRegModel logreg_train(const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y, double l2, double lr,
                         int epochs, std::uint64_t seed,
                         std::vector<double>* loss_curve) {
  (void)seed;  // full-batch descent from zero weights is already deterministic
  require(!x.empty() && x.size() == y.size(),
          "logreg_train: empty or mismatched training set");
  bool has0 = false, has1 = false;
  for (int v : y) (v ? has1 : has0) = true;
  require(has0 && has1, "logreg_train: both classes must be present");
  require(l2 >= 0 && lr > 0 && epochs >= 1,
          "logreg_train: invalid hyperparameters");

  LogRegModel model;
  model.l2 = l2;
  model.standardizer = Standardizer::fit(x);
  std::vector<std::vector<double>> xs;
  xs.reserve(x.size());
  for (const auto& row : x) xs.push_back(model.standardizer.apply(row));

  model.weights.assign(xs[0].size(), 0.0);
  model.bias = 0.0;
  // forward-backward split: explicit step on the data term, implicit step
  // on the l2 term, stable for any regularization strength
  LogRegGrad g;
  if (loss_curve) loss_curve->clear();
  const double shrink = 1.0 / (1.0 + lr * l2);
  for (int e = 0; e < epochs; ++e) {
    g = logreg_loss_grad(xs, y, model.weights, model.bias, l2);
    if (loss_curve) loss_curve->push_back(g.loss);
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
      const double data_grad = g.grad_w[j] - l2 * model.weights[j];
      model.weights[j] = (model.weights[j] - lr * data_grad) * shrink;
    }
    model.bias -= lr * g.grad_b;
  }
  g = logreg_loss_grad(xs, y, model.weights, model.bias, l2);
  double n2 = g.grad_b * g.grad_b;
  for (double v : g.grad_w) n2 += v * v;
  model.final_grad_norm = std::sqrt(n2);
  return model;
}

std::array<double, 2> logreg_predict_proba(const LogRegModel& model,
                                           const std::vector<double>& x) {
  const std::vector<double> xs = model.standardizer.apply(x);
  double z = model.bias;
  for (std::size_t j = 0; j < xs.size(); ++j) z += model.weights[j] * xs[j];
  const double p = sigmoid(z);
  return {1.0 - p, p};
}

// --- persistence ---------------------------------------------------------

namespace {

void put_vector(std::ostream& os, const std::vector<double>& v) {
  detail::put_u64(os, v.size());
  for (double d : v) detail::put_f64(os, d);
}

std::vector<double> get_vector(std::istream& is) {
  std::vector<double> v(detail::get_u64(is));
  for (double& d : v) d = detail::get_f64(is);
  return v;
}

void put_standardizer(std::ostream& os, const Standardizer& s) {
  put_vector(os, s.mean);
  put_vector(os, s.scale);
}

Standardizer get_standardizer(std::istream& is) {
  Standardizer s;
  s.mean = get_vector(is);
  s.scale = get_vector(is);
  return s;
}

}  // namespace

void save_shallow_model(const std::filesystem::path& path,
                        const ShallowModel& model) {
  std::ofstream os(path, std::ios::binary);
  require(bool(os),
          "shallow model: cannot open '" + path.string() + "' for writing");
  os.write("PSHL", 4);
  detail::put_u32(os, 1);  // version
  if (const auto* lr = std::get_if<LogRegModel>(&model)) {
    os.put(char(0));
    put_standardizer(os, lr->standardizer);
    put_vector(os, lr->weights);
    detail::put_f64(os, lr->bias);
    detail::put_f64(os, lr->l2);
    detail::put_f64(os, lr->final_grad_norm);
  } else {
    const auto& svm = std::get<SvmModel>(model);
    os.put(char(1));
    put_standardizer(os, svm.standardizer);
    detail::put_u64(os, svm.support.size());
    for (const auto& sv : svm.support) put_vector(os, sv);
    put_vector(os, svm.coef);
    detail::put_f64(os, svm.bias);
    detail::put_f64(os, svm.gamma);
    detail::put_f64(os, svm.C);
    detail::put_f64(os, svm.platt_a);
    detail::put_f64(os, svm.platt_b);
    os.put(svm.converged ? char(1) : char(0));
  }
  require(bool(os), "shallow model: write failed for '" + path.string() + "'");
}

ShallowModel load_shallow_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "shallow model: cannot open '" + path.string() + "'");
  char magic[4];
  is.read(magic, 4);
  require(bool(is) && std::string(magic, 4) == "PSHL",
          "shallow model: bad magic in '" + path.string() + "'");
  require(detail::get_u32(is) == 1, "shallow model: unsupported version");
  const int kind = is.get();
  if (kind == 0) {
    LogRegModel model;
    model.standardizer = get_standardizer(is);
    model.weights = get_vector(is);
    model.bias = detail::get_f64(is);
    model.l2 = detail::get_f64(is);
    model.final_grad_norm = detail::get_f64(is);
    return model;
  }
  require(kind == 1, "shallow model: unknown model kind");
  SvmModel model;
  model.standardizer = get_standardizer(is);
  const std::uint64_t n = detail::get_u64(is);
  model.support.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) model.support.push_back(get_vector(is));
  model.coef = get_vector(is);
  model.bias = detail::get_f64(is);
  model.gamma = detail::get_f64(is);
  model.C = detail::get_f64(is);
  model.platt_a = detail::get_f64(is);
  model.platt_b = detail::get_f64(is);
  model.converged = is.get() != 0;
  return model;
}

}  // namespace popcast::shallow
