#pragma once
#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <variant>
#include <vector>

#include "popcast/rng.hpp"

namespace popcast::shallow {

// Per-dimension zero mean / unit variance, fit on the training fold only.
// Constant dimensions get scale 1 so they map to zero.
struct Standardizer {
  std::vector<double> mean, scale;

  static Standardizer fit(const std::vector<std::vector<double>>& x);
  std::vector<double> apply(const std::vector<double>& v) const;
};

// --- logistic regression -----------------------------------------------------

struct LogRegModel {
  Standardizer standardizer;
  std::vector<double> weights;
  double bias = 0.0;
  double l2 = 0.0;
  double final_grad_norm = 0.0;
};

inline constexpr double kLogRegDefaultL2 = 1e-4;
inline constexpr double kLogRegDefaultLr = 0.1;
inline constexpr int kLogRegDefaultEpochs = 300;

// mean cross-entropy + l2*||w||^2/2 (bias unregularized), full-batch
// gradient descent from zero weights
LogRegModel logreg_train(const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y, double l2, double lr,
                         int epochs, std::uint64_t seed,
                         std::vector<double>* loss_curve = nullptr);

std::array<double, 2> logreg_predict_proba(const LogRegModel& model,
                                           const std::vector<double>& x);

// loss and gradient on already-standardized features (exposed for
// verification against finite differences)
struct LogRegGrad {
  double loss;
  std::vector<double> grad_w;
  double grad_b;
};
LogRegGrad logreg_loss_grad(const std::vector<std::vector<double>>& x,
                            const std::vector<int>& y,
                            const std::vector<double>& w, double b, double l2);

// --- RBF-kernel SVM ---------------------------------------------------------

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b,
                  double gamma);

struct SvmModel {
  Standardizer standardizer;
  std::vector<std::vector<double>> support;  // standardized support vectors
  std::vector<double> coef;                  // alpha_i * y_i
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;
  double platt_a = -1.0, platt_b = 0.0;
  bool converged = true;
};

inline constexpr double kSvmDefaultC = 1.0;
inline constexpr double kSvmDefaultTol = 1e-3;
inline constexpr int kSvmDefaultMaxPasses = 400;

// SMO on the dual with a max-|E_i - E_j| working-pair heuristic and seeded
// random tie breaks; terminates when no KKT violation exceeds tol. Platt
// probabilities are calibrated on 3-fold cross-validated decision values.
// Labels are -1/+1. Non-convergence returns the best iterate with
// converged=false.
SvmModel svm_train(const std::vector<std::vector<double>>& x,
                   const std::vector<int>& y, double C, double gamma,
                   double tol, int max_passes, std::uint64_t seed);

double svm_decision(const SvmModel& model, const std::vector<double>& x);

std::array<double, 2> svm_predict_proba(const SvmModel& model,
                                        const std::vector<double>& x);

// exposed for oracle comparison: raw SMO on a precomputed kernel matrix
struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;
  bool converged = true;
  int passes = 0;
};
SmoResult smo_solve(const std::vector<std::vector<double>>& kernel,
                    const std::vector<int>& y, double C, double tol,
                    int max_passes, Rng& rng);

// Platt sigmoid fit: p = 1/(1+exp(A*f+B)) by Newton iterations; A is
// clamped below zero so probability stays monotone in the decision value.
std::pair<double, double> fit_platt(const std::vector<double>& decision,
                                    const std::vector<int>& y);

// --- persistence ("PSHL" container, bit-exact round trip) ------------------

using ShallowModel = std::variant<LogRegModel, SvmModel>;

void save_shallow_model(const std::filesystem::path& path,
                        const ShallowModel& model);
ShallowModel load_shallow_model(const std::filesystem::path& path);

}  // namespace popcast::shallow
