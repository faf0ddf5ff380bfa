// Acceptance suite: one pass/fail line per criterion. Run all criteria with
// no arguments, or a subset by number: ./acceptance 3 4
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "popcast/experiment.hpp"
#include "popcast/shallow.hpp"
#include "popcast/synthetic.hpp"
#include "popcast_ref/naive.hpp"
#include "support/helpers.hpp"
#include "support/lrcn_check.hpp"
#include "support/op_check.hpp"

using namespace popcast;
using test_support::fd_check_op;
using test_support::random_tensor;

namespace {

struct Checker {
  std::vector<std::string> problems;

  void expect(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  template <typename A, typename B>
  void expect_le(A a, B b, const std::string& what) {
    if (!(a <= b)) {
      std::ostringstream os;
      os << what << " (" << a << " > " << b << ")";
      problems.push_back(os.str());
    }
  }
  template <typename A, typename B>
  void expect_ge(A a, B b, const std::string& what) {
    if (!(a >= b)) {
      std::ostringstream os;
      os << what << " (" << a << " < " << b << ")";
      problems.push_back(os.str());
    }
  }
};

// pinned experiment constants
constexpr std::uint64_t kDataSeed = 20160601;
constexpr std::uint64_t kFoldSeed = 99;
constexpr double kTrendNoise = 0.05;  // noisy but learnable
constexpr int kSampleCount = 400;

lrcn::LrcnConfig acceptance_lrcn_config() {
  lrcn::LrcnConfig cfg = lrcn::LrcnConfig::mini();
  cfg.lr = 1e-2;
  cfg.epochs = 1;
  cfg.iterations_per_epoch = 600;
  return cfg;
}

eval::SampleSet generate_and_load(const std::filesystem::path& dir,
                                  dataset::SyntheticCue cue, double noise,
                                  std::uint64_t seed) {
  dataset::GenerateOptions opt;
  opt.out_dir = dir;
  opt.n_videos = kSampleCount;
  opt.cue = cue;
  opt.noise_level = noise;
  opt.seed = seed;
  dataset::generate_synthetic(opt);
  return eval::load_samples(dir / "manifest.jsonl",
                            dataset::Date::parse("2026-01-01"), 6);
}

// ---- criterion 1: gradient integrity ---------------------------------------

void criterion_gradients(Checker& c) {
  Rng rng(101);

  {  // conv2d
    auto x = random_tensor({2, 6, 6}, rng);
    auto w = random_tensor({3, 2, 3, 3}, rng);
    auto b = random_tensor({3}, rng);
    Tensor<double> dx(x.shape(), 0.0), dw(w.shape(), 0.0), db(b.shape(), 0.0);
    const auto rep = fd_check_op(
        {{"x", &x, &dx}, {"w", &w, &dw}, {"b", &b, &db}},
        [&] { return ops::conv2d_forward(x, w, b, 1, 1); },
        [&](const Tensor<double>& dy) {
          ops::conv2d_backward(x, w, 1, 1, dy, dx, dw, db);
        },
        rng, 1e-4);
    c.expect(rep.pass, "conv2d gradient check failed");
  }
  {  // maxpool2d
    auto x = random_tensor({2, 6, 6}, rng);
    Tensor<double> dx(x.shape(), 0.0);
    ops::MaxPoolOut<double> cached;
    const auto rep = fd_check_op(
        {{"x", &x, &dx}},
        [&] {
          cached = ops::maxpool2d_forward(x, 2, 2);
          return cached.y;
        },
        [&](const Tensor<double>& dy) {
          ops::maxpool2d_backward(cached, dy, dx);
        },
        rng, 1e-4);
    c.expect(rep.pass, "maxpool2d gradient check failed");
  }
  {  // lrn
    auto x = random_tensor({5, 4, 4}, rng, -2, 2);
    Tensor<double> dx(x.shape(), 0.0), den;
    const auto rep = fd_check_op(
        {{"x", &x, &dx}},
        [&] { return ops::lrn_forward(x, 5, 1e-4, 0.75, 2.0, &den); },
        [&](const Tensor<double>& dy) {
          ops::lrn_backward(x, den, 5, 1e-4, 0.75, dy, dx);
        },
        rng, 1e-4);
    c.expect(rep.pass, "lrn gradient check failed");
  }
  {  // relu
    auto x = random_tensor({40}, rng, -2, 2);
    Tensor<double> dx(x.shape(), 0.0);
    const auto rep = fd_check_op(
        {{"x", &x, &dx}}, [&] { return ops::relu_forward(x); },
        [&](const Tensor<double>& dy) { ops::relu_backward(x, dy, dx); }, rng,
        1e-4);
    c.expect(rep.pass, "relu gradient check failed");
  }
  {  // dense 4->3 (the documented example)
    auto x = random_tensor({4}, rng);
    auto w = random_tensor({3, 4}, rng);
    auto b = random_tensor({3}, rng);
    Tensor<double> dx(x.shape(), 0.0), dw(w.shape(), 0.0), db(b.shape(), 0.0);
    const auto rep = fd_check_op(
        {{"x", &x, &dx}, {"w", &w, &dw}, {"b", &b, &db}},
        [&] { return ops::dense_forward(x, w, b); },
        [&](const Tensor<double>& dy) {
          ops::dense_backward(x, w, dy, dx, dw, db);
        },
        rng, 1e-4);
    c.expect(rep.pass, "dense gradient check failed");
  }
  {  // dropout through a frozen mask
    auto x = random_tensor({60}, rng);
    Tensor<double> dx(x.shape(), 0.0), mask;
    Rng mask_rng(7);
    ops::dropout_forward(x, 0.4, true, mask_rng, &mask);
    const auto rep = fd_check_op(
        {{"x", &x, &dx}},
        [&] {
          Tensor<double> y(x.shape());
          for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask[i];
          return y;
        },
        [&](const Tensor<double>& dy) { ops::dropout_backward(mask, dy, dx); },
        rng, 1e-4);
    c.expect(rep.pass, "dropout gradient check failed");
  }
  {  // lstm step
    const std::size_t d = 3, h = 2;
    auto x = random_tensor({d}, rng);
    auto h0 = random_tensor({h}, rng);
    auto c0 = random_tensor({h}, rng);
    auto wx = random_tensor({4 * h, d}, rng);
    auto wh = random_tensor({4 * h, h}, rng);
    auto b = random_tensor({4 * h}, rng);
    Tensor<double> dx({d}, 0.0), dh0({h}, 0.0), dc0({h}, 0.0);
    Tensor<double> dwx(wx.shape(), 0.0), dwh(wh.shape(), 0.0),
        db(b.shape(), 0.0);
    ops::LstmStepCache<double> cache;
    const auto rep = fd_check_op(
        {{"x", &x, &dx},
         {"h0", &h0, &dh0},
         {"c0", &c0, &dc0},
         {"wx", &wx, &dwx},
         {"wh", &wh, &dwh},
         {"b", &b, &db}},
        [&] {
          Tensor<double> hn, cn;
          ops::lstm_step_forward(x, h0, c0, wx, wh, b, hn, cn, &cache);
          return hn;
        },
        [&](const Tensor<double>& dh) {
          Tensor<double> dc({h}, 0.0);
          ops::lstm_step_backward(cache, wx, wh, dh, dc, dx, dh0, dc0, dwx,
                                  dwh, db);
        },
        rng, 1e-4);
    c.expect(rep.pass, "lstm gradient check failed");
  }
  {  // softmax + both losses, gradient wrt logits
    for (const auto kind :
         {ops::LossKind::squared, ops::LossKind::cross_entropy})
      for (int label = 0; label <= 1; ++label) {
        auto logits = random_tensor({2}, rng, -2, 2);
        Tensor<double> dlogits({2}, 0.0);
        const auto probs = ops::softmax_forward(logits);
        const auto dprobs = ops::loss_backward(probs, label, kind);
        ops::softmax_backward(probs, dprobs, dlogits);
        const auto rep = grad_check(
            {{"logits", &logits, &dlogits}},
            [&] {
              return double(ops::loss_forward(ops::softmax_forward(logits),
                                              label, kind));
            },
            1e-4);
        c.expect(rep.pass, "softmax/loss gradient check failed");
      }
  }

  // full mini network, backpropagation through time, subsampled elements
  lrcn::LrcnConfig cfg = lrcn::LrcnConfig::mini();
  Rng model_rng(59);
  auto model = lrcn::build_model<double>(cfg, model_rng);
  auto frames = test_support::random_frames(cfg, model_rng);
  FrameSequence cropped;
  for (const auto& f : frames)
    cropped.push_back(crop(f, 4, 4, cfg.crop_h, cfg.crop_w));
  const auto rep =
      test_support::full_model_grad_check(model, cropped, 1, 1e-3, 200);
  c.expect(rep.pass, "full mini network gradient check failed");
  c.expect_ge(rep.checked, std::size_t(1200),
              "full-model check sampled too few elements");
}

// ---- criterion 2: oracle equivalence --------------------------------------

void criterion_oracles(Checker& c) {
  Rng rng(202);
  double worst_conv = 0, worst_pool = 0, worst_lstm = 0, worst_rho = 0;

  for (int i = 0; i < 100; ++i) {
    const std::size_t ci = 1 + rng.uniform_int(3);
    const std::size_t co = 1 + rng.uniform_int(4);
    const std::size_t k = 1 + rng.uniform_int(3);
    const int stride = 1 + int(rng.uniform_int(2));
    const int pad = int(rng.uniform_int(2));
    const std::size_t h = k + rng.uniform_int(8);
    const auto x = random_tensor({ci, h, h}, rng);
    const auto w = random_tensor({co, ci, k, k}, rng);
    const auto b = random_tensor({co}, rng);
    worst_conv = std::max(
        worst_conv,
        test_support::max_abs_diff(ops::conv2d_forward(x, w, b, stride, pad),
                                   ref::conv2d(x, w, b, stride, pad)));
  }
  c.expect_le(worst_conv, 1e-12, "conv2d deviates from the naive oracle");

  for (int i = 0; i < 100; ++i) {
    const std::size_t ch = 1 + rng.uniform_int(3);
    const int k = 1 + int(rng.uniform_int(3));
    const int stride = 1 + int(rng.uniform_int(2));
    const std::size_t h = k + stride * (1 + rng.uniform_int(5));
    const auto x = random_tensor({ch, h, h}, rng);
    worst_pool = std::max(
        worst_pool, test_support::max_abs_diff(
                        ops::maxpool2d_forward(x, k, stride).y,
                        ref::maxpool2d(x, k, stride)));
  }
  c.expect_le(worst_pool, 1e-12, "maxpool2d deviates from the naive oracle");

  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 1 + rng.uniform_int(5), h = 1 + rng.uniform_int(5);
    const auto wx = random_tensor({4 * h, d}, rng);
    const auto wh = random_tensor({4 * h, h}, rng);
    const auto b = random_tensor({4 * h}, rng);
    std::vector<Tensor<double>> xs;
    for (int t = 0; t < 5; ++t) xs.push_back(random_tensor({d}, rng));
    Tensor<double> hh({h}, 0.0), cc({h}, 0.0);
    for (const auto& x : xs) {
      Tensor<double> hn, cn;
      ops::lstm_step_forward(x, hh, cc, wx, wh, b, hn, cn);
      hh = hn;
      cc = cn;
    }
    const auto want = ref::lstm_sequence(xs, wx, wh, b,
                                         Tensor<double>({h}, 0.0),
                                         Tensor<double>({h}, 0.0));
    worst_lstm =
        std::max({worst_lstm, test_support::max_abs_diff(hh, want.h),
                  test_support::max_abs_diff(cc, want.c)});
  }
  c.expect_le(worst_lstm, 1e-12, "lstm_step deviates from the unrolled oracle");

  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng.uniform_int(40);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = double(rng.uniform_int(10));
    for (auto& v : b) v = double(rng.uniform_int(10));
    const auto mine = eval::spearman(a, b);
    if (mine.degenerate) continue;
    worst_rho = std::max(worst_rho, std::abs(mine.rho - ref::spearman(a, b)));
  }
  c.expect_le(worst_rho, 1e-12, "spearman deviates from the counting oracle");

  double worst_gap = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 12 + rng.uniform_int(9);
    std::vector<std::vector<double>> x(n, std::vector<double>(3));
    for (auto& row : x)
      for (auto& v : row) v = -2 + 4 * rng.uniform();
    std::vector<int> y;
    bool pos = false, neg = false;
    for (std::size_t j = 0; j < n; ++j) {
      y.push_back(rng.coin() ? 1 : -1);
      (y.back() > 0 ? pos : neg) = true;
    }
    if (!pos || !neg) y[0] = -y[0];
    const double C = 0.5 + rng.uniform() * 2.0;
    const double gamma = 0.3 + rng.uniform();
    std::vector<std::vector<double>> kmat(n, std::vector<double>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b2 = 0; b2 < n; ++b2)
        kmat[a][b2] = shallow::rbf_kernel(x[a], x[b2], gamma);
    Rng smo_rng(i + 1000);
    const auto solved = shallow::smo_solve(kmat, y, C, 1e-6, 20000, smo_rng);
    const double smo_obj = ref::svm_dual_objective(kmat, y, solved.alpha);
    const auto oracle = ref::svm_dual_qp(kmat, y, C, 6000);
    worst_gap = std::max(worst_gap, std::abs(smo_obj - oracle.objective));
    c.expect_ge(smo_obj, oracle.objective - 1e-4,
                "smo dual objective fell below the oracle");
  }
  c.expect_le(worst_gap, 1e-4, "smo dual objective diverged from the oracle");
}

// ---- criterion 3: sequentiality separation ----------------------------------

void criterion_sequentiality(Checker& c) {
  test_support::TempDir tmp("acc_trend");
  const auto data =
      generate_and_load(tmp.path(), dataset::SyntheticCue::brightness_trend,
                        kTrendNoise, kDataSeed);

  eval::FeatureStore store(data);
  const std::vector<features::Descriptor> descriptors = {
      features::HogConfig{}, features::GistConfig{}};
  eval::ShallowHyper hyper;
  std::vector<std::shared_ptr<eval::ModelDriver>> models;
  models.push_back(eval::make_lrcn_driver(acceptance_lrcn_config(), false));
  models.push_back(
      eval::make_logreg_driver(store, descriptors, nullptr, hyper));
  models.push_back(eval::make_svm_driver(store, descriptors, nullptr, hyper));

  const auto report = eval::run_experiment(data, models, 5, kFoldSeed);
  for (const auto& m : report.models) {
    std::printf("    %-8s acc %.4f +/- %.4f   spearman %.4f +/- %.4f%s\n",
                m.model.c_str(), m.accuracy_mean(), m.accuracy_std(),
                m.spearman_mean(), m.spearman_std(),
                m.failed ? "  FAILED" : "");
    c.expect(!m.failed, "model " + m.model + " failed: " + m.error);
  }
  c.expect_ge(report.models[0].accuracy_mean(), 0.85,
              "mini network must learn the order cue");
  c.expect_le(report.models[1].accuracy_mean(), 0.60,
              "order-blind logreg must not see the trend cue");
  c.expect_le(report.models[2].accuracy_mean(), 0.60,
              "order-blind svm must not see the trend cue");

  // a trained model must depend on frame order
  const auto split = dataset::kfold_split(data.records.size(), 5, kFoldSeed);
  lrcn::LrcnConfig cfg = acceptance_lrcn_config();
  cfg.epochs = 1;
  cfg.iterations_per_epoch = 200;
  cfg.seed = 7;
  std::vector<const FrameSequence*> videos;
  std::vector<int> labels;
  for (int i : split.train_indices(0)) {
    videos.push_back(&data.frames[i]);
    labels.push_back(data.labels[i]);
  }
  Rng rng(cfg.seed);
  auto model = lrcn::build_model<float>(cfg, rng);
  lrcn::train_model(model, videos, labels);
  const int probe = split.test_indices(0)[0];
  FrameSequence fwd, rev;
  for (const auto& f : data.frames[probe])
    fwd.push_back(crop(f, 4, 4, cfg.crop_h, cfg.crop_w));
  rev.assign(fwd.rbegin(), fwd.rend());
  const auto pf = lrcn::forward_video(model, fwd, lrcn::Mode::eval);
  const auto pr = lrcn::forward_video(model, rev, lrcn::Mode::eval);
  c.expect(std::abs(pf.probs[1] - pr.probs[1]) > 1e-9,
           "trained network ignores frame order");
}

// ---- criterion 4: shallow sanity -------------------------------------------

void criterion_shallow_sanity(Checker& c) {
  test_support::TempDir tmp("acc_static");
  const auto data =
      generate_and_load(tmp.path(), dataset::SyntheticCue::static_brightness,
                        0.0, kDataSeed + 1);

  eval::FeatureStore store(data);
  const std::vector<features::Descriptor> descriptors = {
      features::HogConfig{}, features::GistConfig{}};
  eval::ShallowHyper hyper;
  std::vector<std::shared_ptr<eval::ModelDriver>> models;
  models.push_back(
      eval::make_logreg_driver(store, descriptors, nullptr, hyper));
  models.push_back(eval::make_svm_driver(store, descriptors, nullptr, hyper));

  const auto report = eval::run_experiment(data, models, 5, kFoldSeed);
  for (const auto& m : report.models) {
    std::printf("    %-8s acc %.4f +/- %.4f\n", m.model.c_str(),
                m.accuracy_mean(), m.accuracy_std());
    c.expect(!m.failed, "model " + m.model + " failed: " + m.error);
    c.expect_ge(m.accuracy_mean(), 0.95,
                m.model + " must separate the static brightness classes");
  }
}

// ---- criterion 5: labeling and normalization exactness ----------------------

void criterion_labeling(Checker& c) {
  c.expect_le(std::abs(dataset::normalized_score(0, 1) - 0.0), 1e-9,
              "score(0,1)");
  c.expect_le(std::abs(dataset::normalized_score(1023, 1) - 10.0), 1e-9,
              "score(1023,1)");
  c.expect_le(std::abs(dataset::normalized_score(999, 1000) - 0.0), 1e-9,
              "score(999,1000)");
  c.expect_le(
      std::abs(dataset::normalized_score(150000, 1048576) -
               -2.8053874069071525),
      1e-9, "score(150000,2^20)");

  Rng rng(505);
  std::set<double> distinct;
  while (distinct.size() < 10000) distinct.insert(rng.uniform() * 1e6);
  std::vector<double> scores(distinct.begin(), distinct.end());
  for (std::size_t i = 0; i + 1 < scores.size(); ++i)
    std::swap(scores[i], scores[i + rng.uniform_int(scores.size() - i)]);
  const auto labels = dataset::median_split(scores);
  int ones = 0;
  for (int l : labels) ones += l;
  c.expect(ones == 5000, "median split of 10^4 distinct scores not 5000/5000");

  bool monotone = true;
  for (int rep = 0; rep < 10000; ++rep) {
    const long long v = static_cast<long long>(rng.uniform_int(1000000));
    const long long f = 1 + static_cast<long long>(rng.uniform_int(1000000));
    const long long d = 1 + static_cast<long long>(rng.uniform_int(1000));
    if (!(dataset::normalized_score(v + d, f) >
          dataset::normalized_score(v, f)))
      monotone = false;
    if (!(dataset::normalized_score(v, f + d) <
          dataset::normalized_score(v, f)))
      monotone = false;
  }
  c.expect(monotone, "normalized score monotonicity violated");
}

// ---- criterion 6: descriptor dimensionality ---------------------------------

void criterion_descriptor_dims(Checker& c) {
  Rng rng(606);
  const Image img = random_tensor({3, 60, 80}, rng, 0, 1);
  const auto h = features::hog(img, features::HogConfig{});
  const auto g = features::gist(img, features::GistConfig{});
  c.expect(h.values.size() == 8100, "hog paper config must emit 8100 values");
  c.expect(g.values.size() == 960, "gist paper config must emit 960 values");
  c.expect(features::early_fusion({h, g}).values.size() == 9060,
           "fused hog+gist must emit 9060 values");
}

// ---- criterion 7: protocol fidelity ----------------------------------------

void criterion_protocol(Checker& c) {
  const auto split = dataset::kfold_split(37042, 5, 7);
  std::vector<int> sizes(5, 0);
  for (int a : split.assignment) ++sizes[a];
  for (int fold = 0; fold < 5; ++fold) {
    c.expect(sizes[fold] == 7409 || sizes[fold] == 7408,
             "test fold size must be 7409 or 7408");
    const int train = 37042 - sizes[fold];
    c.expect(train == 29633 || train == 29634,
             "train size must complement the test fold");
  }
}

// ---- criterion 8: test-time augmentation contract ----------------------------

void criterion_tta(Checker& c) {
  Rng rng(808);
  lrcn::LrcnConfig cfg = lrcn::LrcnConfig::mini();
  cfg.dropout_fc1 = 0.0;
  cfg.dropout_lstm = 0.0;

  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng model_rng(900 + rep);
    const auto model = lrcn::build_model<double>(cfg, model_rng);
    const auto frames = test_support::random_frames(cfg, rng);

    const auto reps = lrcn::tta_crops(frames, cfg.crop_h, cfg.crop_w);
    c.expect(reps.size() == 10, "tta_crops must emit exactly 10 sequences");

    // brute-force script: materialize the ten crops and average explicitly
    const std::size_t ey = cfg.source_h - cfg.crop_h,
                      ex = cfg.source_w - cfg.crop_w;
    const std::size_t offsets[5][2] = {
        {0, 0}, {0, ex}, {ey, 0}, {ey, ex}, {ey / 2, ex / 2}};
    double p0 = 0, p1 = 0;
    for (int mir = 0; mir < 2; ++mir)
      for (const auto& off : offsets) {
        FrameSequence rep_frames;
        for (const auto& f : frames) {
          Image cropped = crop(f, off[0], off[1], cfg.crop_h, cfg.crop_w);
          rep_frames.push_back(mir ? mirror_horizontal(cropped) : cropped);
        }
        const auto p = lrcn::forward_video(model, rep_frames, lrcn::Mode::eval);
        p0 += p.probs[0];
        p1 += p.probs[1];
      }
    const auto pred = lrcn::predict(model, frames);
    worst = std::max(worst, std::abs(pred.probs[1] - p1 / (p0 + p1)));
  }
  c.expect_le(worst, 1e-9, "predict deviates from the brute-force average");
}

// ---- criterion 9: command determinism ---------------------------------------

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd =
      std::string(POPCAST_CLI_BIN) + " " + args + " > " + log.string() +
      " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool trees_identical(const std::filesystem::path& a,
                     const std::filesystem::path& b) {
  namespace fs = std::filesystem;
  std::size_t count_a = 0, count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) {
      ++count_a;
      const auto rel = fs::relative(e.path(), a);
      if (!fs::exists(b / rel)) return false;
      if (test_support::read_file_bytes(e.path()) !=
          test_support::read_file_bytes(b / rel))
        return false;
    }
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++count_b;
  return count_a == count_b;
}

void criterion_determinism(Checker& c) {
  test_support::TempDir tmp("acc_det");
  const auto log = tmp.path() / "log.txt";
  const auto da = tmp.path() / "da";
  const auto db = tmp.path() / "db";

  const std::string gen_args =
      " --n 12 --cue brightness_trend --noise 0.1 --seed 5";
  c.expect(run_cli("generate --out " + da.string() + gen_args, log) == 0,
           "generate run 1 failed");
  c.expect(run_cli("generate --out " + db.string() + gen_args, log) == 0,
           "generate run 2 failed");
  c.expect(trees_identical(da, db), "generate runs differ");

  const std::string train_args =
      " --model lrcn --epochs 1 --iterations 4 --batch 3 --seed 11"
      " --now 2026-01-01";
  const auto m1 = tmp.path() / "m1.plrc";
  const auto m2 = tmp.path() / "m2.plrc";
  c.expect(run_cli("train --data " + da.string() + " --out " + m1.string() +
                       train_args,
                   log) == 0,
           "train run 1 failed");
  c.expect(run_cli("train --data " + da.string() + " --out " + m2.string() +
                       train_args,
                   log) == 0,
           "train run 2 failed");
  c.expect(test_support::read_file_bytes(m1) ==
               test_support::read_file_bytes(m2),
           "trained checkpoints differ");
  c.expect(test_support::read_file_bytes(m1.string() + ".loss.csv") ==
               test_support::read_file_bytes(m2.string() + ".loss.csv"),
           "loss curves differ");

  const auto e1 = tmp.path() / "e1";
  const auto e2 = tmp.path() / "e2";
  const std::string eval_args =
      " --models oracle,coinflip,logreg:hog --k 3 --seed 9 --now 2026-01-01";
  c.expect(run_cli("evaluate --data " + da.string() + " --out " + e1.string() +
                       eval_args,
                   log) == 0,
           "evaluate run 1 failed");
  c.expect(run_cli("evaluate --data " + da.string() + " --out " + e2.string() +
                       eval_args,
                   log) == 0,
           "evaluate run 2 failed");
  for (const char* name : {"results.csv", "results.json", "table.txt"})
    c.expect(test_support::read_file_bytes(e1 / name) ==
                 test_support::read_file_bytes(e2 / name),
             std::string("evaluate outputs differ: ") + name);
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Checker&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "gradient integrity", criterion_gradients},
      {2, "oracle equivalence", criterion_oracles},
      {3, "sequentiality separation", criterion_sequentiality},
      {4, "shallow sanity", criterion_shallow_sanity},
      {5, "labeling and normalization exactness", criterion_labeling},
      {6, "descriptor dimensionality fidelity", criterion_descriptor_dims},
      {7, "protocol fidelity", criterion_protocol},
      {8, "test-time augmentation contract", criterion_tta},
      {9, "command determinism", criterion_determinism},
  };

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!wanted.empty() && !wanted.count(criterion.id)) continue;
    Checker checker;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(checker);
    } catch (const std::exception& e) {
      checker.problems.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (checker.problems.empty()) {
      std::printf("[PASS] %d. %s (%.1fs)\n", criterion.id, criterion.name,
                  secs);
    } else {
      ++failures;
      std::printf("[FAIL] %d. %s (%.1fs)\n", criterion.id, criterion.name,
                  secs);
      for (const auto& p : checker.problems)
        std::printf("       - %s\n", p.c_str());
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
