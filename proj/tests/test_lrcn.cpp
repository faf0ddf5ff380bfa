#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "popcast/lrcn.hpp"
#include "popcast/synthetic.hpp"
#include "popcast_ref/naive.hpp"
#include "support/helpers.hpp"
#include "support/lrcn_check.hpp"

using namespace popcast;
using lrcn::LrcnConfig;
using test_support::max_abs_diff;
using test_support::micro_config;
using test_support::random_frames;
using test_support::random_tensor;

namespace {

LrcnConfig quiet_mini() {
  LrcnConfig cfg = LrcnConfig::mini();
  cfg.dropout_fc1 = 0.0;
  cfg.dropout_lstm = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("paper-scale shape inference reaches the documented fc1 width") {
  const auto plan = lrcn::plan_stages(LrcnConfig::paper());
  CHECK(plan.stages[0].conv_h == 55);
  CHECK(plan.stages[0].out_h == 27);
  CHECK(plan.stages[1].out_h == 13);
  CHECK(plan.stages[4].out_h == 6);
  CHECK(plan.fc1_input_dim == 9216);  // 256 * 6 * 6
}

TEST_CASE("conv stack must have exactly five entries") {
  LrcnConfig cfg = LrcnConfig::mini();
  cfg.conv.resize(2);
  try {
    lrcn::plan_stages(cfg);
    FAIL("expected an exception");
  } catch (const error& e) {
    CHECK(std::string(e.what()).find("5 entries") != std::string::npos);
  }
}

TEST_CASE("shape inference failures name the offending layer") {
  LrcnConfig cfg = LrcnConfig::mini();
  cfg.conv[2] = {8, 3, 2, 0};  // (16+0-3)/2 is not integral
  try {
    lrcn::plan_stages(cfg);
    FAIL("expected an exception");
  } catch (const error& e) {
    CHECK(std::string(e.what()).find("conv3") != std::string::npos);
  }
}

TEST_CASE("mini parameter count equals the hand-computed sum") {
  const LrcnConfig cfg = LrcnConfig::mini();
  const auto plan = lrcn::plan_stages(cfg);
  CHECK(plan.fc1_input_dim == 128);  // 8 channels * 4 * 4
  // conv1 8*(3*3*3)+8, conv2..5 8*(8*3*3)+8 each, fc1 32*128+32,
  // lstm 4*16*(32+16+1), fc2 2*16+2
  CHECK(plan.parameter_count(cfg) == 9858);

  Rng rng(3);
  auto model = lrcn::build_model<double>(cfg, rng);
  std::size_t actual = 0;
  for (const auto* p : model.params()) actual += p->value.size();
  CHECK(actual == 9858);
}

TEST_CASE("forward_video with one frame equals that frame's softmax") {
  LrcnConfig cfg = quiet_mini();
  Rng rng(5);
  const auto model = lrcn::build_model<double>(cfg, rng);
  const auto frames = random_frames(cfg, rng, 1);
  FrameSequence crop = {popcast::crop(frames[0], 0, 0, cfg.crop_h, cfg.crop_w)};

  const auto pred = lrcn::forward_video(model, crop, lrcn::Mode::eval);
  Rng mask(1);
  const auto trace = lrcn::forward_video_trace(model, crop, mask);
  CHECK(pred.probs[0] ==
        doctest::Approx(double(trace.frames[0].probs[0])).epsilon(1e-12));
  CHECK(pred.probs[1] ==
        doctest::Approx(double(trace.frames[0].probs[1])).epsilon(1e-12));
  CHECK(std::abs(pred.probs[0] + pred.probs[1] - 1.0) < 1e-12);
}

TEST_CASE("identity-passthrough diagnostic collapses identical frames") {
  LrcnConfig cfg = quiet_mini();
  cfg.lstm_identity = true;
  cfg.lstm_hidden = cfg.fc1_width;  // required by the diagnostic mode
  Rng rng(7);
  const auto model = lrcn::build_model<double>(cfg, rng);
  const auto frame = random_tensor(
      {3, std::size_t(cfg.crop_h), std::size_t(cfg.crop_w)}, rng, 0, 1);

  const auto single = lrcn::forward_video(model, {frame}, lrcn::Mode::eval);
  const auto five = lrcn::forward_video(model, {frame, frame, frame, frame,
                                                frame},
                                        lrcn::Mode::eval);
  CHECK(five.probs[0] == doctest::Approx(single.probs[0]).epsilon(1e-12));
  CHECK(five.probs[1] == doctest::Approx(single.probs[1]).epsilon(1e-12));
}

TEST_CASE("forward_video matches an unrolled trace through the lstm oracle") {
  LrcnConfig cfg = quiet_mini();
  Rng rng(9);
  const auto model = lrcn::build_model<double>(cfg, rng);
  FrameSequence frames;
  for (int t = 0; t < 3; ++t)
    frames.push_back(random_tensor(
        {3, std::size_t(cfg.crop_h), std::size_t(cfg.crop_w)}, rng, 0, 1));

  Rng mask(1);
  const auto trace = lrcn::forward_video_trace(model, frames, mask);

  // replay the recurrent part with the independent unrolled reference
  std::vector<Tensor<double>> lstm_inputs;
  for (const auto& ft : trace.frames) lstm_inputs.push_back(ft.lstm_in);
  const std::size_t hid = cfg.lstm_hidden;
  Tensor<double> h({hid}, 0.0), c({hid}, 0.0);
  Tensor<double> mean({2}, 0.0);
  for (std::size_t t = 0; t < lstm_inputs.size(); ++t) {
    const auto step = ref::lstm_sequence({lstm_inputs[t]}, model.lstm.wx.value,
                                         model.lstm.wh.value,
                                         model.lstm.b.value, h, c);
    h = step.h;
    c = step.c;
    const auto logits =
        ref::dense(h, model.fc2.weight.value, model.fc2.bias.value);
    // softmax by the direct formula
    const double m = std::max(logits(0), logits(1));
    const double e0 = std::exp(logits(0) - m), e1 = std::exp(logits(1) - m);
    mean[0] += e0 / (e0 + e1);
    mean[1] += e1 / (e0 + e1);
  }
  mean[0] /= 3.0;
  mean[1] /= 3.0;

  const auto pred = lrcn::forward_video(model, frames, lrcn::Mode::eval);
  CHECK(pred.probs[0] == doctest::Approx(mean[0]).epsilon(1e-12));
  CHECK(pred.probs[1] == doctest::Approx(mean[1]).epsilon(1e-12));
}

TEST_CASE("forward_video rejects an empty sequence") {
  Rng rng(11);
  const auto model = lrcn::build_model<double>(quiet_mini(), rng);
  CHECK_THROWS_AS(lrcn::forward_video(model, {}, lrcn::Mode::eval), error);
}

TEST_CASE("augment draw covers offsets and mirrors fairly") {
  // source equal to crop pins the offset at zero
  Rng pin(13);
  const auto d = lrcn::draw_augment(32, 32, 32, 32, pin);
  CHECK(d.off_y == 0);
  CHECK(d.off_x == 0);

  // fixed seed reproduces the decision sequence
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) {
    const auto da = lrcn::draw_augment(240, 320, 227, 227, a);
    const auto db = lrcn::draw_augment(240, 320, 227, 227, b);
    CHECK(da.off_y == db.off_y);
    CHECK(da.off_x == db.off_x);
    CHECK(da.mirror == db.mirror);
  }

  // extremes reached and mirror frequency close to one half
  Rng rng(17);
  bool y0 = false, ymax = false, x0 = false, xmax = false;
  int mirrors = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto di = lrcn::draw_augment(240, 320, 227, 227, rng);
    y0 |= di.off_y == 0;
    ymax |= di.off_y == 13;
    x0 |= di.off_x == 0;
    xmax |= di.off_x == 93;
    mirrors += di.mirror;
  }
  CHECK(y0);
  CHECK(ymax);
  CHECK(x0);
  CHECK(xmax);
  const double freq = double(mirrors) / draws;
  CHECK(freq > 0.48);
  CHECK(freq < 0.52);

  // source smaller than crop is rejected
  Rng r2(1);
  CHECK_THROWS_AS(lrcn::draw_augment(10, 10, 32, 32, r2), error);
}

TEST_CASE("tta_crops yields exactly ten anchored representations") {
  Rng rng(19);
  FrameSequence frames;
  for (int t = 0; t < 2; ++t)
    frames.push_back(random_tensor({3, 6, 7}, rng, 0, 1));
  const auto reps = lrcn::tta_crops(frames, 4, 4);
  REQUIRE(reps.size() == 10);
  for (const auto& rep : reps) {
    REQUIRE(rep.size() == frames.size());
    for (const auto& f : rep) {
      CHECK(f.dim(1) == 4);
      CHECK(f.dim(2) == 4);
    }
  }
  // corner anchoring: TL keeps the source origin, BR keeps the last pixel
  CHECK(reps[0][0](0, 0, 0) == frames[0](0, 0, 0));
  CHECK(reps[3][0](2, 3, 3) == frames[0](2, 5, 6));

  // source == crop: five duplicates and five mirrored duplicates
  const auto same = lrcn::tta_crops(frames, 6, 7);
  REQUIRE(same.size() == 10);
  for (int i = 1; i < 5; ++i)
    CHECK(max_abs_diff(same[i][0], same[0][0]) == 0.0);
  const auto mirrored = mirror_horizontal(frames[0]);
  for (int i = 5; i < 10; ++i)
    CHECK(max_abs_diff(same[i][0], mirrored) == 0.0);

  CHECK_THROWS_AS(lrcn::tta_crops(frames, 10, 10), error);
}

TEST_CASE("predict with a constant head returns the tie prediction") {
  LrcnConfig cfg = quiet_mini();
  Rng rng(23);
  auto model = lrcn::build_model<double>(cfg, rng);
  model.fc2.weight.value.fill(0.0);
  model.fc2.bias.value.fill(0.0);
  const auto frames = random_frames(cfg, rng);
  const auto pred = lrcn::predict(model, frames);
  CHECK(pred.probs[0] == doctest::Approx(0.5));
  CHECK(pred.probs[1] == doctest::Approx(0.5));
  CHECK(pred.label == 1);  // ties go to popular
}

TEST_CASE("predict at source==crop averages the plain and mirrored passes") {
  LrcnConfig cfg = quiet_mini();
  cfg.source_h = cfg.crop_h;
  cfg.source_w = cfg.crop_w;
  Rng rng(29);
  const auto model = lrcn::build_model<double>(cfg, rng);
  const auto frames = random_frames(cfg, rng);

  const auto pred = lrcn::predict(model, frames);
  const auto plain = lrcn::forward_video(model, frames, lrcn::Mode::eval);
  FrameSequence mirrored;
  for (const auto& f : frames) mirrored.push_back(mirror_horizontal(f));
  const auto flipped = lrcn::forward_video(model, mirrored, lrcn::Mode::eval);
  CHECK(pred.probs[1] ==
        doctest::Approx((plain.probs[1] + flipped.probs[1]) / 2.0)
            .epsilon(1e-12));
}

TEST_CASE("predict equals the brute-force materialize-and-average script") {
  LrcnConfig cfg = quiet_mini();
  Rng rng(31);
  const auto model = lrcn::build_model<double>(cfg, rng);
  const auto frames = random_frames(cfg, rng);

  // independent materialization of the ten representations
  const std::size_t ch = cfg.crop_h, cw = cfg.crop_w;
  const std::size_t ey = cfg.source_h - ch, ex = cfg.source_w - cw;
  const std::size_t offsets[5][2] = {
      {0, 0}, {0, ex}, {ey, 0}, {ey, ex}, {ey / 2, ex / 2}};
  double p0 = 0, p1 = 0;
  for (int mir = 0; mir < 2; ++mir)
    for (const auto& off : offsets) {
      FrameSequence rep;
      for (const auto& f : frames) {
        Image c = popcast::crop(f, off[0], off[1], ch, cw);
        rep.push_back(mir ? mirror_horizontal(c) : c);
      }
      const auto p = lrcn::forward_video(model, rep, lrcn::Mode::eval);
      p0 += p.probs[0];
      p1 += p.probs[1];
    }
  const auto pred = lrcn::predict(model, frames);
  CHECK(pred.probs[0] == doctest::Approx(p0 / (p0 + p1)).epsilon(1e-10));
  CHECK(pred.probs[1] == doctest::Approx(p1 / (p0 + p1)).epsilon(1e-10));
}

TEST_CASE("mirror-symmetric models predict mirrored inputs identically") {
  LrcnConfig cfg = quiet_mini();
  Rng rng(37);
  auto model = lrcn::build_model<double>(cfg, rng);

  // symmetrize every conv kernel left-right
  for (auto& conv : model.convs) {
    auto& w = conv.weight.value;
    const std::size_t k = w.dim(3);
    for (std::size_t i = 0; i < w.size() / k; ++i)
      for (std::size_t a = 0; a < k / 2; ++a) {
        const double mean = (w[i * k + a] + w[i * k + k - 1 - a]) / 2.0;
        w[i * k + a] = mean;
        w[i * k + k - 1 - a] = mean;
      }
  }
  // symmetrize fc1 with respect to the horizontal flip of the conv output
  const auto& last = model.stage_dims[4];
  auto& fw = model.fc1.weight.value;
  for (std::size_t m = 0; m < fw.dim(0); ++m)
    for (std::size_t c = 0; c < last.out_c; ++c)
      for (std::size_t y = 0; y < last.out_h; ++y)
        for (std::size_t x = 0; x < last.out_w / 2; ++x) {
          const std::size_t a = (c * last.out_h + y) * last.out_w + x;
          const std::size_t b =
              (c * last.out_h + y) * last.out_w + (last.out_w - 1 - x);
          const double mean = (fw(m, a) + fw(m, b)) / 2.0;
          fw(m, a) = mean;
          fw(m, b) = mean;
        }

  const auto frames = random_frames(cfg, rng);
  FrameSequence mirrored;
  for (const auto& f : frames) mirrored.push_back(mirror_horizontal(f));
  const auto a = lrcn::predict(model, frames);
  const auto b = lrcn::predict(model, mirrored);
  CHECK(std::abs(a.probs[1] - b.probs[1]) < 1e-9);
}

TEST_CASE("a random model is sensitive to frame order") {
  LrcnConfig cfg = quiet_mini();
  Rng rng(41);
  const auto model = lrcn::build_model<double>(cfg, rng);
  auto frames = random_frames(cfg, rng);
  FrameSequence cropped, reversed;
  for (const auto& f : frames)
    cropped.push_back(popcast::crop(f, 0, 0, cfg.crop_h, cfg.crop_w));
  reversed.assign(cropped.rbegin(), cropped.rend());
  const auto fwd = lrcn::forward_video(model, cropped, lrcn::Mode::eval);
  const auto rev = lrcn::forward_video(model, reversed, lrcn::Mode::eval);
  CHECK(std::abs(fwd.probs[1] - rev.probs[1]) > 1e-12);
}

TEST_CASE("eval-mode predictions are pure") {
  LrcnConfig cfg = LrcnConfig::mini();  // nonzero dropout must not matter
  Rng rng(43);
  const auto model = lrcn::build_model<double>(cfg, rng);
  const auto frames = random_frames(cfg, rng);
  const auto a = lrcn::predict(model, frames);
  const auto b = lrcn::predict(model, frames);
  CHECK(a.probs[0] == b.probs[0]);
  CHECK(a.probs[1] == b.probs[1]);
  CHECK(a.label == b.label);
}

TEST_CASE("training with lr=0 leaves parameters unchanged") {
  LrcnConfig cfg = LrcnConfig::mini();
  cfg.lr = 0.0;
  cfg.epochs = 1;
  cfg.iterations_per_epoch = 3;
  cfg.batch_size = 4;
  Rng rng(47);
  auto model = lrcn::build_model<float>(cfg, rng);

  std::vector<Tensor<float>> before;
  for (const auto* p : model.params()) before.push_back(p->value);

  std::vector<FrameSequence> videos;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    videos.push_back(random_frames(cfg, rng));
    labels.push_back(i % 2);
  }
  std::vector<const FrameSequence*> ptrs;
  for (const auto& v : videos) ptrs.push_back(&v);
  lrcn::train_model(model, ptrs, labels);

  auto params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i)
    CHECK(max_abs_diff(params[i]->value, before[i]) == 0.0);
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  LrcnConfig cfg = LrcnConfig::mini();
  cfg.epochs = 1;
  cfg.iterations_per_epoch = 4;
  cfg.batch_size = 3;
  cfg.seed = 4242;

  Rng data_rng(53);
  std::vector<FrameSequence> videos;
  std::vector<int> labels;
  for (int i = 0; i < 6; ++i) {
    videos.push_back(random_frames(cfg, data_rng));
    labels.push_back(i % 2);
  }
  std::vector<const FrameSequence*> ptrs;
  for (const auto& v : videos) ptrs.push_back(&v);

  Rng r1(cfg.seed), r2(cfg.seed);
  auto m1 = lrcn::build_model<float>(cfg, r1);
  auto m2 = lrcn::build_model<float>(cfg, r2);
  const auto t1 = lrcn::train_model(m1, ptrs, labels);
  const auto t2 = lrcn::train_model(m2, ptrs, labels);

  REQUIRE(t1.loss_curve.size() == t2.loss_curve.size());
  for (std::size_t i = 0; i < t1.loss_curve.size(); ++i)
    CHECK(t1.loss_curve[i] == t2.loss_curve[i]);
  auto p1 = m1.params(), p2 = m2.params();
  for (std::size_t i = 0; i < p1.size(); ++i)
    CHECK(max_abs_diff(p1[i]->value, p2[i]->value) == 0.0);
}

TEST_CASE("training halves the loss on a separable synthetic set") {
  test_support::TempDir tmp("lrcn_learn");
  dataset::GenerateOptions gen;
  gen.out_dir = tmp.path();
  gen.n_videos = 64;
  gen.cue = dataset::SyntheticCue::brightness_trend;
  gen.noise_level = 0.05;
  gen.seed = 2024;
  dataset::generate_synthetic(gen);

  const auto ingest = dataset::ingest_manifest(
      tmp.path() / "manifest.jsonl", dataset::Date::parse("2026-01-01"), 14);
  REQUIRE(ingest.accepted.size() == 64);
  std::vector<FrameSequence> frames;
  std::vector<double> scores;
  for (const auto& rec : ingest.accepted) {
    frames.push_back(dataset::load_video_frames(rec, 6));
    scores.push_back(dataset::normalized_score(rec.viewcount, rec.followers));
  }
  const auto labels = dataset::median_split(scores);

  LrcnConfig cfg = LrcnConfig::mini();
  cfg.lr = 1e-2;
  cfg.epochs = 1;
  cfg.iterations_per_epoch = 200;
  cfg.seed = 31337;
  Rng rng(cfg.seed);
  auto model = lrcn::build_model<float>(cfg, rng);
  std::vector<const FrameSequence*> ptrs;
  for (const auto& v : frames) ptrs.push_back(&v);
  const auto result = lrcn::train_model(model, ptrs, labels);

  REQUIRE(result.loss_curve.size() == 200);
  double first = 0, last = 0;
  for (int i = 0; i < 20; ++i) {
    first += result.loss_curve[i];
    last += result.loss_curve[200 - 20 + i];
  }
  CHECK(last / 20 <= 0.5 * (first / 20));
}

TEST_CASE("micro model passes the full finite-difference check") {
  LrcnConfig cfg = micro_config();
  Rng rng(59);
  auto model = lrcn::build_model<double>(cfg, rng);
  auto frames = random_frames(cfg, rng);
  const auto report =
      test_support::full_model_grad_check(model, frames, 1, 1e-3);
  CHECK(report.pass);
  CHECK(report.max_rel_err < 1e-3);
  CHECK(report.checked > 400);
}

TEST_CASE("model checkpoints round-trip bit-exactly") {
  LrcnConfig cfg = quiet_mini();
  Rng rng(61);
  const auto model = lrcn::build_model<float>(cfg, rng);
  test_support::TempDir tmp("ckpt");
  const auto path = tmp.path() / "model.plrc";
  lrcn::save_model(path, model);

  const auto checkpoint = load_checkpoint(path);
  CHECK_FALSE(lrcn::checkpoint_is_double(checkpoint));
  const auto loaded = lrcn::model_from_checkpoint<float>(checkpoint);
  CHECK(loaded.config.to_json() == cfg.to_json());
  auto pa = model.params();
  auto pb = loaded.params();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(max_abs_diff(pa[i]->value, pb[i]->value) == 0.0);
  }

  // re-saving the loaded model reproduces the file byte for byte
  const auto path2 = tmp.path() / "model2.plrc";
  lrcn::save_model(path2, loaded);
  CHECK(test_support::read_file_bytes(path) ==
        test_support::read_file_bytes(path2));

  // precision mismatch is rejected
  CHECK_THROWS_AS(lrcn::model_from_checkpoint<double>(checkpoint), error);
}
