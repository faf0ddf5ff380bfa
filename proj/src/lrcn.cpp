#include "popcast/lrcn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <utility>

#include "json.hpp"
#include "popcast/sgd.hpp"

namespace popcast::lrcn {

using nlohmann::json;

namespace {

constexpr bool stage_pooled(std::size_t i) {
  return i == 0 || i == 1 || i == 4;
}
constexpr bool stage_lrned(std::size_t i) { return i == 0 || i == 1; }

}  // namespace

// --- config ---------------------------------------------------------------

void LrcnConfig::validate() const {
  require(conv.size() == 5, "lrcn config: conv stack must have 5 entries");
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const auto& c = conv[i];
    require(c.filters >= 1 && c.kernel >= 1 && c.stride >= 1 && c.pad >= 0,
            "lrcn config: invalid conv" + std::to_string(i + 1) + " spec");
  }
  require(frames_per_video >= 1, "lrcn config: frames_per_video must be >= 1");
  require(channels == 1 || channels == 3,
          "lrcn config: channels must be 1 or 3");
  require(crop_h >= 1 && crop_w >= 1, "lrcn config: invalid crop size");
  require(source_h >= crop_h && source_w >= crop_w,
          "lrcn config: source frame smaller than crop");
  require(pool_k >= 1 && pool_stride >= 1, "lrcn config: invalid pool spec");
  require(lrn_n >= 1 && lrn_n % 2 == 1, "lrcn config: lrn_n must be odd");
  require(lrn_k > 0, "lrcn config: lrn_k must be > 0");
  require(fc1_width >= 1 && lstm_hidden >= 1,
          "lrcn config: invalid fc1/lstm width");
  require(dropout_fc1 >= 0 && dropout_fc1 < 1 && dropout_lstm >= 0 &&
              dropout_lstm < 1,
          "lrcn config: dropout ratios must be in [0,1)");
  require(epochs >= 0 && iterations_per_epoch >= 0 && batch_size >= 1,
          "lrcn config: invalid training budget");
  require(lr >= 0 && momentum >= 0 && momentum < 1,
          "lrcn config: invalid lr/momentum");
  if (lstm_identity)
    require(fc1_width == lstm_hidden,
            "lrcn config: lstm_identity requires fc1_width == lstm_hidden");
}

std::string LrcnConfig::to_json() const {
  json j;
  j["frames_per_video"] = frames_per_video;
  j["channels"] = channels;
  j["crop_h"] = crop_h;
  j["crop_w"] = crop_w;
  j["source_h"] = source_h;
  j["source_w"] = source_w;
  json stack = json::array();
  for (const auto& c : conv)
    stack.push_back({{"filters", c.filters},
                     {"kernel", c.kernel},
                     {"stride", c.stride},
                     {"pad", c.pad}});
  j["conv"] = stack;
  j["pool_k"] = pool_k;
  j["pool_stride"] = pool_stride;
  j["lrn_n"] = lrn_n;
  j["lrn_alpha"] = lrn_alpha;
  j["lrn_beta"] = lrn_beta;
  j["lrn_k"] = lrn_k;
  j["fc1_width"] = fc1_width;
  j["lstm_hidden"] = lstm_hidden;
  j["epochs"] = epochs;
  j["iterations_per_epoch"] = iterations_per_epoch;
  j["batch_size"] = batch_size;
  j["loss"] = loss == LossKind::squared ? "squared" : "cross_entropy";
  j["lr"] = lr;
  j["momentum"] = momentum;
  j["dropout_fc1"] = dropout_fc1;
  j["dropout_lstm"] = dropout_lstm;
  j["seed"] = seed;
  j["lstm_identity"] = lstm_identity;
  return j.dump();
}

LrcnConfig LrcnConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  LrcnConfig c;
  c.frames_per_video = j.at("frames_per_video").get<int>();
  c.channels = j.at("channels").get<int>();
  c.crop_h = j.at("crop_h").get<int>();
  c.crop_w = j.at("crop_w").get<int>();
  c.source_h = j.at("source_h").get<int>();
  c.source_w = j.at("source_w").get<int>();
  c.conv.clear();
  for (const auto& e : j.at("conv"))
    c.conv.push_back({e.at("filters").get<int>(), e.at("kernel").get<int>(),
                      e.at("stride").get<int>(), e.at("pad").get<int>()});
  c.pool_k = j.at("pool_k").get<int>();
  c.pool_stride = j.at("pool_stride").get<int>();
  c.lrn_n = j.at("lrn_n").get<int>();
  c.lrn_alpha = j.at("lrn_alpha").get<double>();
  c.lrn_beta = j.at("lrn_beta").get<double>();
  c.lrn_k = j.at("lrn_k").get<double>();
  c.fc1_width = j.at("fc1_width").get<int>();
  c.lstm_hidden = j.at("lstm_hidden").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.iterations_per_epoch = j.at("iterations_per_epoch").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.loss = j.at("loss").get<std::string>() == "squared"
               ? LossKind::squared
               : LossKind::cross_entropy;
  c.lr = j.at("lr").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.dropout_fc1 = j.at("dropout_fc1").get<double>();
  c.dropout_lstm = j.at("dropout_lstm").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.lstm_identity = j.value("lstm_identity", false);
  return c;
}

LrcnConfig LrcnConfig::mini() {
  LrcnConfig c;
  c.conv = {{8, 3, 1, 1}, {8, 3, 1, 1}, {8, 3, 1, 1}, {8, 3, 1, 1},
            {8, 3, 1, 1}};
  return c;
}

LrcnConfig LrcnConfig::paper() {
  LrcnConfig c;
  c.frames_per_video = 18;
  c.crop_h = 227;
  c.crop_w = 227;
  c.source_h = 240;
  c.source_w = 320;
  c.conv = {{96, 11, 4, 0},
            {256, 5, 1, 2},
            {384, 3, 1, 1},
            {384, 3, 1, 1},
            {256, 3, 1, 1}};
  c.pool_k = 3;
  c.pool_stride = 2;
  c.fc1_width = 4096;
  c.lstm_hidden = 256;
  c.epochs = 12;
  c.iterations_per_epoch = 30000;
  c.batch_size = 12;
  c.lr = 1e-3;
  c.dropout_fc1 = 0.9;
  c.dropout_lstm = 0.5;
  return c;
}

// --- model -----------------------------------------------------------------

template <typename T>
std::vector<ParamTensor<T>*> Model<T>::params() {
  std::vector<ParamTensor<T>*> out;
  out.reserve(kParamCount);
  for (auto& c : convs) {
    out.push_back(&c.weight);
    out.push_back(&c.bias);
  }
  out.push_back(&fc1.weight);
  out.push_back(&fc1.bias);
  out.push_back(&lstm.wx);
  out.push_back(&lstm.wh);
  out.push_back(&lstm.b);
  out.push_back(&fc2.weight);
  out.push_back(&fc2.bias);
  return out;
}

template <typename T>
std::vector<const ParamTensor<T>*> Model<T>::params() const {
  auto mutable_params = const_cast<Model<T>*>(this)->params();
  return {mutable_params.begin(), mutable_params.end()};
}

template <typename T>
GradBuffer<T>::GradBuffer(const Model<T>& m) {
  for (const ParamTensor<T>* p : m.params())
    g.emplace_back(p->value.shape(), T(0));
}

template <typename T>
void GradBuffer<T>::zero() {
  for (auto& t : g) t.fill(T(0));
}

StagePlan plan_stages(const LrcnConfig& config) {
  config.validate();
  StagePlan plan;
  std::size_t c = config.channels, h = config.crop_h, w = config.crop_w;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& spec = config.conv[i];
    const std::string name = "conv" + std::to_string(i + 1);
    StageDims d;
    d.in_c = c;
    d.in_h = h;
    d.in_w = w;
    const std::size_t k = spec.kernel;
    require(k <= h + 2 * spec.pad && k <= w + 2 * spec.pad,
            "build_model: " + name + ": kernel does not fit input");
    require((h + 2 * spec.pad - k) % spec.stride == 0 &&
                (w + 2 * spec.pad - k) % spec.stride == 0,
            "build_model: " + name + ": non-integral output size");
    d.conv_h = (h + 2 * spec.pad - k) / spec.stride + 1;
    d.conv_w = (w + 2 * spec.pad - k) / spec.stride + 1;
    h = d.conv_h;
    w = d.conv_w;
    d.pooled = stage_pooled(i);
    if (d.pooled) {
      require(static_cast<std::size_t>(config.pool_k) <= h &&
                  static_cast<std::size_t>(config.pool_k) <= w,
              "build_model: pool after " + name + ": window larger than input");
      require((h - config.pool_k) % config.pool_stride == 0 &&
                  (w - config.pool_k) % config.pool_stride == 0,
              "build_model: pool after " + name + ": non-integral output");
      h = (h - config.pool_k) / config.pool_stride + 1;
      w = (w - config.pool_k) / config.pool_stride + 1;
    }
    d.lrned = stage_lrned(i);
    d.out_c = spec.filters;
    d.out_h = h;
    d.out_w = w;
    plan.stages[i] = d;
    c = spec.filters;
  }
  plan.fc1_input_dim = c * h * w;
  return plan;
}

std::size_t StagePlan::parameter_count(const LrcnConfig& config) const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& spec = config.conv[i];
    total += std::size_t(spec.filters) * stages[i].in_c * spec.kernel *
                 spec.kernel +
             spec.filters;
  }
  const std::size_t fc1w = config.fc1_width, hid = config.lstm_hidden;
  total += fc1w * fc1_input_dim + fc1w;
  total += 4 * hid * (fc1w + hid + 1);
  total += 2 * (config.lstm_identity ? fc1w : hid) + 2;
  return total;
}

template <typename T>
Model<T> build_model(const LrcnConfig& config, Rng& rng) {
  const StagePlan plan = plan_stages(config);
  Model<T> m;
  m.config = config;
  m.stage_dims = plan.stages;
  m.fc1_input_dim = plan.fc1_input_dim;

  for (std::size_t i = 0; i < 5; ++i) {
    const auto& spec = config.conv[i];
    const std::string name = "conv" + std::to_string(i + 1);
    const std::size_t c = plan.stages[i].in_c;
    const std::size_t k = spec.kernel;
    m.convs[i].weight = ParamTensor<T>(
        name + ".w", {static_cast<std::size_t>(spec.filters), c, k, k});
    m.convs[i].bias =
        ParamTensor<T>(name + ".b", {static_cast<std::size_t>(spec.filters)});
    he_init(m.convs[i].weight.value, c * k * k, rng);
    m.convs[i].bias.value.fill(T(0));
  }

  const std::size_t fc1w = config.fc1_width, hid = config.lstm_hidden;
  m.fc1.weight = ParamTensor<T>("fc1.w", {fc1w, m.fc1_input_dim});
  m.fc1.bias = ParamTensor<T>("fc1.b", {fc1w});
  he_init(m.fc1.weight.value, m.fc1_input_dim, rng);
  m.fc1.bias.value.fill(T(0));

  m.lstm.wx = ParamTensor<T>("lstm.wx", {4 * hid, fc1w});
  m.lstm.wh = ParamTensor<T>("lstm.wh", {4 * hid, hid});
  m.lstm.b = ParamTensor<T>("lstm.b", {4 * hid});
  he_init(m.lstm.wx.value, fc1w, rng);
  he_init(m.lstm.wh.value, hid, rng);
  m.lstm.b.value.fill(T(0));
  for (std::size_t u = 0; u < hid; ++u)
    m.lstm.b.value[hid + u] = T(1);  // forget-gate bias

  const std::size_t fc2_in = config.lstm_identity ? fc1w : hid;
  m.fc2.weight = ParamTensor<T>("fc2.w", {2, fc2_in});
  m.fc2.bias = ParamTensor<T>("fc2.b", {2});
  he_init(m.fc2.weight.value, fc2_in, rng);
  m.fc2.bias.value.fill(T(0));
  return m;
}

// --- forward ---------------------------------------------------------------

namespace {

template <typename T>
Tensor<T> frame_to_tensor(const Image& img) {
  if constexpr (std::is_same_v<T, double>) return img;
  return img.template cast<T>();
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& x) {
  Tensor<T> out({x.size()});
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
  return out;
}

// one frame through the stack; advances the recurrent state in place
template <typename T>
Tensor<T> forward_frame(const Model<T>& m, const Tensor<T>& frame,
                        LstmState<T>& state, Mode mode, Rng* rng,
                        FrameTrace<T>* trace) {
  const LrcnConfig& cfg = m.config;
  require(frame.rank() == 3 &&
              frame.dim(0) == static_cast<std::size_t>(cfg.channels) &&
              frame.dim(1) == static_cast<std::size_t>(cfg.crop_h) &&
              frame.dim(2) == static_cast<std::size_t>(cfg.crop_w),
          "forward_video: frame shape " + frame.shape_str() +
              " does not match configured input crop");
  const bool train = mode == Mode::train;
  require(!train || rng != nullptr,
          "forward_video: train mode needs a dropout rng");

  Tensor<T> cur = frame;
  for (std::size_t i = 0; i < 5; ++i) {
    ConvStageTrace<T>* st = trace ? &trace->stages[i] : nullptr;
    if (st) st->conv_in = cur;
    Tensor<T> z = ops::conv2d_forward(cur, m.convs[i].weight.value,
                                      m.convs[i].bias.value,
                                      cfg.conv[i].stride, cfg.conv[i].pad);
    if (st) st->conv_out = z;
    cur = ops::relu_forward(z);
    if (stage_pooled(i)) {
      auto pooled = ops::maxpool2d_forward(cur, cfg.pool_k, cfg.pool_stride);
      cur = pooled.y;
      if (st) st->pool = std::move(pooled);
    }
    if (stage_lrned(i)) {
      if (st) st->lrn_in = cur;
      Tensor<T> den;
      cur = ops::lrn_forward(cur, cfg.lrn_n, cfg.lrn_alpha, cfg.lrn_beta,
                             cfg.lrn_k, st ? &st->lrn_den : &den);
    }
  }

  Tensor<T> fc1_in = flatten(cur);
  if (trace) trace->fc1_in = fc1_in;
  Tensor<T> fc1_out =
      ops::dense_forward(fc1_in, m.fc1.weight.value, m.fc1.bias.value);
  if (trace) trace->fc1_out = fc1_out;
  Tensor<T> fc1_act = ops::relu_forward(fc1_out);
  if (trace) trace->fc1_act = fc1_act;

  Rng unused(0);
  Tensor<T> mask1;
  Tensor<T> lstm_in = ops::dropout_forward(fc1_act, cfg.dropout_fc1, train,
                                           rng ? *rng : unused, &mask1);
  if (trace) {
    trace->drop1_mask = std::move(mask1);
    trace->lstm_in = lstm_in;
  }

  Tensor<T> h_new;
  if (cfg.lstm_identity) {
    h_new = lstm_in;
    state.hidden = h_new;
  } else {
    state = ops::lstm_step(lstm_in, state, m.lstm,
                           trace ? &trace->lstm : nullptr);
    h_new = state.hidden;
  }
  if (trace) trace->h = h_new;

  Tensor<T> mask2;
  Tensor<T> fc2_in = ops::dropout_forward(h_new, cfg.dropout_lstm, train,
                                          rng ? *rng : unused, &mask2);
  if (trace) {
    trace->drop2_mask = std::move(mask2);
    trace->fc2_in = fc2_in;
  }
  Tensor<T> logits =
      ops::dense_forward(fc2_in, m.fc2.weight.value, m.fc2.bias.value);
  Tensor<T> probs = ops::softmax_forward(logits);
  if (trace) trace->probs = probs;
  return probs;
}

template <typename T>
PopularityPrediction prediction_from_probs(const std::vector<Tensor<T>>& ps) {
  double p0 = 0, p1 = 0;
  for (const auto& p : ps) {
    p0 += static_cast<double>(p[0]);
    p1 += static_cast<double>(p[1]);
  }
  const double total = p0 + p1;
  PopularityPrediction out;
  out.probs = {p0 / total, p1 / total};
  out.label = out.probs[1] >= out.probs[0] ? 1 : 0;
  return out;
}

}  // namespace

template <typename T>
PopularityPrediction forward_video(const Model<T>& model,
                                   const FrameSequence& frames, Mode mode,
                                   Rng* dropout_rng) {
  require(!frames.empty(), "forward_video: empty frame sequence");
  const std::size_t hid = model.config.lstm_identity
                              ? model.config.fc1_width
                              : model.config.lstm_hidden;
  LstmState<T> state{Tensor<T>({hid}, T(0)), Tensor<T>({hid}, T(0))};
  std::vector<Tensor<T>> probs;
  probs.reserve(frames.size());
  for (const Image& img : frames)
    probs.push_back(forward_frame(model, frame_to_tensor<T>(img), state, mode,
                                  dropout_rng,
                                  static_cast<FrameTrace<T>*>(nullptr)));
  return prediction_from_probs(probs);
}

template <typename T>
VideoTrace<T> forward_video_trace(const Model<T>& model,
                                  const FrameSequence& frames, Rng& rng) {
  require(!frames.empty(), "forward_video: empty frame sequence");
  const std::size_t hid = model.config.lstm_identity
                              ? model.config.fc1_width
                              : model.config.lstm_hidden;
  LstmState<T> state{Tensor<T>({hid}, T(0)), Tensor<T>({hid}, T(0))};
  VideoTrace<T> trace;
  trace.frames.resize(frames.size());
  Tensor<T> mean({2}, T(0));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    Tensor<T> p = forward_frame(model, frame_to_tensor<T>(frames[t]), state,
                                Mode::train, &rng, &trace.frames[t]);
    mean[0] += p[0];
    mean[1] += p[1];
  }
  mean[0] /= static_cast<T>(frames.size());
  mean[1] /= static_cast<T>(frames.size());
  trace.mean_probs = mean;
  return trace;
}

// --- backward ---------------------------------------------------------------

template <typename T>
void backward_video(const Model<T>& model, const VideoTrace<T>& trace,
                    const Tensor<T>& dmean_probs, GradBuffer<T>& grads) {
  const LrcnConfig& cfg = model.config;
  const std::size_t frames = trace.frames.size();
  const T inv_t = T(1) / static_cast<T>(frames);

  const std::size_t hid = cfg.lstm_identity ? cfg.fc1_width : cfg.lstm_hidden;
  Tensor<T> dh_carry({hid}, T(0)), dc_carry({hid}, T(0));

  for (std::size_t ti = frames; ti-- > 0;) {
    const FrameTrace<T>& ft = trace.frames[ti];

    Tensor<T> dprobs({2});
    dprobs[0] = dmean_probs[0] * inv_t;
    dprobs[1] = dmean_probs[1] * inv_t;
    Tensor<T> dlogits({2}, T(0));
    ops::softmax_backward(ft.probs, dprobs, dlogits);

    Tensor<T> dfc2_in(ft.fc2_in.shape(), T(0));
    ops::dense_backward(ft.fc2_in, model.fc2.weight.value, dlogits, dfc2_in,
                        grads.g[kFc2W], grads.g[kFc2B]);

    Tensor<T> dh(ft.h.shape(), T(0));
    ops::dropout_backward(ft.drop2_mask, dfc2_in, dh);
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh_carry[i];

    Tensor<T> dlstm_in(ft.lstm_in.shape(), T(0));
    if (cfg.lstm_identity) {
      dlstm_in = dh;
      dh_carry.fill(T(0));
    } else {
      Tensor<T> dh_prev(dh.shape(), T(0)), dc_prev(dh.shape(), T(0));
      ops::lstm_step_backward(ft.lstm, model.lstm.wx.value,
                              model.lstm.wh.value, dh, dc_carry, dlstm_in,
                              dh_prev, dc_prev, grads.g[kLstmWx],
                              grads.g[kLstmWh], grads.g[kLstmB]);
      dh_carry = std::move(dh_prev);
      dc_carry = std::move(dc_prev);
    }

    Tensor<T> dfc1_act(ft.fc1_act.shape(), T(0));
    ops::dropout_backward(ft.drop1_mask, dlstm_in, dfc1_act);
    Tensor<T> dfc1_out(ft.fc1_out.shape(), T(0));
    ops::relu_backward(ft.fc1_out, dfc1_act, dfc1_out);
    Tensor<T> dfc1_in(ft.fc1_in.shape(), T(0));
    ops::dense_backward(ft.fc1_in, model.fc1.weight.value, dfc1_out, dfc1_in,
                        grads.g[kFc1W], grads.g[kFc1B]);

    // unflatten to the last stage's output shape
    const StageDims& last = model.stage_dims[4];
    Tensor<T> dcur({last.out_c, last.out_h, last.out_w});
    for (std::size_t i = 0; i < dcur.size(); ++i) dcur[i] = dfc1_in[i];

    for (std::size_t i = 5; i-- > 0;) {
      const ConvStageTrace<T>& st = ft.stages[i];
      if (stage_lrned(i)) {
        Tensor<T> dlrn_in(st.lrn_in.shape(), T(0));
        ops::lrn_backward(st.lrn_in, st.lrn_den, cfg.lrn_n, cfg.lrn_alpha,
                          cfg.lrn_beta, dcur, dlrn_in);
        dcur = std::move(dlrn_in);
      }
      if (stage_pooled(i)) {
        Tensor<T> dpool_in(st.conv_out.shape(), T(0));
        ops::maxpool2d_backward(st.pool, dcur, dpool_in);
        dcur = std::move(dpool_in);
      }
      Tensor<T> dconv_out(st.conv_out.shape(), T(0));
      ops::relu_backward(st.conv_out, dcur, dconv_out);
      Tensor<T> dconv_in(st.conv_in.shape(), T(0));
      ops::conv2d_backward(st.conv_in, model.convs[i].weight.value,
                           cfg.conv[i].stride, cfg.conv[i].pad, dconv_out,
                           dconv_in, grads.g[conv_w_index(i)],
                           grads.g[conv_b_index(i)]);
      dcur = std::move(dconv_in);
    }
  }
}

// --- augmentation -----------------------------------------------------------

AugmentDecision draw_augment(std::size_t src_h, std::size_t src_w,
                             std::size_t crop_h, std::size_t crop_w,
                             Rng& rng) {
  require(src_h >= crop_h && src_w >= crop_w,
          "augment: source frame smaller than crop");
  AugmentDecision d;
  d.off_y = rng.uniform_int(src_h - crop_h + 1);
  d.off_x = rng.uniform_int(src_w - crop_w + 1);
  d.mirror = rng.coin();
  return d;
}

FrameSequence apply_augment(const FrameSequence& frames,
                            const AugmentDecision& d, std::size_t crop_h,
                            std::size_t crop_w) {
  FrameSequence out;
  out.reserve(frames.size());
  for (const Image& f : frames) {
    Image c = crop(f, d.off_y, d.off_x, crop_h, crop_w);
    out.push_back(d.mirror ? mirror_horizontal(c) : std::move(c));
  }
  return out;
}

std::vector<FrameSequence> tta_crops(const FrameSequence& frames,
                                     std::size_t crop_h, std::size_t crop_w) {
  require(!frames.empty(), "tta_crops: empty frame sequence");
  const std::size_t src_h = frames[0].dim(1), src_w = frames[0].dim(2);
  require(src_h >= crop_h && src_w >= crop_w,
          "tta_crops: source frame smaller than crop");
  const std::size_t ey = src_h - crop_h, ex = src_w - crop_w;
  const std::array<std::pair<std::size_t, std::size_t>, 5> offsets = {
      {{0, 0}, {0, ex}, {ey, 0}, {ey, ex}, {ey / 2, ex / 2}}};

  std::vector<FrameSequence> out;
  out.reserve(10);
  for (int mirrored = 0; mirrored < 2; ++mirrored)
    for (const auto& [oy, ox] : offsets) {
      FrameSequence seq;
      seq.reserve(frames.size());
      for (const Image& f : frames) {
        Image c = crop(f, oy, ox, crop_h, crop_w);
        seq.push_back(mirrored ? mirror_horizontal(c) : std::move(c));
      }
      out.push_back(std::move(seq));
    }
  return out;
}

template <typename T>
PopularityPrediction predict(const Model<T>& model,
                             const FrameSequence& source_frames) {
  const auto reps = tta_crops(source_frames, model.config.crop_h,
                              model.config.crop_w);
  std::array<double, 2> acc = {0.0, 0.0};
  for (const auto& rep : reps) {
    const auto p = forward_video(model, rep, Mode::eval);
    acc[0] += p.probs[0];
    acc[1] += p.probs[1];
  }
  PopularityPrediction out;
  const double total = acc[0] + acc[1];
  out.probs = {acc[0] / total, acc[1] / total};
  out.label = out.probs[1] >= out.probs[0] ? 1 : 0;
  return out;
}

// --- training ----------------------------------------------------------------

template <typename T>
TrainResult train_model(Model<T>& model,
                        const std::vector<const FrameSequence*>& videos,
                        const std::vector<int>& labels,
                        const std::function<void(int, double)>& on_iter) {
  const LrcnConfig& cfg = model.config;
  require(!videos.empty() && videos.size() == labels.size(),
          "train: empty or mismatched training set");
  for (const FrameSequence* v : videos)
    require(!v->empty() &&
                (*v)[0].dim(1) == static_cast<std::size_t>(cfg.source_h) &&
                (*v)[0].dim(2) == static_cast<std::size_t>(cfg.source_w),
            "train: video frames must be at the configured source size");

  double positive = 0;
  for (int l : labels) positive += l;
  const double ratio = positive / static_cast<double>(labels.size());
  if (ratio < 0.4 || ratio > 0.6)
    std::cerr << "warning: training labels are unbalanced (popular ratio "
              << ratio << ")\n";

  const int total_iterations = cfg.epochs * cfg.iterations_per_epoch;
  const int batch = cfg.batch_size;
  Rng batch_rng = Rng(cfg.seed).fork(1);
  auto params = model.params();

  TrainResult result;
  result.loss_curve.reserve(total_iterations);

  std::vector<GradBuffer<T>> buffers;
  for (int i = 0; i < batch; ++i) buffers.emplace_back(model);
  std::vector<double> member_loss(batch);
  std::vector<std::size_t> picks(batch);

  for (int iter = 0; iter < total_iterations; ++iter) {
    for (int i = 0; i < batch; ++i)
      picks[i] = batch_rng.uniform_int(videos.size());

    // deterministic member rngs drawn up front; members run in parallel
    std::vector<Rng> member_rng;
    member_rng.reserve(batch);
    for (int i = 0; i < batch; ++i)
      member_rng.push_back(Rng(cfg.seed).fork(
          2, static_cast<std::uint64_t>(iter) * batch + i));

#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < batch; ++i) {
      buffers[i].zero();
      Rng& rng = member_rng[i];
      const FrameSequence& src = *videos[picks[i]];
      const auto decision =
          draw_augment(cfg.source_h, cfg.source_w, cfg.crop_h, cfg.crop_w, rng);
      const FrameSequence cropped =
          apply_augment(src, decision, cfg.crop_h, cfg.crop_w);
      VideoTrace<T> trace = forward_video_trace(model, cropped, rng);
      const int label = labels[picks[i]];
      member_loss[i] = static_cast<double>(
          ops::loss_forward(trace.mean_probs, label, cfg.loss));
      Tensor<T> dmean = ops::loss_backward(trace.mean_probs, label, cfg.loss);
      dmean[0] /= static_cast<T>(batch);
      dmean[1] /= static_cast<T>(batch);
      backward_video(model, trace, dmean, buffers[i]);
    }

    double loss = 0;
    for (int i = 0; i < batch; ++i) loss += member_loss[i];
    loss /= batch;
    require(std::isfinite(loss), "train: non-finite loss at iteration " +
                                     std::to_string(iter));

    // fixed accumulation order keeps fast-precision runs bit-identical
    for (int i = 0; i < batch; ++i)
      for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor<T>& dst = params[p]->grad;
        const Tensor<T>& src = buffers[i].g[p];
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += src[e];
      }
    sgd_step(params, cfg.lr, cfg.momentum);

    result.loss_curve.push_back(loss);
    if (on_iter) on_iter(iter, loss);
  }
  return result;
}

// --- persistence ---------------------------------------------------------

template <typename T>
void save_model(const std::filesystem::path& path, const Model<T>& model) {
  Checkpoint checkpoint;
  checkpoint.meta = model.config.to_json();
  for (const ParamTensor<T>* p : model.params())
    checkpoint.tensors.push_back({p->name, p->value});
  save_checkpoint(path, checkpoint);
}

LrcnConfig config_from_checkpoint(const Checkpoint& checkpoint) {
  require(!checkpoint.meta.empty(), "checkpoint has no configuration block");
  return LrcnConfig::from_json(checkpoint.meta);
}

bool checkpoint_is_double(const Checkpoint& checkpoint) {
  require(!checkpoint.tensors.empty(), "checkpoint has no tensors");
  return std::holds_alternative<Tensor<double>>(checkpoint.tensors[0].data);
}

template <typename T>
Model<T> model_from_checkpoint(const Checkpoint& checkpoint) {
  const LrcnConfig config = config_from_checkpoint(checkpoint);
  Rng rng(0);
  Model<T> model = build_model<T>(config, rng);
  auto params = model.params();
  require(checkpoint.tensors.size() == params.size(),
          "checkpoint: wrong tensor count");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const NamedTensor& nt = checkpoint.tensors[i];
    require(nt.name == params[i]->name,
            "checkpoint: unexpected tensor '" + nt.name + "'");
    require(std::holds_alternative<Tensor<T>>(nt.data),
            "checkpoint: precision mismatch for tensor '" + nt.name + "'");
    const Tensor<T>& loaded = std::get<Tensor<T>>(nt.data);
    require(loaded.same_shape(params[i]->value),
            "checkpoint: shape mismatch for tensor '" + nt.name + "'");
    params[i]->value = loaded;
  }
  return model;
}

// --- explicit instantiation -----------------------------------------------

#define POPCAST_INSTANTIATE_LRCN(T)                                          \
  template struct Model<T>;                                                  \
  template struct GradBuffer<T>;                                             \
  template Model<T> build_model<T>(const LrcnConfig&, Rng&);                 \
  template PopularityPrediction forward_video<T>(                            \
      const Model<T>&, const FrameSequence&, Mode, Rng*);                    \
  template VideoTrace<T> forward_video_trace<T>(const Model<T>&,             \
                                                const FrameSequence&, Rng&); \
  template void backward_video<T>(const Model<T>&, const VideoTrace<T>&,    \
                                  const Tensor<T>&, GradBuffer<T>&);         \
  template PopularityPrediction predict<T>(const Model<T>&,                 \
                                           const FrameSequence&);            \
  template TrainResult train_model<T>(                                       \
      Model<T>&, const std::vector<const FrameSequence*>&,                   \
      const std::vector<int>&, const std::function<void(int, double)>&);     \
  template void save_model<T>(const std::filesystem::path&, const Model<T>&);\
  template Model<T> model_from_checkpoint<T>(const Checkpoint&);

POPCAST_INSTANTIATE_LRCN(float)
POPCAST_INSTANTIATE_LRCN(double)

}  // namespace popcast::lrcn
