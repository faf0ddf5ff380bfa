#pragma once
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "popcast/checkpoint.hpp"
#include "popcast/image.hpp"
#include "popcast/layers.hpp"
#include "popcast/ops.hpp"
#include "popcast/rng.hpp"

namespace popcast::lrcn {

using ops::LossKind;

enum class Mode { train, eval };

struct ConvSpec {
  int filters, kernel, stride, pad;
};

// Network and training configuration. The paper-scale preset is the real
// thing; the mini preset is what tests and desk-scale experiments run.
struct LrcnConfig {
  int frames_per_video = 6;
  int channels = 3;
  int crop_h = 32, crop_w = 32;
  int source_h = 40, source_w = 40;
  std::vector<ConvSpec> conv;           // exactly 5 entries
  int pool_k = 2, pool_stride = 2;      // pools sit after conv1, conv2, conv5
  int lrn_n = 5;                        // LRN after the first two pools
  double lrn_alpha = 1e-4, lrn_beta = 0.75, lrn_k = 2.0;
  int fc1_width = 32;
  int lstm_hidden = 16;
  int epochs = 2, iterations_per_epoch = 300, batch_size = 12;
  LossKind loss = LossKind::cross_entropy;
  double lr = 3e-3, momentum = 0.9;
  double dropout_fc1 = 0.25, dropout_lstm = 0.1;
  std::uint64_t seed = 1234;
  bool lstm_identity = false;  // diagnostic: bypass the recurrent unit

  void validate() const;
  std::string to_json() const;  // canonical (sorted keys, compact)
  static LrcnConfig from_json(const std::string& text);

  static LrcnConfig mini();
  static LrcnConfig paper();
};

struct PopularityPrediction {
  std::array<double, 2> probs;  // (unpopular, popular), sums to 1
  int label;                    // argmax, tie goes to popular
};

// per-stage dimensions inferred at build time
struct StageDims {
  std::size_t in_c, in_h, in_w;
  std::size_t conv_h, conv_w;
  bool pooled, lrned;
  std::size_t out_c, out_h, out_w;
};

template <typename T>
struct Model {
  LrcnConfig config;
  std::array<LayerParams<T>, 5> convs;
  LayerParams<T> fc1, fc2;
  LstmParams<T> lstm;
  std::array<StageDims, 5> stage_dims;
  std::size_t fc1_input_dim = 0;

  std::vector<ParamTensor<T>*> params();
  std::vector<const ParamTensor<T>*> params() const;
};

inline constexpr std::size_t kParamCount = 17;
inline constexpr std::size_t kFc1W = 10, kFc1B = 11, kLstmWx = 12,
                             kLstmWh = 13, kLstmB = 14, kFc2W = 15,
                             kFc2B = 16;
constexpr std::size_t conv_w_index(std::size_t i) { return 2 * i; }
constexpr std::size_t conv_b_index(std::size_t i) { return 2 * i + 1; }

// gradient sink aligned with Model::params() order, one per batch member
template <typename T>
struct GradBuffer {
  std::vector<Tensor<T>> g;
  explicit GradBuffer(const Model<T>& m);
  void zero();
};

// shape inference through the stack without allocating parameters;
// throws naming the first stage whose geometry does not work out
struct StagePlan {
  std::array<StageDims, 5> stages;
  std::size_t fc1_input_dim = 0;
  std::size_t parameter_count(const LrcnConfig& config) const;
};
StagePlan plan_stages(const LrcnConfig& config);

template <typename T>
Model<T> build_model(const LrcnConfig& config, Rng& rng);

// --- forward / backward ---------------------------------------------------

template <typename T>
struct ConvStageTrace {
  Tensor<T> conv_in, conv_out;  // conv_out is pre-relu
  ops::MaxPoolOut<T> pool;
  Tensor<T> lrn_in, lrn_den;
};

template <typename T>
struct FrameTrace {
  std::array<ConvStageTrace<T>, 5> stages;
  Tensor<T> fc1_in, fc1_out, fc1_act;
  Tensor<T> drop1_mask, lstm_in;
  ops::LstmStepCache<T> lstm;
  Tensor<T> h;
  Tensor<T> drop2_mask, fc2_in;
  Tensor<T> probs;
};

template <typename T>
struct VideoTrace {
  std::vector<FrameTrace<T>> frames;
  Tensor<T> mean_probs;
};

// Sequential per-frame pass; the LSTM state starts at zero and is carried
// across the whole sequence. Output is the frame-average of the per-frame
// softmax vectors. Train mode draws dropout masks from dropout_rng.
template <typename T>
PopularityPrediction forward_video(const Model<T>& model,
                                   const FrameSequence& frames, Mode mode,
                                   Rng* dropout_rng = nullptr);

template <typename T>
VideoTrace<T> forward_video_trace(const Model<T>& model,
                                  const FrameSequence& frames, Rng& rng);

// backpropagation through time across all frames; parameter gradients are
// accumulated into the buffer
template <typename T>
void backward_video(const Model<T>& model, const VideoTrace<T>& trace,
                    const Tensor<T>& dmean_probs, GradBuffer<T>& grads);

// --- augmentation ----------------------------------------------------------

struct AugmentDecision {
  std::size_t off_y, off_x;
  bool mirror;
};

// one crop offset + one mirror flag per video per draw; draw order is
// off_y, off_x, mirror
AugmentDecision draw_augment(std::size_t src_h, std::size_t src_w,
                             std::size_t crop_h, std::size_t crop_w, Rng& rng);

FrameSequence apply_augment(const FrameSequence& frames,
                            const AugmentDecision& d, std::size_t crop_h,
                            std::size_t crop_w);

// exactly 10 sequences: {TL, TR, BL, BR, center} x {plain, mirrored},
// in that order; the crop is applied uniformly to all frames
std::vector<FrameSequence> tta_crops(const FrameSequence& frames,
                                     std::size_t crop_h, std::size_t crop_w);

// full test-time augmentation: average forward_video over the 10
// representations, then argmax (tie goes to popular)
template <typename T>
PopularityPrediction predict(const Model<T>& model,
                             const FrameSequence& source_frames);

// --- training ----------------------------------------------------------

struct TrainResult {
  std::vector<double> loss_curve;  // one entry per iteration
};

template <typename T>
TrainResult train_model(Model<T>& model,
                        const std::vector<const FrameSequence*>& videos,
                        const std::vector<int>& labels,
                        const std::function<void(int, double)>& on_iter = {});

// --- persistence ---------------------------------------------------------

template <typename T>
void save_model(const std::filesystem::path& path, const Model<T>& model);

LrcnConfig config_from_checkpoint(const Checkpoint& checkpoint);
bool checkpoint_is_double(const Checkpoint& checkpoint);

template <typename T>
Model<T> model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace popcast::lrcn
