// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "megtext/model/tokenizer.hpp"
#include "megtext/nn/layers.hpp"

namespace megtext::model {

struct ModelDims {
  std::string name;
  int d_model = 64;
  int heads = 4;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int ffn = 256;
  int encoder_capacity = 100;  // encoder frames
  int decoder_capacity = 32;   // decoder positions
  int stem_channels = 16;      // feature channels consumed by the original input stem

  /// Input samples that the stride-2 stem maps onto exactly `encoder_capacity` frames.
  int input_window() const { return 2 * encoder_capacity; }
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelDims& d);
void from_json(const nlohmann::json& j, ModelDims& d);

/// conv(k3, s1, p1) -> GELU -> conv(k3, s2, p1); the encoder applies the
/// following GELU. Used both for the backbone's own stem and for the neural frontend.
struct InputStem {
  nn::Conv1dLayer conv1, conv2;

  static InputStem create(const std::string& name, int in_channels, int d_model, std::uint64_t seed);
  int in_channels() const { return conv1.in_channels(); }
  int d_model() const { return conv2.out_channels(); }
  nn::Var forward(nn::Graph& g, nn::Var x, int batch) const;
  static int output_frames(int t) { return (t + 1) / 2; }
};

struct AttentionLayer {
  nn::LinearLayer q, k, v, o;
  int heads = 1;
};

struct EncoderBlock {
  nn::LayerNormLayer ln_attn;
  AttentionLayer attn;
  nn::LayerNormLayer ln_mlp;
  nn::LinearLayer fc1, fc2;
};

struct DecoderBlock {
  nn::LayerNormLayer ln_self;
  AttentionLayer self_attn;
  nn::LayerNormLayer ln_cross;
  AttentionLayer cross_attn;
  nn::LayerNormLayer ln_mlp;
  nn::LinearLayer fc1, fc2;
};

/// Cross-attention keys and values per decoder layer. `batch` is the number of
/// encoded sequences; a single sequence is shared by every decoder row.
struct EncoderMemory {
  std::vector<nn::Var> keys, values;
  int batch = 1;
};

/// Pre-LN transformer encoder-decoder with a convolutional input stem, fixed
/// sinusoidal encoder positions, learned decoder positions and output logits
/// tied to the token embedding.
class Seq2SeqModel {
 public:
  Seq2SeqModel(const ModelDims& dims, Tokenizer tokenizer, std::uint64_t seed);
  Seq2SeqModel(Seq2SeqModel&&) noexcept = default;
  Seq2SeqModel& operator=(Seq2SeqModel&&) noexcept = default;
  Seq2SeqModel(const Seq2SeqModel&) = delete;
  Seq2SeqModel& operator=(const Seq2SeqModel&) = delete;

  /// Deep copy with independent parameters.
  Seq2SeqModel clone() const;

  const ModelDims& dims() const { return dims_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  int vocab_size() const { return tokenizer_.vocab_size(); }

  const InputStem& stem() const { return stem_; }
  /// Installs a new input stem; its width must equal d_model.
  void set_stem(InputStem stem);
  std::vector<EncoderBlock>& encoder_blocks() { return encoder_; }
  const std::vector<EncoderBlock>& encoder_blocks() const { return encoder_; }

  /// input is (batch*T) x in_channels with T = input_window(); returns
  /// (batch*encoder_capacity) x d_model.
  nn::Var encode(nn::Graph& g, const nn::Mat& input, int batch) const;
  EncoderMemory memory(nn::Graph& g, nn::Var encoded, int batch) const;
  /// tokens holds `batch` rows of equal length; returns (batch*len) x vocab logits.
  nn::Var decode(nn::Graph& g, const EncoderMemory& mem, const std::vector<int>& tokens, int batch) const;

  /// Every parameter, including adapters.
  std::vector<nn::ParamPtr> parameters() const;
  std::size_t parameter_count() const;
  nn::ParamPtr find(const std::string& name) const;

  /// Visits every parameter slot, allowing replacement.
  void visit_slots(const std::function<void(nn::ParamPtr&)>& fn);

 private:
  Seq2SeqModel() = default;

  ModelDims dims_;
  Tokenizer tokenizer_;
  InputStem stem_;
  nn::ParamPtr enc_positional_;
  std::vector<EncoderBlock> encoder_;
  nn::LayerNormLayer enc_ln_post_;
  nn::ParamPtr token_embedding_;
  nn::ParamPtr dec_positional_;
  std::vector<DecoderBlock> decoder_;
  nn::LayerNormLayer dec_ln_;
};

/// Whisper's sinusoidal table: sin over the first half of the columns, cos over the second.
nn::Mat sinusoids(int length, int channels);

/// Name prefixes used for parameter groups.
inline constexpr const char* kStemPrefix = "stem.";
inline constexpr const char* kFrontendPrefix = "frontend.";
inline constexpr const char* kEncoderPrefix = "encoder.";
inline constexpr const char* kDecoderPrefix = "decoder.";

}  // namespace megtext::model
