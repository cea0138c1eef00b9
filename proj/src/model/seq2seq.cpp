// SPDX-License-Identifier: Apache-2.0
#include "megtext/model/seq2seq.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "megtext/error.hpp"
#include "megtext/nn/ops.hpp"

namespace megtext::model {

using nn::Graph;
using nn::Mat;
using nn::ParamPtr;
using nn::Var;

void ModelDims::validate() const {
  if (d_model <= 0 || heads <= 0 || d_model % heads != 0)
    throw ConfigError("d_model must be a positive multiple of heads");
  if (encoder_layers < 0 || decoder_layers < 1 || ffn <= 0) throw ConfigError("invalid layer configuration");
  if (encoder_capacity <= 0) throw ConfigError("encoder frame capacity must be positive");
  if (decoder_capacity < 6) throw ConfigError("decoder capacity must hold the prompt and at least one word");
  if (stem_channels <= 0) throw ConfigError("stem channels must be positive");
  if (d_model % 2 != 0) throw ConfigError("d_model must be even for sinusoidal positions");
}

void to_json(nlohmann::json& j, const ModelDims& d) {
  j = {{"name", d.name},
       {"d_model", d.d_model},
       {"heads", d.heads},
       {"encoder_layers", d.encoder_layers},
       {"decoder_layers", d.decoder_layers},
       {"ffn", d.ffn},
       {"encoder_capacity", d.encoder_capacity},
       {"decoder_capacity", d.decoder_capacity},
       {"stem_channels", d.stem_channels}};
}

void from_json(const nlohmann::json& j, ModelDims& d) {
  d.name = j.at("name").get<std::string>();
  d.d_model = j.at("d_model").get<int>();
  d.heads = j.at("heads").get<int>();
  d.encoder_layers = j.at("encoder_layers").get<int>();
  d.decoder_layers = j.at("decoder_layers").get<int>();
  d.ffn = j.at("ffn").get<int>();
  d.encoder_capacity = j.at("encoder_capacity").get<int>();
  d.decoder_capacity = j.at("decoder_capacity").get<int>();
  d.stem_channels = j.at("stem_channels").get<int>();
}

Mat sinusoids(int length, int channels) {
  const int half = channels / 2;
  const double inc = std::log(10000.0) / std::max(1, half - 1);
  Mat m(length, channels);
  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < half; ++i) {
      const double a = t * std::exp(-inc * i);
      m(t, i) = static_cast<float>(std::sin(a));
      m(t, half + i) = static_cast<float>(std::cos(a));
    }
  }
  return m;
}

InputStem InputStem::create(const std::string& name, int in_channels, int d_model, std::uint64_t seed) {
  if (in_channels < 1) throw ConfigError("frontend in_channels must be >= 1");
  if (d_model < 1) throw ConfigError("frontend d_model must be >= 1");
  nn::InitRng rng(seed);
  InputStem s;
  s.conv1 = nn::Conv1dLayer::create(name + "conv1", in_channels, d_model, 3, 1, 1, rng);
  s.conv2 = nn::Conv1dLayer::create(name + "conv2", d_model, d_model, 3, 2, 1, rng);
  return s;
}

Var InputStem::forward(Graph& g, Var x, int batch) const {
  return conv2.forward(g, nn::gelu(conv1.forward(g, x, batch)), batch);
}

namespace {

AttentionLayer make_attention(const std::string& name, int d, int heads, nn::InitRng& rng) {
  AttentionLayer a;
  a.q = nn::LinearLayer::create(name + ".q", d, d, true, rng);
  a.k = nn::LinearLayer::create(name + ".k", d, d, false, rng);
  a.v = nn::LinearLayer::create(name + ".v", d, d, true, rng);
  a.o = nn::LinearLayer::create(name + ".o", d, d, true, rng);
  a.heads = heads;
  return a;
}

Var self_attend(Graph& g, const AttentionLayer& a, Var h, int batch, bool causal) {
  Var q = a.q.forward(g, h), k = a.k.forward(g, h), v = a.v.forward(g, h);
  return a.o.forward(g, nn::attention(q, k, v, batch, a.heads, causal));
}

Var mlp(Graph& g, const nn::LinearLayer& fc1, const nn::LinearLayer& fc2, Var h) {
  return fc2.forward(g, nn::gelu(fc1.forward(g, h)));
}

void visit_linear(nn::LinearLayer& l, const std::function<void(ParamPtr&)>& fn) {
  fn(l.weight);
  if (l.bias) fn(l.bias);
  if (l.adapter) {
    fn(l.adapter->a);
    fn(l.adapter->e);
    fn(l.adapter->b);
  }
}

void visit_attention(AttentionLayer& a, const std::function<void(ParamPtr&)>& fn) {
  for (auto* l : {&a.q, &a.k, &a.v, &a.o}) visit_linear(*l, fn);
}

void visit_ln(nn::LayerNormLayer& l, const std::function<void(ParamPtr&)>& fn) {
  fn(l.gamma);
  fn(l.beta);
}

void visit_conv(nn::Conv1dLayer& c, const std::function<void(ParamPtr&)>& fn) {
  fn(c.weight);
  fn(c.bias);
}

}  // namespace

Seq2SeqModel::Seq2SeqModel(const ModelDims& dims, Tokenizer tokenizer, std::uint64_t seed)
    : dims_(dims), tokenizer_(std::move(tokenizer)) {
  dims_.validate();
  if (tokenizer_.vocab_size() <= Tokenizer::kSpecialCount) throw ConfigError("tokenizer has no words");
  nn::InitRng rng(seed);
  const int d = dims_.d_model;
  stem_ = InputStem::create(kStemPrefix, dims_.stem_channels, d, rng());
  enc_positional_ = std::make_shared<nn::Parameter>("encoder.positional", sinusoids(dims_.encoder_capacity, d));
  enc_positional_->trainable = false;
  for (int l = 0; l < dims_.encoder_layers; ++l) {
    const std::string p = "encoder.blocks." + std::to_string(l);
    EncoderBlock b;
    b.ln_attn = nn::LayerNormLayer::create(p + ".ln_attn", d);
    b.attn = make_attention(p + ".attn", d, dims_.heads, rng);
    b.ln_mlp = nn::LayerNormLayer::create(p + ".ln_mlp", d);
    b.fc1 = nn::LinearLayer::create(p + ".fc1", d, dims_.ffn, true, rng);
    b.fc2 = nn::LinearLayer::create(p + ".fc2", dims_.ffn, d, true, rng);
    encoder_.push_back(std::move(b));
  }
  enc_ln_post_ = nn::LayerNormLayer::create("encoder.ln_post", d);
  token_embedding_ =
      std::make_shared<nn::Parameter>("decoder.token_embedding", nn::randn(tokenizer_.vocab_size(), d, 0.02f, rng));
  dec_positional_ =
      std::make_shared<nn::Parameter>("decoder.positional", nn::randn(dims_.decoder_capacity, d, 0.02f, rng));
  for (int l = 0; l < dims_.decoder_layers; ++l) {
    const std::string p = "decoder.blocks." + std::to_string(l);
    DecoderBlock b;
    b.ln_self = nn::LayerNormLayer::create(p + ".ln_self", d);
    b.self_attn = make_attention(p + ".self_attn", d, dims_.heads, rng);
    b.ln_cross = nn::LayerNormLayer::create(p + ".ln_cross", d);
    b.cross_attn = make_attention(p + ".cross_attn", d, dims_.heads, rng);
    b.ln_mlp = nn::LayerNormLayer::create(p + ".ln_mlp", d);
    b.fc1 = nn::LinearLayer::create(p + ".fc1", d, dims_.ffn, true, rng);
    b.fc2 = nn::LinearLayer::create(p + ".fc2", dims_.ffn, d, true, rng);
    decoder_.push_back(std::move(b));
  }
  dec_ln_ = nn::LayerNormLayer::create("decoder.ln", d);
}

void Seq2SeqModel::visit_slots(const std::function<void(ParamPtr&)>& fn) {
  visit_conv(stem_.conv1, fn);
  visit_conv(stem_.conv2, fn);
  fn(enc_positional_);
  for (auto& b : encoder_) {
    visit_ln(b.ln_attn, fn);
    visit_attention(b.attn, fn);
    visit_ln(b.ln_mlp, fn);
    visit_linear(b.fc1, fn);
    visit_linear(b.fc2, fn);
  }
  visit_ln(enc_ln_post_, fn);
  fn(token_embedding_);
  fn(dec_positional_);
  for (auto& b : decoder_) {
    visit_ln(b.ln_self, fn);
    visit_attention(b.self_attn, fn);
    visit_ln(b.ln_cross, fn);
    visit_attention(b.cross_attn, fn);
    visit_ln(b.ln_mlp, fn);
    visit_linear(b.fc1, fn);
    visit_linear(b.fc2, fn);
  }
  visit_ln(dec_ln_, fn);
}

std::vector<ParamPtr> Seq2SeqModel::parameters() const {
  std::vector<ParamPtr> out;
  const_cast<Seq2SeqModel*>(this)->visit_slots([&](ParamPtr& p) { out.push_back(p); });
  return out;
}

std::size_t Seq2SeqModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

ParamPtr Seq2SeqModel::find(const std::string& name) const {
  for (const auto& p : parameters())
    if (p->name == name) return p;
  return nullptr;
}

Seq2SeqModel Seq2SeqModel::clone() const {
  Seq2SeqModel c;
  c.dims_ = dims_;
  c.tokenizer_ = tokenizer_;
  c.stem_ = stem_;
  c.enc_positional_ = enc_positional_;
  c.encoder_ = encoder_;
  c.enc_ln_post_ = enc_ln_post_;
  c.token_embedding_ = token_embedding_;
  c.dec_positional_ = dec_positional_;
  c.decoder_ = decoder_;
  c.dec_ln_ = dec_ln_;
  auto own = [](nn::LinearLayer& l) {
    if (l.adapter) l.adapter = std::make_shared<nn::LowRankAdapter>(*l.adapter);
  };
  for (auto& b : c.encoder_)
    for (auto* l : {&b.attn.q, &b.attn.k, &b.attn.v, &b.attn.o, &b.fc1, &b.fc2}) own(*l);
  for (auto& b : c.decoder_)
    for (auto* l : {&b.self_attn.q, &b.self_attn.k, &b.self_attn.v, &b.self_attn.o, &b.cross_attn.q,
                    &b.cross_attn.k, &b.cross_attn.v, &b.cross_attn.o, &b.fc1, &b.fc2})
      own(*l);
  c.visit_slots([](ParamPtr& p) { p = nn::clone_param(p); });
  return c;
}

void Seq2SeqModel::set_stem(InputStem stem) {
  if (stem.d_model() != dims_.d_model)
    throw ConfigError("frontend width " + std::to_string(stem.d_model()) + " does not match backbone width " +
                      std::to_string(dims_.d_model));
  stem_ = std::move(stem);
}

Var Seq2SeqModel::encode(Graph& g, const Mat& input, int batch) const {
  if (batch < 1 || input.rows() % batch != 0) throw ConfigError("input rows are not a multiple of the batch");
  if (input.cols() != stem_.in_channels())
    throw ConfigError("input has " + std::to_string(input.cols()) + " channels, frontend expects " +
                      std::to_string(stem_.in_channels()));
  const int t_in = static_cast<int>(input.rows() / batch);
  const int frames = InputStem::output_frames(t_in);
  if (frames != dims_.encoder_capacity)
    throw ConfigError("input of " + std::to_string(t_in) + " samples gives " + std::to_string(frames) +
                      " frames, encoder expects " + std::to_string(dims_.encoder_capacity));
  Var x = nn::gelu(stem_.forward(g, g.constant(input), batch));
  x = nn::add_positional(x, g.param(*enc_positional_), batch);
  for (const auto& b : encoder_) {
    x = nn::add(x, self_attend(g, b.attn, b.ln_attn.forward(g, x), batch, false));
    x = nn::add(x, mlp(g, b.fc1, b.fc2, b.ln_mlp.forward(g, x)));
  }
  return enc_ln_post_.forward(g, x);
}

EncoderMemory Seq2SeqModel::memory(Graph& g, Var encoded, int batch) const {
  EncoderMemory m;
  m.batch = batch;
  for (const auto& b : decoder_) {
    m.keys.push_back(b.cross_attn.k.forward(g, encoded));
    m.values.push_back(b.cross_attn.v.forward(g, encoded));
  }
  return m;
}

Var Seq2SeqModel::decode(Graph& g, const EncoderMemory& mem, const std::vector<int>& tokens, int batch) const {
  if (batch < 1 || tokens.empty() || tokens.size() % static_cast<std::size_t>(batch) != 0)
    throw ConfigError("token rows are not a multiple of the batch");
  if (mem.batch != 1 && mem.batch != batch) throw ConfigError("encoder memory batch does not match decoder batch");
  const int len = static_cast<int>(tokens.size()) / batch;
  if (len > dims_.decoder_capacity)
    throw ConfigError("decoder sequence of " + std::to_string(len) + " exceeds capacity " +
                      std::to_string(dims_.decoder_capacity));
  const bool shared = mem.batch == 1 && batch > 1;
  Var emb = g.param(*token_embedding_);
  Var x = nn::embedding(emb, tokens);
  x = nn::add_positional(x, nn::slice_rows(g.param(*dec_positional_), 0, len), batch);
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    const auto& b = decoder_[l];
    x = nn::add(x, self_attend(g, b.self_attn, b.ln_self.forward(g, x), batch, true));
    Var q = b.cross_attn.q.forward(g, b.ln_cross.forward(g, x));
    Var a = nn::attention(q, mem.keys[l], mem.values[l], batch, b.cross_attn.heads, false, shared);
    x = nn::add(x, b.cross_attn.o.forward(g, a));
    x = nn::add(x, mlp(g, b.fc1, b.fc2, b.ln_mlp.forward(g, x)));
  }
  return nn::matmul_nt(dec_ln_.forward(g, x), emb);
}

}  // namespace megtext::model
