#include "socq/transformer.hpp"

#include <cmath>
#include <stdexcept>

namespace socq::nn {

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    double s = *spare_;
    spare_.reset();
    return s;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  return r * std::cos(2.0 * M_PI * u2);
}

TensorPtr init_normal(int rows, int cols, double std, Rng& rng) {
  auto t = make_parameter(rows, cols);
  for (auto& x : t->value) x = std * rng.normal();
  return t;
}

void copy_values(const TensorPtr& from, const TensorPtr& to) {
  if (from->rows != to->rows || from->cols != to->cols)
    throw std::invalid_argument("copy_values: shape mismatch");
  to->value = from->value;
}

namespace {
constexpr double kInitStd = 0.02;
}

Linear::Linear(int in, int out, bool bias, Rng& rng) : w(init_normal(in, out, kInitStd, rng)) {
  if (bias) b = make_parameter(1, out);
}

TensorPtr Linear::forward(const TensorPtr& x) const {
  auto y = matmul(x, w);
  return b ? add_bias(y, b) : y;
}

void Linear::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".weight", w);
  if (b) out.emplace_back(prefix + ".bias", b);
}

void Linear::copy_from(const Linear& other) {
  copy_values(other.w, w);
  if (b && other.b) copy_values(other.b, b);
}

LayerNorm::LayerNorm(int dim) : gamma(make_parameter(1, dim, 1.0)), beta(make_parameter(1, dim)) {}

void LayerNorm::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".gamma", gamma);
  out.emplace_back(prefix + ".beta", beta);
}

MultiHeadAttention::MultiHeadAttention(int dim_, int heads_, Rng& rng)
    : dim(dim_),
      heads(heads_),
      q(dim_, dim_, true, rng),
      k(dim_, dim_, true, rng),
      v(dim_, dim_, true, rng),
      o(dim_, dim_, true, rng) {
  if (heads_ <= 0 || dim_ % heads_ != 0)
    throw std::invalid_argument("attention heads must divide the model width");
}

TensorPtr MultiHeadAttention::forward(const TensorPtr& query, const TensorPtr& memory, bool causal,
                                      AttentionMaps* capture) const {
  const int dh = dim / heads;
  auto Q = q.forward(query);
  auto K = k.forward(memory);
  auto V = v.forward(memory);
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<TensorPtr> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto qh = heads == 1 ? Q : slice_cols(Q, h * dh, dh);
    auto kh = heads == 1 ? K : slice_cols(K, h * dh, dh);
    auto vh = heads == 1 ? V : slice_cols(V, h * dh, dh);
    auto p = softmax_rows(scale(matmul_nt(qh, kh), inv), causal);
    if (capture) capture->push_back(p->value);
    outs.push_back(matmul(p, vh));
  }
  return o.forward(heads == 1 ? outs[0] : concat_cols(outs));
}

void MultiHeadAttention::collect(const std::string& prefix, NamedParams& out) const {
  q.collect(prefix + ".q", out);
  k.collect(prefix + ".k", out);
  v.collect(prefix + ".v", out);
  o.collect(prefix + ".o", out);
}

void MultiHeadAttention::copy_from(const MultiHeadAttention& other) {
  q.copy_from(other.q);
  k.copy_from(other.k);
  v.copy_from(other.v);
  o.copy_from(other.o);
}

SocialAttention::SocialAttention(int dim, int heads, GroupCategory category_, Rng& rng)
    : category(category_), generic(dim, heads, rng), f(2 * dim, dim, false, rng) {
  for (auto value : values_of(category)) {
    MultiHeadAttention m(dim, heads, rng);
    m.copy_from(generic);
    groups.emplace(value, std::move(m));
  }
  std::fill(f.w->value.begin(), f.w->value.end(), 0.0);
  for (int i = 0; i < dim; ++i) {
    f.w->at(i, i) = 0.5;
    f.w->at(dim + i, i) = 0.5;
  }
}

const MultiHeadAttention& SocialAttention::route(GroupValue group) const {
  auto it = groups.find(group);
  return it != groups.end() ? it->second : groups.at(GroupValue::UNK);
}

TensorPtr SocialAttention::forward(const TensorPtr& x, GroupValue group,
                                   AttentionMaps* capture) const {
  auto g = route(group).forward(x, x, false, capture);
  auto gen = generic.forward(x, x, false);
  return f.forward(concat_cols({g, gen}));
}

void SocialAttention::collect(const std::string& prefix, NamedParams& out) const {
  for (const auto& [value, m] : groups) m.collect(prefix + ".group_" + std::string(to_string(value)), out);
  generic.collect(prefix + ".generic", out);
  f.collect(prefix + ".f", out);
}

EncoderLayer::EncoderLayer(int dim, int heads, int ffn, Rng& rng)
    : self_attn(dim, heads, rng),
      ln1(dim),
      ln2(dim),
      fc1(dim, ffn, true, rng),
      fc2(ffn, dim, true, rng) {}

TensorPtr EncoderLayer::forward(const TensorPtr& x, GroupValue group, AttentionMaps* capture) const {
  auto a = social ? social->forward(x, group, capture) : self_attn.forward(x, x, false, capture);
  auto h = ln1.forward(add(x, a));
  return ln2.forward(add(h, fc2.forward(gelu(fc1.forward(h)))));
}

void EncoderLayer::collect(const std::string& prefix, NamedParams& out) const {
  if (social)
    social->collect(prefix + ".social_attn", out);
  else
    self_attn.collect(prefix + ".self_attn", out);
  ln1.collect(prefix + ".ln1", out);
  ln2.collect(prefix + ".ln2", out);
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

DecoderLayer::DecoderLayer(int dim, int heads, int ffn, Rng& rng)
    : self_attn(dim, heads, rng),
      cross_attn(dim, heads, rng),
      ln1(dim),
      ln2(dim),
      ln3(dim),
      fc1(dim, ffn, true, rng),
      fc2(ffn, dim, true, rng) {}

TensorPtr DecoderLayer::forward(const TensorPtr& x, const TensorPtr& memory) const {
  auto h = ln1.forward(add(x, self_attn.forward(x, x, true)));
  auto c = ln2.forward(add(h, cross_attn.forward(h, memory, false)));
  return ln3.forward(add(c, fc2.forward(gelu(fc1.forward(c)))));
}

void DecoderLayer::collect(const std::string& prefix, NamedParams& out) const {
  self_attn.collect(prefix + ".self_attn", out);
  cross_attn.collect(prefix + ".cross_attn", out);
  ln1.collect(prefix + ".ln1", out);
  ln2.collect(prefix + ".ln2", out);
  ln3.collect(prefix + ".ln3", out);
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

Seq2SeqTransformer::Seq2SeqTransformer(const TransformerShape& shape, std::uint64_t seed)
    : shape_(shape), enc_ln_(shape.dim), dec_ln_(shape.dim) {
  if (shape.vocab_size <= 0) throw std::invalid_argument("transformer: empty vocabulary");
  Rng rng(seed);
  tokens_ = init_normal(shape.vocab_size, shape.dim, kInitStd, rng);
  enc_pos_ = init_normal(shape.max_source_positions, shape.dim, kInitStd, rng);
  dec_pos_ = init_normal(shape.max_target_positions, shape.dim, kInitStd, rng);
  for (int i = 0; i < shape.layers; ++i) {
    encoder_.push_back(std::make_unique<EncoderLayer>(shape.dim, shape.heads, shape.ffn, rng));
    decoder_.push_back(std::make_unique<DecoderLayer>(shape.dim, shape.heads, shape.ffn, rng));
  }
  rebuild_registry();
}

void Seq2SeqTransformer::enable_social_attention(int layer, GroupCategory category,
                                                 std::uint64_t seed) {
  if (layer < 0 || layer >= shape_.layers)
    throw std::invalid_argument("social attention layer " + std::to_string(layer) +
                                " outside 0.." + std::to_string(shape_.layers - 1));
  Rng rng(seed);
  auto& target = *encoder_[static_cast<std::size_t>(layer)];
  target.social = std::make_unique<SocialAttention>(shape_.dim, shape_.heads, category, rng);
  // Start from the layer's existing attention weights.
  target.social->generic.copy_from(target.self_attn);
  for (auto& [value, m] : target.social->groups) m.copy_from(target.self_attn);
  social_layer_ = layer;
  rebuild_registry();
}

void Seq2SeqTransformer::rebuild_registry() {
  params_.clear();
  params_.emplace_back("embed.tokens", tokens_);
  params_.emplace_back("embed.enc_pos", enc_pos_);
  params_.emplace_back("embed.dec_pos", dec_pos_);
  enc_ln_.collect("embed.enc_ln", params_);
  dec_ln_.collect("embed.dec_ln", params_);
  for (std::size_t i = 0; i < encoder_.size(); ++i)
    encoder_[i]->collect("encoder." + std::to_string(i), params_);
  for (std::size_t i = 0; i < decoder_.size(); ++i)
    decoder_[i]->collect("decoder." + std::to_string(i), params_);
}

TensorPtr Seq2SeqTransformer::embed_source(const std::vector<int>& ids, const TensorPtr& extra) const {
  auto x = gather_rows(tokens_, ids);
  if (extra) x = concat_rows({x, extra});
  if (x->rows > shape_.max_source_positions)
    throw std::invalid_argument("source longer than the position table");
  return add(x, slice_rows(enc_pos_, 0, x->rows));
}

TensorPtr Seq2SeqTransformer::encode(const std::vector<int>& ids, const TensorPtr& extra,
                                     GroupValue group, std::vector<AttentionMaps>* capture) const {
  if (ids.empty() && !extra) throw std::invalid_argument("encode: empty source");
  auto h = enc_ln_.forward(embed_source(ids, extra));
  for (const auto& layer : encoder_) {
    AttentionMaps maps;
    h = layer->forward(h, group, capture ? &maps : nullptr);
    if (capture) capture->push_back(std::move(maps));
  }
  return h;
}

TensorPtr Seq2SeqTransformer::decode(const TensorPtr& memory, const std::vector<int>& prefix) const {
  if (static_cast<int>(prefix.size()) > shape_.max_target_positions)
    throw std::invalid_argument("decoder prefix longer than the position table");
  auto x = add(gather_rows(tokens_, prefix), slice_rows(dec_pos_, 0, static_cast<int>(prefix.size())));
  auto h = dec_ln_.forward(x);
  for (const auto& layer : decoder_) h = layer->forward(h, memory);
  return matmul_nt(h, tokens_);
}

}  // namespace socq::nn
