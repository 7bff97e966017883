#pragma once

// Encoder-decoder transformer built on the autograd graph: learned positions,
// layer-normalised embeddings, post-norm residual blocks and an output
// projection tied to the token embedding.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "socq/autograd.hpp"
#include "socq/types.hpp"

namespace socq::nn {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();
  double normal();
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
  std::optional<double> spare_;
};

using NamedParams = std::vector<std::pair<std::string, TensorPtr>>;

TensorPtr init_normal(int rows, int cols, double std, Rng& rng);
// Deep copy of values into an existing parameter of the same shape.
void copy_values(const TensorPtr& from, const TensorPtr& to);

struct Linear {
  TensorPtr w;  // in x out
  TensorPtr b;  // 1 x out, null when bias-free

  Linear() = default;
  Linear(int in, int out, bool bias, Rng& rng);
  TensorPtr forward(const TensorPtr& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
  void copy_from(const Linear& other);
};

struct LayerNorm {
  TensorPtr gamma, beta;
  LayerNorm() = default;
  explicit LayerNorm(int dim);
  TensorPtr forward(const TensorPtr& x) const { return layer_norm(x, gamma, beta); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

// Per-head attention probabilities, each (queries x keys) row-major.
using AttentionMaps = std::vector<std::vector<double>>;

struct MultiHeadAttention {
  int dim = 0, heads = 1;
  Linear q, k, v, o;

  MultiHeadAttention() = default;
  MultiHeadAttention(int dim, int heads, Rng& rng);
  TensorPtr forward(const TensorPtr& query, const TensorPtr& memory, bool causal,
                    AttentionMaps* capture = nullptr) const;
  void collect(const std::string& prefix, NamedParams& out) const;
  void copy_from(const MultiHeadAttention& other);
};

// One attention module per value of a category (UNK included) next to a
// generic module; their outputs are concatenated feature-wise and mixed by a
// bias-free map f back to the model width.
struct SocialAttention {
  GroupCategory category = GroupCategory::Expertise;
  std::map<GroupValue, MultiHeadAttention> groups;
  MultiHeadAttention generic;
  Linear f;  // 2*dim -> dim

  SocialAttention() = default;
  // Group modules start as copies of the generic one and f as the average.
  SocialAttention(int dim, int heads, GroupCategory category, Rng& rng);
  // Values outside the category route to the UNK module.
  TensorPtr forward(const TensorPtr& x, GroupValue group, AttentionMaps* capture = nullptr) const;
  const MultiHeadAttention& route(GroupValue group) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct EncoderLayer {
  MultiHeadAttention self_attn;
  std::unique_ptr<SocialAttention> social;  // replaces self_attn when set
  LayerNorm ln1, ln2;
  Linear fc1, fc2;

  EncoderLayer(int dim, int heads, int ffn, Rng& rng);
  TensorPtr forward(const TensorPtr& x, GroupValue group, AttentionMaps* capture) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct DecoderLayer {
  MultiHeadAttention self_attn, cross_attn;
  LayerNorm ln1, ln2, ln3;
  Linear fc1, fc2;

  DecoderLayer(int dim, int heads, int ffn, Rng& rng);
  TensorPtr forward(const TensorPtr& x, const TensorPtr& memory) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct TransformerShape {
  int vocab_size = 0;
  int dim = 64;
  int layers = 2;  // encoder and decoder each
  int heads = 4;
  int ffn = 256;
  int max_source_positions = 1024;
  int max_target_positions = 66;
};

class Seq2SeqTransformer {
 public:
  Seq2SeqTransformer(const TransformerShape& shape, std::uint64_t seed);

  // Swaps encoder layer `layer` (0-based) for a social-attention layer.
  void enable_social_attention(int layer, GroupCategory category, std::uint64_t seed);
  std::optional<int> social_layer() const { return social_layer_; }

  // Token embeddings plus positions, before the embedding norm. `extra` rows
  // (already model width) are appended after the tokens.
  TensorPtr embed_source(const std::vector<int>& ids, const TensorPtr& extra = nullptr) const;
  TensorPtr encode(const std::vector<int>& ids, const TensorPtr& extra, GroupValue group,
                   std::vector<AttentionMaps>* capture = nullptr) const;
  // Logits (|prefix| x vocab) for every decoder position.
  TensorPtr decode(const TensorPtr& memory, const std::vector<int>& prefix) const;

  const TransformerShape& shape() const { return shape_; }
  const NamedParams& parameters() const { return params_; }
  EncoderLayer& encoder_layer(int i) { return *encoder_[static_cast<std::size_t>(i)]; }
  const EncoderLayer& encoder_layer(int i) const { return *encoder_[static_cast<std::size_t>(i)]; }
  const TensorPtr& token_embedding() const { return tokens_; }

 private:
  void rebuild_registry();

  TransformerShape shape_;
  TensorPtr tokens_, enc_pos_, dec_pos_;
  LayerNorm enc_ln_, dec_ln_;
  std::vector<std::unique_ptr<EncoderLayer>> encoder_;
  std::vector<std::unique_ptr<DecoderLayer>> decoder_;
  std::optional<int> social_layer_;
  NamedParams params_;
};

}  // namespace socq::nn
