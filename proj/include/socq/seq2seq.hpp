#pragma once

// Question generation models: a text-only encoder-decoder and three ways of
// conditioning it on the asker (group token, social attention, appended asker
// embedding).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "socq/transformer.hpp"
#include "socq/types.hpp"

namespace socq::seq2seq {

enum class Variant { TextOnly, SocialToken, SocialAttention, SubredditEmbedding, TextEmbedding };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);  // throws std::invalid_argument

inline constexpr int kAskerEmbeddingDim = 100;

struct ModelConfig {
  Variant variant = Variant::TextOnly;
  std::string base_model = "scratch";
  double learning_rate = 1e-4;
  double weight_decay = 0.01;
  int epochs = 10;
  int batch_size = 2;
  int max_source = 1024;
  int max_target = 64;
  int attention_layer = 1;     // 0-based encoder layer for social attention
  bool select_layer = true;    // try {1,3,5} and keep the best on validation
  int model_dim = 64;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 0;  // 0 means 4 * model_dim
  GroupCategory category = GroupCategory::Expertise;
  int min_count = 1;
  int beam_width = 4;
  std::uint64_t seed = 13;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
  static ModelConfig load(const std::string& path);
};

struct ConditionedExample {
  std::string id;
  std::string post_id;
  std::string source;
  std::string target;
  GroupValue group = GroupValue::UNK;
  std::optional<std::vector<double>> asker_vec;  // kAskerEmbeddingDim values
};

enum SpecialToken : int { kPad = 0, kBos = 1, kEos = 2, kUnk = 3, kSocialEmb = 4 };

// "{GROUP_EXPERTISE_Expert}"
std::string group_token(GroupCategory category, GroupValue value);

class Vocabulary {
 public:
  // Specials first, then (optionally) the nine group tokens, then corpus words
  // with at least `min_count` occurrences in sorted order.
  static Vocabulary build(const std::vector<std::string>& texts, int min_count,
                          bool with_group_tokens);

  int size() const { return static_cast<int>(words_.size()); }
  int id(const std::string& word) const;  // kUnk when absent
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  bool has_group_tokens() const { return group_count_ > 0; }
  int group_token_count() const { return group_count_; }
  int group_token_id(GroupCategory category, GroupValue value) const;  // throws if absent
  bool is_special(int id) const { return id < kSpecialCount + group_count_; }

  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  static constexpr int kSpecialCount = 5;

 private:
  void index();
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
  int group_count_ = 0;
};

// [group token] + post tokens, at most max_source ids in total.
std::vector<int> prepare_social_token_input(const Vocabulary& vocab, const std::string& post_text,
                                            GroupCategory category, GroupValue value,
                                            int max_source);

struct SocialEmbeddingInput {
  std::vector<int> ids;   // post tokens then [SOCIAL_EMB] (or UNK when no vector)
  nn::TensorPtr vector;   // 1 x model_dim projected asker vector
};

SocialEmbeddingInput prepare_social_embedding_input(const Vocabulary& vocab,
                                                    const std::string& post_text,
                                                    const std::optional<std::vector<double>>& asker_vec,
                                                    const nn::Linear& projector, int max_source);

struct AttentionScore {
  std::string token;
  double score_a = 0.0;
  double score_b = 0.0;
  double ratio = 1.0;  // score_a / score_b
};

class Model {
 public:
  Model(const ModelConfig& config, Vocabulary vocab);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  nn::Seq2SeqTransformer& network() { return *net_; }
  const nn::Seq2SeqTransformer& network() const { return *net_; }
  const nn::Linear* projector() const { return projector_ ? &*projector_ : nullptr; }
  nn::NamedParams parameters() const;

  // Source ids and optional appended vector exactly as the encoder sees them.
  struct EncoderInput {
    std::vector<int> ids;
    nn::TensorPtr extra;
    GroupValue group = GroupValue::UNK;
  };
  EncoderInput encoder_input(const std::string& source, GroupValue group,
                             const std::optional<std::vector<double>>& asker_vec) const;
  EncoderInput encoder_input(const ConditionedExample& ex) const {
    return encoder_input(ex.source, ex.group, ex.asker_vec);
  }

  // Teacher-forced mean token cross-entropy (graph kept for backward).
  nn::TensorPtr loss(const ConditionedExample& ex) const;
  // log p(token) for every target token and the closing EOS.
  std::vector<double> target_log_probs(const ConditionedExample& ex) const;

  std::vector<int> generate_ids(const ConditionedExample& ex) const;
  std::string generate(const ConditionedExample& ex) const;

  // First-layer attention on each source token under the two labelled values
  // of the configured category.
  std::vector<AttentionScore> attention_ratio(const std::string& post) const;

  void enable_social_attention(int layer);

  void save(const std::string& dir) const;
  static Model load(const std::string& dir);
  // Hash of config, vocabulary and weights.
  std::string version() const;

 private:
  int target_limit() const { return config_.max_target; }

  ModelConfig config_;
  Vocabulary vocab_;
  std::unique_ptr<nn::Seq2SeqTransformer> net_;
  std::optional<nn::Linear> projector_;
};

class AdamW {
 public:
  AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {}
  // Parameters that received no gradient since the last zero_grad are skipped
  // entirely, including weight decay.
  void step(const nn::NamedParams& params);
  static void zero_grad(const nn::NamedParams& params);

 private:
  struct State {
    std::vector<double> m, v;
    long t = 0;
  };
  double lr_, wd_, b1_, b2_, eps_;
  std::map<const nn::Node*, State> state_;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // index 0 is before training
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::optional<int> selected_layer;
  std::map<int, double> layer_val_loss;  // candidates tried
};

struct TrainResult {
  std::unique_ptr<Model> model;
  TrainReport report;
};

class EmptyDataset : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Splits must not share post ids. The vocabulary is built from the training
// split. Weights from the epoch with the lowest validation loss are kept.
TrainResult train(const ModelConfig& config, const std::vector<ConditionedExample>& train_set,
                  const std::vector<ConditionedExample>& val_set);

// Train on a fixed vocabulary and layer; the building block of train().
TrainResult train_with_vocab(const ModelConfig& config, const Vocabulary& vocab,
                             const std::vector<ConditionedExample>& train_set,
                             const std::vector<ConditionedExample>& val_set);

double mean_loss(const Model& model, const std::vector<ConditionedExample>& set);

struct Split {
  std::vector<ConditionedExample> train, validation, test;
};
// Deterministic assignment of whole posts to splits by hashed post id.
Split split_by_post(const std::vector<ConditionedExample>& examples, double train_frac,
                    double val_frac, std::uint64_t seed);

std::vector<ConditionedExample> read_examples(const std::string& path);  // JSONL
void write_examples(const std::string& path, const std::vector<ConditionedExample>& examples);

}  // namespace socq::seq2seq
