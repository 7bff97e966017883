#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "socq/ports.hpp"
#include "socq/types.hpp"

namespace socq::eval {

using Tokens = std::vector<std::string>;

// Clipped unigram precision times exp(min(0, 1 - |ref|/|hyp|)).
double bleu1(const Tokens& hypothesis, const Tokens& reference);
// Strings are lowercased and split into words, punctuation dropped.
double bleu1(const std::string& hypothesis, const std::string& reference);

// 1 - cosine of the sentence embeddings. Encoder errors propagate.
double bert_distance(const std::string& hypothesis, const std::string& reference,
                     const SentenceEncoder& encoder);

// Teacher-forced per-token scoring of a target string.
class TargetScorer {
 public:
  virtual ~TargetScorer() = default;
  virtual std::vector<double> token_log_probs(const std::string& target) const = 0;
};

// Assigns log(1/V) to each word of the target plus the end-of-sequence slot.
class UniformScorer final : public TargetScorer {
 public:
  explicit UniformScorer(std::size_t vocab_size) : v_(vocab_size) {}
  std::vector<double> token_log_probs(const std::string& target) const override;

 private:
  std::size_t v_;
};

// exp(mean negative log-likelihood over every token of every target).
double perplexity(const TargetScorer& scorer, const std::vector<std::string>& targets);
double perplexity_from_log_probs(const std::vector<std::vector<double>>& per_target);

// Distinct bigrams / total bigrams, pooled over all hypotheses; 0 without bigrams.
double type_token_bigram(const std::vector<Tokens>& hypotheses);
double type_token_bigram(const std::vector<std::string>& hypotheses);

// Over normalised strings. Both throw std::invalid_argument on empty input.
double diversity(const std::vector<std::string>& hypotheses);
double redundancy(const std::vector<std::string>& hypotheses,
                  const std::vector<std::string>& training_questions);
double redundancy(const std::vector<std::string>& hypotheses,
                  const std::set<std::string>& normalized_training);

double pair_similarity(const std::string& q1, const std::string& q2, const SentenceEncoder& encoder);

struct QuestionPair {
  std::string post_id;
  std::string q1_id, q2_id;
  std::string q1, q2;
  GroupValue g1 = GroupValue::UNK, g2 = GroupValue::UNK;
  double similarity = 0.0;
  bool divisive = false;
};

// Labels pairs whose similarity is at or below the nearest-rank n-th
// percentile. Fewer than two pairs are returned unlabelled.
std::vector<QuestionPair> mark_divisive(std::vector<QuestionPair> pairs, double n_percentile);

using WordVectors = std::unordered_map<std::string, std::vector<double>>;
// Cosine of the mean in-vocabulary word vectors; nullopt if either side is all OOV.
std::optional<double> word_embedding_similarity(const std::string& q1, const std::string& q2,
                                                const WordVectors& vectors);

// Root-attached wh-word ("where", "what", ...) or "other".
std::string question_type(const std::string& question, const DependencyParser& parser,
                          std::vector<std::string>* warnings = nullptr);

// Max cosine between the question and any post sentence; nullopt for an empty post.
std::optional<double> post_similarity(const std::string& question, const std::string& post,
                                      const SentenceEncoder& encoder);

// One held-out question with its conditioning.
struct EvalItem {
  std::string id;
  std::string post_id;
  std::string subreddit;
  std::string post_text;
  std::string reference;
  GroupValue group = GroupValue::UNK;
};

// Same-post pairs of references whose askers hold different labelled values.
std::vector<QuestionPair> cross_group_pairs(const std::vector<EvalItem>& items,
                                            const SentenceEncoder& encoder);

struct ModelOutputs {
  std::string name;
  std::vector<std::string> hypotheses;  // aligned with the items
  // Per-item reference log-probabilities, for perplexity.
  std::optional<std::vector<std::vector<double>>> reference_log_probs;
};

struct EvalContext {
  const SentenceEncoder* encoder = nullptr;
  const DependencyParser* parser = nullptr;
  std::vector<std::string> training_questions;
  std::set<std::string> group_specific_ids;
};

struct MetricsRow {
  std::string model;
  std::string subset;
  std::size_t n = 0;
  double bleu1 = 0.0;
  double bert_distance = 0.0;
  double diversity = 0.0;
  double type_token = 0.0;
  double redundancy = 0.0;
  std::optional<double> perplexity;
};

// Subset names: full, divisive@<n>, group_specific (or group-specific),
// by_question_type (expands to one type:<word> row per type seen).
std::vector<MetricsRow> evaluate_run(const std::vector<EvalItem>& items,
                                     const std::vector<ModelOutputs>& models,
                                     const std::vector<std::string>& subsets, const EvalContext& ctx);

std::string to_tsv(const std::vector<MetricsRow>& rows);
std::string to_json(const std::vector<MetricsRow>& rows);

}  // namespace socq::eval
