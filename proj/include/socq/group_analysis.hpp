#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "socq/ports.hpp"
#include "socq/types.hpp"

namespace socq::groups {

// Category -> word list. Entries ending in '*' match any word with that prefix.
class CategoryLexicon {
 public:
  void add(const std::string& category, const std::string& entry);
  // CATEGORY<TAB>word1 word2 prefix*
  static CategoryLexicon load(const std::string& path);
  static CategoryLexicon parse(const std::string& contents);

  bool matches(const std::string& category, const std::string& token) const;
  std::vector<std::string> categories() const;

 private:
  struct Entries {
    std::set<std::string> words;
    std::vector<std::string> prefixes;
  };
  std::map<std::string, Entries> categories_;
};

// Per category: matching tokens / total tokens. Empty text gives all zeros.
std::map<std::string, double> category_frequency(const std::string& question,
                                                 const CategoryLexicon& lexicon);

struct MannWhitney {
  double u = 0.0;  // pairs with a > b, ties count one half
  double p_two_sided = 1.0;
  bool exact = false;
};

// Exact permutation p-value when |a|+|b| <= 20, otherwise the tie-corrected
// normal approximation with continuity correction.
MannWhitney mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

struct CategoryDiff {
  std::string category;
  double freq_a = 0.0;
  double freq_b = 0.0;
  double difference = 0.0;  // |freq_a - freq_b|
  double u = 0.0;
  double p_value = 1.0;
};

struct GroupDiffReport {
  std::string group_a, group_b;
  std::vector<CategoryDiff> ranked;  // by difference, descending

  // Top categories where one group's frequency exceeds the other's.
  std::vector<CategoryDiff> top_a_over_b(std::size_t k) const;
  std::vector<CategoryDiff> top_b_over_a(std::size_t k) const;
  std::string to_tsv(std::size_t k) const;
};

// Group frequency = mean over that group's questions of the per-question
// normalised frequency; significance from Mann-Whitney over those values.
GroupDiffReport group_diff_report(const std::string& name_a, const std::vector<std::string>& group_a,
                                  const std::string& name_b, const std::vector<std::string>& group_b,
                                  const CategoryLexicon& lexicon);

// Mean-centred projection onto the leading principal components.
class Pca {
 public:
  // Output width is `d`; components past the data rank are zero.
  static Pca fit(const std::vector<std::vector<double>>& rows, int d);
  std::vector<double> transform(const std::vector<double>& row) const;
  int dim() const { return d_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;  // input_dim x effective rank
  int d_ = 0;
};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PairFeature {
  std::vector<double> question_vec;
  std::vector<double> post_vec;
  std::vector<double> concatenated() const;
};

// Encoder failures are rethrown as EncodingError naming `item_id`.
PairFeature encode_pair(const std::string& item_id, const std::string& question,
                        const std::string& post, const SentenceEncoder& encoder, const Pca& pca_q,
                        const Pca& pca_p);

struct ClassifierOptions {
  int hidden = 64;
  int epochs = 200;
  double learning_rate = 1e-2;
  double weight_decay = 1e-4;
  std::uint64_t seed = 3;
};

struct GroupPrediction {
  GroupValue label = GroupValue::UNK;
  double probability = 0.0;
};

// One hidden tanh layer and a two-way softmax, trained full-batch with Adam
// after duplicating minority-class rows up to parity.
class GroupClassifier {
 public:
  static GroupClassifier train(const std::vector<std::vector<double>>& features,
                               const std::vector<GroupValue>& labels, GroupCategory category,
                               const ClassifierOptions& options = {});
  GroupPrediction predict(const std::vector<double>& feature) const;
  // Probability assigned to a given label.
  double probability_of(const std::vector<double>& feature, GroupValue label) const;
  GroupCategory category() const { return category_; }

 private:
  Eigen::VectorXd logits(const std::vector<double>& feature) const;

  GroupCategory category_ = GroupCategory::Expertise;
  std::vector<GroupValue> classes_;  // two entries
  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;
  Eigen::VectorXd b2_;
};

double accuracy(const GroupClassifier& c, const std::vector<std::vector<double>>& features,
                const std::vector<GroupValue>& labels);

struct LabelledPair {
  std::string id;
  std::vector<double> feature;
  GroupValue true_label = GroupValue::UNK;
};

// Ids of pairs whose true label receives probability >= confidence.
std::vector<std::string> subset_group_specific(const std::vector<LabelledPair>& pairs,
                                               const GroupClassifier& classifier,
                                               double confidence = 0.95);

// Per (subreddit, category) classifiers.
class GroupClassifierBank {
 public:
  void add(const std::string& subreddit, GroupClassifier classifier);
  const GroupClassifier* find(const std::string& subreddit, GroupCategory category) const;

 private:
  std::map<std::pair<std::string, GroupCategory>, GroupClassifier> models_;
};

}  // namespace socq::groups
