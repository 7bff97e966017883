#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "socq/random_forest.hpp"
#include "socq/types.hpp"

namespace socq::questions {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Question sentences of a comment, in order. A sentence ends at '.', '!' or
// '?' followed by whitespace; only those ending in '?' are kept.
std::vector<Question> extract_candidates(const Comment& comment);

struct AnnotatedQuestion {
  std::string id;
  std::string post_id;
  std::string text;
  std::vector<int> relevant;  // one label per annotator
  std::vector<int> infoseek;
};

// Header: id, post_id, text, relevant, infoseek (tab separated); the label
// columns hold comma-separated per-annotator 0/1 values.
std::vector<AnnotatedQuestion> read_annotations(const std::string& path);

// Rows whose annotators agree unanimously on the info-seeking label.
std::vector<AnnotatedQuestion> unanimous_rows(const std::vector<AnnotatedQuestion>& rows);

// English stopwords without the interrogatives, which carry the signal.
const std::set<std::string>& default_stopwords();

struct ClassifierOptions {
  std::size_t vocab_size = 50;
  ml::ForestOptions forest;
};

class InfoSeekClassifier {
 public:
  // Trains on the unanimous rows. Throws TrainingError when fewer than two
  // classes remain.
  static InfoSeekClassifier train(const std::vector<AnnotatedQuestion>& rows,
                                  const std::set<std::string>& stopwords,
                                  const ClassifierOptions& options = {});

  double probability(const std::string& question) const;
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  std::string serialize() const;
  static InfoSeekClassifier deserialize(const std::string& data);

 private:
  std::vector<double> features(const std::string& question) const;

  std::vector<std::string> vocab_;
  ml::RandomForest forest_;
};

// The `vocab_size` most frequent non-stopword word types; ties broken alphabetically.
std::vector<std::string> top_vocabulary(const std::vector<std::string>& texts,
                                        const std::set<std::string>& stopwords, std::size_t k);

double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted);

struct CrossValidation {
  std::vector<double> fold_f1;
  double mean_f1 = 0.0;
};

// Stratified k-fold evaluation at the 0.5 decision threshold.
CrossValidation cross_validate(const std::vector<AnnotatedQuestion>& rows,
                               const std::set<std::string>& stopwords, int folds = 10,
                               const ClassifierOptions& options = {});

// Records the probability on every question and keeps those at or above the threshold.
std::vector<Question> score_and_filter(std::vector<Question> questions,
                                       const InfoSeekClassifier& classifier,
                                       double threshold = 0.5);

// Keeps questions whose recorded probability is at or above the threshold.
std::vector<Question> apply_threshold(const std::vector<Question>& scored, double threshold);

std::string to_json_line(const Question& q);
Question question_from_json(const std::string& line);
std::vector<Question> read_questions(const std::string& path);

}  // namespace socq::questions
