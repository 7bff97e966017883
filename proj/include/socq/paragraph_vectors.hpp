#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socq/social_profiler.hpp"

namespace socq::embed {

// Defaults follow the usual doc2vec distribution-bag-of-words settings with
// interleaved skip-gram word training.
struct ParagraphVectorOptions {
  int dim = 100;
  int window = 5;
  int negative = 5;
  int min_count = 5;
  int epochs = 10;
  double alpha = 0.025;
  double min_alpha = 0.0001;
  bool train_words = true;
  int infer_epochs = 50;
  std::uint64_t seed = 1;
};

// Paragraph-vector document embedder (PV-DBOW, negative sampling).
class ParagraphVectorModel {
 public:
  // Each document is one comment's tokens. Throws on an empty corpus.
  static ParagraphVectorModel train(const std::vector<std::vector<std::string>>& documents,
                                    const ParagraphVectorOptions& options = {});

  const std::vector<double>& document_vector(std::size_t doc) const { return docs_.at(doc); }
  std::size_t document_count() const { return docs_.size(); }

  // Vector for unseen text. Deterministic: seeded from the token sequence,
  // so equal inputs always give equal outputs.
  std::vector<double> infer(const std::vector<std::string>& tokens) const;

  int dim() const { return options_.dim; }
  std::size_t vocabulary_size() const { return words_.size(); }

  void save(const std::string& path) const;
  static ParagraphVectorModel load(const std::string& path);

 private:
  void update_pair(std::vector<double>& input, std::size_t target, double alpha,
                   std::uint64_t& rng_state, bool update_output, std::vector<double>& scratch);
  void update_pair_frozen(std::vector<double>& input, std::size_t target, double alpha,
                          std::uint64_t& rng_state, std::vector<double>& scratch) const;
  std::size_t sample_negative(std::uint64_t& rng_state) const;
  std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const;

  ParagraphVectorOptions options_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> words_;
  std::vector<double> counts_;
  std::vector<double> cumulative_;  // unigram^0.75 CDF
  std::vector<std::vector<double>> word_in_;
  std::vector<std::vector<double>> word_out_;
  std::vector<std::vector<double>> docs_;
};

// Mean of the inferred vectors of the profile's history comments.
std::optional<std::vector<double>> asker_text_embedding(const profile::AskerProfile& profile,
                                                        const ParagraphVectorModel& model);

}  // namespace socq::embed
