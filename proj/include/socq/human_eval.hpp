#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "socq/eval_harness.hpp"
#include "socq/ports.hpp"
#include "socq/types.hpp"

namespace socq::humaneval {

enum class Source { GroundTruth, TextOnly, SocialToken };
std::string_view to_string(Source s);
Source parse_source(std::string_view s);

struct CandidatePost {
  std::string post_id;
  std::string subreddit;
  std::string post_text;
  std::string ground_truth;
  GroupCategory category = GroupCategory::Expertise;
};

// Posts of `subreddit` holding a divisive cross-group pair at `percentile`,
// sampled without replacement (seeded) down to at most n.
std::vector<CandidatePost> sample_divisive_posts(const std::vector<eval::EvalItem>& test,
                                                 const std::string& subreddit,
                                                 GroupCategory category, std::size_t n,
                                                 double percentile,
                                                 const SentenceEncoder& encoder,
                                                 std::uint64_t seed);

struct PacketQuestion {
  std::string text;
  Source source = Source::GroundTruth;
  GroupValue group = GroupValue::UNK;  // conditioning value for SocialToken
};

struct Packet {
  std::string packet_id;
  CandidatePost post;
  // Canonical order: ground truth, text-only, then one social question per
  // labelled value of the category.
  std::vector<PacketQuestion> questions;
  std::vector<std::size_t> order;  // presented slot i shows questions[order[i]]
  std::uint64_t seed = 0;

  const PacketQuestion& presented(std::size_t slot) const { return questions.at(order.at(slot)); }
};

// Both generators receive the post text; the group argument is ignored by the
// text-only one. Throwing or returning an empty string drops the post.
using Generator = std::function<std::string(const std::string& post, GroupValue group)>;

std::vector<Packet> build_packets(const std::vector<CandidatePost>& posts, const Generator& text_only,
                                  const Generator& social_token, std::uint64_t seed,
                                  std::vector<std::string>* warnings = nullptr);

struct KeyEntry {
  std::string packet_id;
  std::size_t slot = 0;
  Source source = Source::GroundTruth;
  GroupValue group = GroupValue::UNK;
  GroupCategory category = GroupCategory::Expertise;
  std::string subreddit;
  std::string post_id;
};

std::vector<KeyEntry> answer_key(const std::vector<Packet>& packets);

inline constexpr std::size_t kMaxQuestionsPerAnnotatorFile = 50;

// Annotator-facing TSV files (no provenance) holding whole packets, at most
// `max_questions` questions each. Returns the written paths.
std::vector<std::string> export_annotator_files(const std::vector<Packet>& packets,
                                                const std::string& dir,
                                                std::size_t max_questions = kMaxQuestionsPerAnnotatorFile);
void write_key(const std::string& path, const std::vector<KeyEntry>& key);
std::vector<KeyEntry> read_key(const std::string& path);

class RatingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Rating {
  std::string annotator;
  std::string packet_id;
  std::size_t slot = 0;
  int answerable = 0, relevant = 0, understandable = 0;  // 1..5
  std::optional<GroupValue> group_guess;
};

// Columns: annotator packet_id slot answerable relevant understandable group_guess.
std::vector<Rating> read_ratings(const std::string& path);
void validate(const Rating& r);  // throws RatingError on out-of-range scores

// Ordinal-metric alpha over an annotator x item matrix with missing cells.
// nullopt when no item has two ratings. Returns 1 when all pairable values agree.
std::optional<double> krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& ratings);

struct WilcoxonResult {
  double w_plus = 0.0;
  std::size_t n = 0;  // non-zero differences
  double p_two_sided = 1.0;
  bool exact = false;
};
// Paired signed-rank test; zero differences are dropped. Exact null
// distribution for n <= 20, normal approximation otherwise.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

struct MeanScores {
  double answerable = 0.0, relevant = 0.0, understandable = 0.0;
  std::size_t n = 0;
};

struct Summary {
  // (category, subreddit, source) -> means; subreddit "*" pools all.
  std::map<std::tuple<std::string, std::string, std::string>, MeanScores> means;
  struct Test {
    std::string category;
    std::string measure;
    WilcoxonResult result;
  };
  // Social-token vs text-only per category and measure, paired on (annotator, packet).
  std::vector<Test> tests;
  // (category, subreddit) -> (correct, total) group guesses; subreddit "*" pools all.
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> guesses;

  double guess_accuracy(const std::string& category, const std::string& subreddit = "*") const;
  std::string to_tsv() const;
};

Summary summarize(const std::vector<Rating>& ratings, const std::vector<KeyEntry>& key);

}  // namespace socq::humaneval
