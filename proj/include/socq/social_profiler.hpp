#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "socq/ports.hpp"
#include "socq/types.hpp"

namespace socq::profile {

inline constexpr std::size_t kMaxHistory = 1000;

struct HistoryEntry {
  std::string subreddit;
  std::int64_t created_utc = 0;
  std::optional<std::int64_t> parent_created_utc;
  std::string body;
};

struct AskerProfile {
  std::string asker_id;
  std::vector<HistoryEntry> history;  // at most kMaxHistory entries
  std::map<GroupCategory, GroupValue> labels;
  double expertise_score = 0.0;
  std::optional<double> mean_response_secs;
};

// Keeps the most recent kMaxHistory entries, ordered oldest first.
AskerProfile make_profile(std::string asker_id, std::vector<HistoryEntry> history);

// Fraction of history entries written in the target or a related subreddit.
// Subreddit names compare case-insensitively. Empty history scores 0.
double expertise_score(const AskerProfile& profile, const std::string& target,
                       const std::set<std::string>& related);

// Nearest-rank percentile with p in (0, 100). Throws on an empty population.
double compute_percentile_threshold(const std::vector<double>& scores, double p);

struct ThresholdSet {
  double expertise_p75 = 0.0;
  double time_p50 = 0.0;
  std::string population_id;
};

// Phase one: reduce a population of profiles (askers in one target
// subreddit by default) to the expertise and response-time thresholds.
ThresholdSet compute_thresholds(const std::vector<AskerProfile>& population,
                                const std::string& target, const std::set<std::string>& related,
                                std::string population_id);

GroupLabel label_expertise(double score, double threshold);

// Mean of (created - parent_created) over entries with a known, non-later
// parent. Undefined when no entry qualifies.
std::optional<double> mean_response_secs(const AskerProfile& profile);

GroupLabel label_time(const AskerProfile& profile, double median_threshold);

struct LocationPorts {
  const EntityRecognizer& ner;
  const Gazetteer& gazetteer;
  const std::map<std::string, std::string>& subreddit_geo;  // subreddit -> place
};

// First-person residence cues; an entity counts as self-identification only
// when one of these ends within a short window before it.
const std::vector<std::string>& residence_cues();

GroupLabel infer_location(const AskerProfile& profile, const LocationPorts& ports,
                          int min_comments = 5);

// Phase two: label every profile in place against fixed thresholds.
void label_profiles(std::vector<AskerProfile>& profiles, const ThresholdSet& thresholds,
                    const std::string& target, const std::set<std::string>& related,
                    const LocationPorts& ports, int min_comments = 5);

using EmbeddingTable = std::map<std::string, std::vector<double>>;

// The k nearest subreddits to `target` by cosine similarity, kept only when
// present in the curated allowlist for that target. Names are lowercased.
std::set<std::string> related_subreddits(const std::string& target,
                                         const EmbeddingTable& subreddit_embeddings, int k,
                                         const std::map<std::string, std::set<std::string>>& allowlist,
                                         std::vector<std::string>* warnings = nullptr);

// target<TAB>neighbour neighbour ...
std::map<std::string, std::set<std::string>> load_allowlist(const std::string& path);

// Thresholds file: one ThresholdSet per line as JSON.
void write_thresholds(const std::string& path, const std::vector<ThresholdSet>& sets);
std::vector<ThresholdSet> read_thresholds(const std::string& path);

// Profiles as JSON lines: {"asker_id", "history": [{subreddit, created_utc, parent_created_utc, body}], "labels": {...}}
std::vector<AskerProfile> read_profiles(const std::string& path);
std::string to_json_line(const AskerProfile& p);

}  // namespace socq::profile
