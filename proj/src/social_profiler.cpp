#include "socq/social_profiler.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "socq/stats.hpp"
#include "socq/text.hpp"

namespace socq::profile {

using nlohmann::json;

AskerProfile make_profile(std::string asker_id, std::vector<HistoryEntry> history) {
  std::stable_sort(history.begin(), history.end(),
                   [](const auto& a, const auto& b) { return a.created_utc < b.created_utc; });
  if (history.size() > kMaxHistory)
    history.erase(history.begin(), history.end() - static_cast<long>(kMaxHistory));
  AskerProfile p;
  p.asker_id = std::move(asker_id);
  p.history = std::move(history);
  return p;
}

double expertise_score(const AskerProfile& profile, const std::string& target,
                       const std::set<std::string>& related) {
  if (profile.history.empty()) return 0.0;
  const auto t = text::to_lower(target);
  std::set<std::string> rel;
  for (const auto& r : related) rel.insert(text::to_lower(r));
  std::size_t hits = 0;
  for (const auto& e : profile.history) {
    auto s = text::to_lower(e.subreddit);
    if (s == t || rel.contains(s)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(profile.history.size());
}

double compute_percentile_threshold(const std::vector<double>& scores, double p) {
  if (!(p > 0.0 && p < 100.0)) throw std::invalid_argument("percentile must lie in (0, 100)");
  return stats::nearest_rank_percentile(scores, p);
}

std::optional<double> mean_response_secs(const AskerProfile& profile) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& e : profile.history) {
    if (!e.parent_created_utc || *e.parent_created_utc > e.created_utc) continue;
    sum += static_cast<double>(e.created_utc - *e.parent_created_utc);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

ThresholdSet compute_thresholds(const std::vector<AskerProfile>& population,
                                const std::string& target, const std::set<std::string>& related,
                                std::string population_id) {
  std::vector<double> expertise, times;
  for (const auto& p : population) {
    if (p.history.empty()) continue;
    expertise.push_back(expertise_score(p, target, related));
    if (auto m = mean_response_secs(p)) times.push_back(*m);
  }
  ThresholdSet t;
  t.population_id = std::move(population_id);
  t.expertise_p75 = compute_percentile_threshold(expertise, 75.0);
  t.time_p50 = times.empty() ? 0.0 : compute_percentile_threshold(times, 50.0);
  return t;
}

GroupLabel label_expertise(double score, double threshold) {
  return {GroupCategory::Expertise, score >= threshold ? GroupValue::Expert : GroupValue::Novice};
}

GroupLabel label_time(const AskerProfile& profile, double median_threshold) {
  auto m = mean_response_secs(profile);
  if (!m) return {GroupCategory::Time, GroupValue::UNK};
  return {GroupCategory::Time, *m >= median_threshold ? GroupValue::Slow : GroupValue::Fast};
}

const std::vector<std::string>& residence_cues() {
  static const std::vector<std::string> cues{"i live in",  "i live near", "i'm from",
                                             "im from",    "i am from",   "my city",
                                             "i'm based in", "i am based in", "i grew up in"};
  return cues;
}

namespace {

constexpr std::size_t kCueGap = 16;  // max bytes between cue end and entity start

bool self_identified(const std::string& lower, std::size_t entity_begin) {
  for (const auto& cue : residence_cues()) {
    std::size_t from = entity_begin > kCueGap + cue.size() ? entity_begin - kCueGap - cue.size() : 0;
    auto pos = lower.find(cue, from);
    while (pos != std::string::npos && pos + cue.size() <= entity_begin) {
      if (entity_begin - (pos + cue.size()) <= kCueGap) return true;
      pos = lower.find(cue, pos + 1);
    }
  }
  return false;
}

std::optional<GroupValue> resolve(const Gazetteer& g, const std::string& place) {
  try {
    if (auto c = g.country(place)) return is_us_country(*c) ? GroupValue::US : GroupValue::NonUS;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

template <typename Map>
std::vector<std::pair<std::string, std::size_t>> by_count(const Map& counts) {
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  // std::map iteration is alphabetical, so stable sorting on count keeps ties alphabetical
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return v;
}

}  // namespace

GroupLabel infer_location(const AskerProfile& profile, const LocationPorts& ports,
                          int min_comments) {
  std::map<std::string, std::size_t> mentions;
  for (const auto& e : profile.history) {
    std::vector<EntitySpan> spans;
    try {
      spans = ports.ner.locations(e.body);
    } catch (const std::exception&) {
      continue;
    }
    const auto lower = text::to_lower(e.body);
    for (const auto& s : spans)
      if (self_identified(lower, s.begin)) ++mentions[text::to_lower(s.text)];
  }
  for (const auto& [place, n] : by_count(mentions))
    if (auto v = resolve(ports.gazetteer, place)) return {GroupCategory::Location, *v};

  std::map<std::string, std::string> geo;
  for (const auto& [k, v] : ports.subreddit_geo) geo[text::to_lower(k)] = v;
  std::map<std::string, std::size_t> local;
  for (const auto& e : profile.history) {
    auto s = text::to_lower(e.subreddit);
    if (geo.contains(s)) ++local[s];
  }
  for (const auto& [sub, n] : by_count(local)) {
    if (n < static_cast<std::size_t>(min_comments)) break;
    if (auto v = resolve(ports.gazetteer, geo.at(sub))) return {GroupCategory::Location, *v};
  }
  return {GroupCategory::Location, GroupValue::UNK};
}

void label_profiles(std::vector<AskerProfile>& profiles, const ThresholdSet& thresholds,
                    const std::string& target, const std::set<std::string>& related,
                    const LocationPorts& ports, int min_comments) {
  const auto n = static_cast<long>(profiles.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    auto& p = profiles[static_cast<std::size_t>(i)];
    p.expertise_score = expertise_score(p, target, related);
    p.mean_response_secs = mean_response_secs(p);
    p.labels[GroupCategory::Expertise] =
        p.history.empty() ? GroupValue::UNK
                          : label_expertise(p.expertise_score, thresholds.expertise_p75).value;
    p.labels[GroupCategory::Time] = label_time(p, thresholds.time_p50).value;
    p.labels[GroupCategory::Location] = infer_location(p, ports, min_comments).value;
  }
}

std::set<std::string> related_subreddits(const std::string& target,
                                         const EmbeddingTable& subreddit_embeddings, int k,
                                         const std::map<std::string, std::set<std::string>>& allowlist,
                                         std::vector<std::string>* warnings) {
  const auto t = text::to_lower(target);
  const std::vector<double>* tv = nullptr;
  for (const auto& [name, v] : subreddit_embeddings)
    if (text::to_lower(name) == t) tv = &v;
  if (!tv) {
    if (warnings) warnings->push_back("subreddit " + target + " has no embedding");
    return {};
  }
  std::vector<std::pair<double, std::string>> sims;
  for (const auto& [name, v] : subreddit_embeddings) {
    auto n = text::to_lower(name);
    if (n == t) continue;
    sims.emplace_back(-stats::cosine(*tv, v), n);
  }
  std::sort(sims.begin(), sims.end());
  std::set<std::string> allowed;
  for (const auto& [key, names] : allowlist)
    if (text::to_lower(key) == t)
      for (const auto& n : names) allowed.insert(text::to_lower(n));
  std::set<std::string> out;
  for (std::size_t i = 0; i < sims.size() && i < static_cast<std::size_t>(std::max(k, 0)); ++i)
    if (allowed.contains(sims[i].second)) out.insert(sims[i].second);
  return out;
}

std::map<std::string, std::set<std::string>> load_allowlist(const std::string& path) {
  std::map<std::string, std::set<std::string>> out;
  for (const auto& [k, v] : load_key_values(path)) {
    auto& s = out[text::to_lower(k)];
    for (auto& n : text::split_whitespace(v)) s.insert(text::to_lower(n));
  }
  return out;
}

void write_thresholds(const std::string& path, const std::vector<ThresholdSet>& sets) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& t : sets)
    out << json{{"population_id", t.population_id},
                {"expertise_p75", t.expertise_p75},
                {"time_p50", t.time_p50}}
               .dump()
        << "\n";
}

std::vector<ThresholdSet> read_thresholds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ThresholdSet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto j = json::parse(line);
    out.push_back({j.at("expertise_p75").get<double>(), j.at("time_p50").get<double>(),
                   j.at("population_id").get<std::string>()});
  }
  return out;
}

std::vector<AskerProfile> read_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<AskerProfile> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto j = json::parse(line);
    std::vector<HistoryEntry> h;
    for (const auto& e : j.value("history", json::array())) {
      HistoryEntry he;
      he.subreddit = e.value("subreddit", "");
      he.created_utc = e.value("created_utc", std::int64_t{0});
      if (e.contains("parent_created_utc") && e["parent_created_utc"].is_number())
        he.parent_created_utc = e["parent_created_utc"].get<std::int64_t>();
      he.body = e.value("body", "");
      h.push_back(std::move(he));
    }
    auto p = make_profile(j.at("asker_id").get<std::string>(), std::move(h));
    const auto labels = j.value("labels", json::object());
    for (const auto& [k, v] : labels.items())
      p.labels[parse_category(k)] = parse_value(v.get<std::string>());
    out.push_back(std::move(p));
  }
  return out;
}

std::string to_json_line(const AskerProfile& p) {
  json h = json::array();
  for (const auto& e : p.history) {
    json je{{"subreddit", e.subreddit}, {"created_utc", e.created_utc}, {"body", e.body}};
    if (e.parent_created_utc) je["parent_created_utc"] = *e.parent_created_utc;
    h.push_back(std::move(je));
  }
  json labels = json::object();
  for (const auto& [c, v] : p.labels) labels[std::string(to_string(c))] = std::string(to_string(v));
  json j{{"asker_id", p.asker_id}, {"history", h}, {"labels", labels},
         {"expertise_score", p.expertise_score}};
  if (p.mean_response_secs) j["mean_response_secs"] = *p.mean_response_secs;
  return j.dump();
}

}  // namespace socq::profile
