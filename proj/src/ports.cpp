#include "socq/ports.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "socq/text.hpp"

namespace socq {

std::vector<double> hashed_direction(std::string_view feature, std::size_t dim,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(text::fnv1a(feature, 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = gauss(rng);
  return v;
}

HashingSentenceEncoder::HashingSentenceEncoder(std::size_t dim, std::uint64_t seed,
                                               double bigram_weight)
    : dim_(dim), seed_(seed), bigram_weight_(bigram_weight) {}

std::vector<double> HashingSentenceEncoder::encode(std::string_view s) const {
  auto toks = text::words(s);
  std::vector<double> out(dim_, 0.0);
  auto add = [&](const std::string& f, double w) {
    auto d = hashed_direction(f, dim_, seed_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] += w * d[i];
  };
  for (const auto& t : toks) add(t, 1.0);
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) add(toks[i] + "\x1f" + toks[i + 1], bigram_weight_);
  double norm = 0.0;
  for (double x : out) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (auto& x : out) x /= norm;
  return out;
}

bool AsciiRatioDetector::is_english(std::string_view s) const {
  std::size_t letters = 0, ascii = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      if (std::isalpha(c)) {
        ++letters;
        ++ascii;
      }
    } else if ((c & 0xC0) == 0xC0) {
      ++letters;  // count each UTF-8 lead byte as one non-ASCII letter
    }
  }
  if (letters == 0) return false;
  return static_cast<double>(ascii) / static_cast<double>(letters) >= min_ratio_;
}

MapGazetteer::MapGazetteer(const std::map<std::string, std::string>& entries) {
  for (const auto& [k, v] : entries) entries_[text::to_lower(text::trim(k))] = text::trim(v);
}

std::optional<std::string> MapGazetteer::country(std::string_view place) const {
  auto it = entries_.find(text::to_lower(text::trim(place)));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<EntitySpan> GazetteerEntityRecognizer::locations(std::string_view s) const {
  struct Word {
    std::size_t b, e;
  };
  std::vector<Word> ws;
  std::size_t i = 0;
  auto word_char = [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) || c == '\'' || c == '-';
  };
  while (i < s.size()) {
    while (i < s.size() && !word_char(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && word_char(s[j])) ++j;
    if (j > i) ws.push_back({i, j});
    i = j;
  }
  std::vector<EntitySpan> out;
  std::size_t w = 0;
  while (w < ws.size()) {
    bool matched = false;
    for (std::size_t len = 3; len >= 1 && !matched; --len) {
      if (w + len > ws.size()) continue;
      std::size_t b = ws[w].b, e = ws[w + len - 1].e;
      // multi-word names must be space separated
      std::string cand;
      for (std::size_t k = w; k < w + len; ++k) {
        if (k > w) cand += ' ';
        cand += std::string(s.substr(ws[k].b, ws[k].e - ws[k].b));
      }
      if (gazetteer_.country(cand)) {
        out.push_back({std::string(s.substr(b, e - b)), b, e});
        w += len;
        matched = true;
      }
    }
    if (!matched) ++w;
  }
  return out;
}

bool is_us_country(std::string_view country) {
  static const std::set<std::string> us{"us", "usa", "u.s.", "u.s.a.", "united states",
                                        "united states of america", "america"};
  return us.contains(text::to_lower(text::trim(country)));
}

namespace {

const std::set<std::string>& wh_words() {
  static const std::set<std::string> s{"what", "where", "when", "why",  "who",
                                       "whom", "whose", "which", "how"};
  return s;
}

const std::set<std::string>& aux_words() {
  static const std::set<std::string> s{"do",    "does",  "did",  "can",  "could", "would",
                                       "should", "will", "shall", "may", "might", "must",
                                       "is",    "are",   "was",  "were", "am",    "have",
                                       "has",   "had"};
  return s;
}

const std::set<std::string>& function_words() {
  static const std::set<std::string> s{
      "i",    "you",   "he",   "she",  "it",   "we",    "they",  "me",    "him",  "her",
      "us",   "them",  "my",   "your", "his",  "its",   "our",   "their", "the",  "a",
      "an",   "this",  "that", "these", "those", "there", "not", "n't",  "ever", "really",
      "just", "also",  "all",  "any",  "some", "mine",  "yours", "anyone", "someone"};
  return s;
}

const std::set<std::string>& prepositions() {
  static const std::set<std::string> s{"for", "with", "about", "in", "on", "to", "from", "of", "at", "by"};
  return s;
}

}  // namespace

std::vector<DepToken> HeuristicDependencyParser::parse(std::string_view sentence) const {
  auto ws = text::words(sentence);
  std::vector<DepToken> out;
  out.reserve(ws.size());
  for (auto& w : ws) out.push_back({w, -1, "dep"});
  if (ws.empty()) return out;

  const bool fronted = wh_words().contains(ws[0]) || aux_words().contains(ws[0]);
  int root = -1;
  std::size_t start = fronted ? 1 : 0;
  for (std::size_t i = start; i < ws.size(); ++i) {
    const auto& w = ws[i];
    if (wh_words().contains(w) || function_words().contains(w) || prepositions().contains(w))
      continue;
    if (fronted && aux_words().contains(w)) continue;
    root = static_cast<int>(i);
    break;
  }
  if (root < 0) {
    // copular or verbless question: the first auxiliary (or first word) heads it
    root = 0;
    for (std::size_t i = 0; i < ws.size(); ++i)
      if (aux_words().contains(ws[i])) {
        root = static_cast<int>(i);
        break;
      }
  }
  out[root].rel = "ROOT";
  out[root].head = -1;

  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (static_cast<int>(i) == root) continue;
    const auto& w = ws[i];
    if (wh_words().contains(w)) {
      if (i > 0 && prepositions().contains(ws[i - 1])) {
        out[i].head = static_cast<int>(i - 1);
        out[i].rel = "pobj";
      } else {
        out[i].head = root;
        out[i].rel = (w == "where" || w == "when" || w == "why" || w == "how") ? "advmod" : "dobj";
      }
    } else if (i == 0 && aux_words().contains(w)) {
      out[i].head = root;
      out[i].rel = "aux";
    } else if (i + 1 < ws.size() && static_cast<int>(i + 1) == root && aux_words().contains(w)) {
      out[i].head = root;
      out[i].rel = "aux";
    } else {
      out[i].head = root;
      out[i].rel = "dep";
    }
  }
  return out;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    out[text::trim(line.substr(0, tab))] = text::trim(line.substr(tab + 1));
  }
  return out;
}

std::vector<std::string> load_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace socq
