#include "socq/question_filter.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "socq/text.hpp"

namespace socq::questions {

std::vector<Question> extract_candidates(const Comment& comment) {
  std::vector<Question> out;
  int k = 0;
  for (auto& sentence : text::split_sentences(comment.body)) {
    if (sentence.back() != '?') continue;
    Question q;
    q.id = comment.id + "#" + std::to_string(k++);
    q.post_id = comment.post_id;
    q.asker_id = comment.author;
    q.text = std::move(sentence);
    q.created_utc = comment.created_utc;
    out.push_back(std::move(q));
  }
  return out;
}

namespace {

std::vector<int> parse_labels(const std::string& cell) {
  std::vector<int> out;
  for (auto& part : text::split(cell, ',')) {
    auto t = text::trim(part);
    if (t.empty()) continue;
    if (t != "0" && t != "1") throw std::runtime_error("annotation label must be 0 or 1: " + t);
    out.push_back(t == "1");
  }
  return out;
}

bool unanimous(const std::vector<int>& labels) {
  return !labels.empty() &&
         std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); });
}

}  // namespace

std::vector<AnnotatedQuestion> read_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) return {};
  auto header = text::split(line, '\t');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[text::trim(header[i])] = i;
  for (const char* need : {"id", "text", "infoseek"})
    if (!col.contains(need)) throw std::runtime_error(path + ": missing column " + need);
  std::vector<AnnotatedQuestion> rows;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto cells = text::split(line, '\t');
    auto cell = [&](const char* name) -> std::string {
      auto it = col.find(name);
      return it != col.end() && it->second < cells.size() ? cells[it->second] : "";
    };
    AnnotatedQuestion r;
    r.id = cell("id");
    r.post_id = cell("post_id");
    r.text = cell("text");
    r.relevant = parse_labels(cell("relevant"));
    r.infoseek = parse_labels(cell("infoseek"));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AnnotatedQuestion> unanimous_rows(const std::vector<AnnotatedQuestion>& rows) {
  std::vector<AnnotatedQuestion> out;
  for (const auto& r : rows)
    if (unanimous(r.infoseek)) out.push_back(r);
  return out;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> s{
      "a",      "about",   "above", "after",   "again",  "against", "all",    "am",
      "an",     "and",     "any",   "are",     "as",     "at",      "be",     "because",
      "been",   "before",  "being", "below",   "between", "both",   "but",    "by",
      "can",    "could",   "did",   "do",      "does",   "doing",   "down",   "during",
      "each",   "few",     "for",   "from",    "further", "had",    "has",    "have",
      "having", "he",      "her",   "here",    "hers",   "herself", "him",    "himself",
      "his",    "i",       "if",    "in",      "into",   "is",      "it",     "it's",
      "its",    "itself",  "just",  "me",      "more",   "most",    "my",     "myself",
      "no",     "nor",     "not",   "now",     "of",     "off",     "on",     "once",
      "only",   "or",      "other", "our",     "ours",   "ourselves", "out",  "over",
      "own",    "same",    "she",   "should",  "so",     "some",    "such",   "than",
      "that",   "the",     "their", "theirs",  "them",   "themselves", "then", "there",
      "these",  "they",    "this",  "those",   "through", "to",     "too",    "under",
      "until",  "up",      "very",  "was",     "we",     "were",    "while",  "will",
      "with",   "would",   "you",   "your",    "yours",  "yourself", "yourselves"};
  return s;
}

std::vector<std::string> top_vocabulary(const std::vector<std::string>& texts,
                                        const std::set<std::string>& stopwords, std::size_t k) {
  std::map<std::string, std::size_t> freq;
  for (const auto& t : texts)
    for (auto& w : text::words(t))
      if (!stopwords.contains(w)) ++freq[w];
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < items.size() && i < k; ++i) out.push_back(items[i].first);
  return out;
}

InfoSeekClassifier InfoSeekClassifier::train(const std::vector<AnnotatedQuestion>& rows,
                                             const std::set<std::string>& stopwords,
                                             const ClassifierOptions& options) {
  auto kept = unanimous_rows(rows);
  std::vector<std::string> texts;
  std::vector<int> y;
  for (const auto& r : kept) {
    texts.push_back(r.text);
    y.push_back(r.infoseek.front());
  }
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1) throw TrainingError("info-seeking classifier needs both classes");

  InfoSeekClassifier c;
  c.vocab_ = top_vocabulary(texts, stopwords, options.vocab_size);
  std::vector<std::vector<double>> x;
  x.reserve(texts.size());
  for (const auto& t : texts) x.push_back(c.features(t));
  c.forest_.fit(x, y, options.forest);
  return c;
}

std::vector<double> InfoSeekClassifier::features(const std::string& question) const {
  std::vector<double> f(vocab_.size(), 0.0);
  for (auto& w : text::words(question)) {
    auto it = std::find(vocab_.begin(), vocab_.end(), w);
    if (it != vocab_.end()) f[static_cast<std::size_t>(it - vocab_.begin())] += 1.0;
  }
  return f;
}

double InfoSeekClassifier::probability(const std::string& question) const {
  return forest_.predict_proba(features(question));
}

std::string InfoSeekClassifier::serialize() const {
  std::ostringstream out;
  out << vocab_.size() << "\n";
  for (const auto& w : vocab_) out << w << "\n";
  out << forest_.serialize();
  return out.str();
}

InfoSeekClassifier InfoSeekClassifier::deserialize(const std::string& data) {
  std::istringstream in(data);
  InfoSeekClassifier c;
  std::size_t n = 0;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("classifier: empty data");
  n = std::stoul(line);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("classifier: truncated vocabulary");
    c.vocab_.push_back(line);
  }
  std::ostringstream rest;
  rest << in.rdbuf();
  c.forest_ = ml::RandomForest::deserialize(rest.str());
  return c;
}

double f1_score(const std::vector<int>& truth, const std::vector<int>& predicted) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] && truth[i]) ++tp;
    if (predicted[i] && !truth[i]) ++fp;
    if (!predicted[i] && truth[i]) ++fn;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2 * tp / (2 * tp + fp + fn);
}

CrossValidation cross_validate(const std::vector<AnnotatedQuestion>& rows,
                               const std::set<std::string>& stopwords, int folds,
                               const ClassifierOptions& options) {
  auto kept = unanimous_rows(rows);
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  // stratify: deal each class round-robin after a seeded shuffle
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < kept.size(); ++i)
    (kept[i].infoseek.front() ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw TrainingError("info-seeking classifier needs both classes");
  std::mt19937_64 rng(options.forest.seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<int> fold_of(kept.size());
  std::size_t k = 0;
  for (auto i : pos) fold_of[i] = static_cast<int>(k++ % static_cast<std::size_t>(folds));
  for (auto i : neg) fold_of[i] = static_cast<int>(k++ % static_cast<std::size_t>(folds));

  CrossValidation cv;
  for (int f = 0; f < folds; ++f) {
    std::vector<AnnotatedQuestion> train, test;
    for (std::size_t i = 0; i < kept.size(); ++i) (fold_of[i] == f ? test : train).push_back(kept[i]);
    if (test.empty()) continue;
    auto clf = InfoSeekClassifier::train(train, stopwords, options);
    std::vector<int> truth, pred;
    for (const auto& r : test) {
      truth.push_back(r.infoseek.front());
      pred.push_back(clf.probability(r.text) >= 0.5);
    }
    cv.fold_f1.push_back(f1_score(truth, pred));
  }
  cv.mean_f1 = std::accumulate(cv.fold_f1.begin(), cv.fold_f1.end(), 0.0) /
               static_cast<double>(cv.fold_f1.size());
  return cv;
}

std::vector<Question> score_and_filter(std::vector<Question> questions,
                                       const InfoSeekClassifier& classifier, double threshold) {
  for (auto& q : questions) q.infoseek_prob = classifier.probability(q.text);
  return apply_threshold(questions, threshold);
}

std::vector<Question> apply_threshold(const std::vector<Question>& scored, double threshold) {
  std::vector<Question> out;
  for (const auto& q : scored)
    if (q.infoseek_prob >= threshold) out.push_back(q);
  return out;
}

std::string to_json_line(const Question& q) {
  nlohmann::json j{{"id", q.id},     {"post_id", q.post_id},         {"asker_id", q.asker_id},
                   {"text", q.text}, {"created_utc", q.created_utc}, {"infoseek_prob", q.infoseek_prob}};
  return j.dump();
}

Question question_from_json(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  return Question{j.at("id"),   j.at("post_id"),         j.at("asker_id"),
                  j.at("text"), j.value("created_utc", 0), j.value("infoseek_prob", 0.0)};
}

std::vector<Question> read_questions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Question> out;
  std::string line;
  while (std::getline(in, line))
    if (!text::trim(line).empty()) out.push_back(question_from_json(line));
  return out;
}

}  // namespace socq::questions
