#include "socq/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "socq/stats.hpp"
#include "socq/text.hpp"

namespace socq::eval {

double bleu1(const Tokens& hyp, const Tokens& ref) {
  if (hyp.empty() || ref.empty()) return 0.0;
  std::map<std::string, int> ref_counts, hyp_counts;
  for (const auto& w : ref) ++ref_counts[w];
  for (const auto& w : hyp) ++hyp_counts[w];
  int matches = 0;
  for (const auto& [w, c] : hyp_counts) {
    auto it = ref_counts.find(w);
    if (it != ref_counts.end()) matches += std::min(c, it->second);
  }
  const double h = static_cast<double>(hyp.size());
  const double precision = matches / h;
  const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(ref.size()) / h));
  return precision * bp;
}

double bleu1(const std::string& hypothesis, const std::string& reference) {
  return bleu1(text::words(hypothesis), text::words(reference));
}

double bert_distance(const std::string& hypothesis, const std::string& reference,
                     const SentenceEncoder& encoder) {
  auto a = encoder.encode(hypothesis);
  auto b = encoder.encode(reference);
  return std::max(0.0, 1.0 - stats::cosine(a, b));
}

std::vector<double> UniformScorer::token_log_probs(const std::string& target) const {
  if (v_ == 0) throw std::invalid_argument("uniform scorer over an empty vocabulary");
  const auto n = text::words(target).size() + 1;
  return std::vector<double>(n, -std::log(static_cast<double>(v_)));
}

double perplexity_from_log_probs(const std::vector<std::vector<double>>& per_target) {
  double nll = 0;
  std::size_t count = 0;
  for (const auto& t : per_target)
    for (double lp : t) {
      nll -= lp;
      ++count;
    }
  if (count == 0) throw std::invalid_argument("perplexity of an empty target set");
  return std::exp(nll / static_cast<double>(count));
}

double perplexity(const TargetScorer& scorer, const std::vector<std::string>& targets) {
  if (targets.empty()) throw std::invalid_argument("perplexity of an empty target set");
  std::vector<std::vector<double>> lps;
  lps.reserve(targets.size());
  for (const auto& t : targets) lps.push_back(scorer.token_log_probs(t));
  return perplexity_from_log_probs(lps);
}

double type_token_bigram(const std::vector<Tokens>& hypotheses) {
  std::set<std::pair<std::string, std::string>> distinct;
  std::size_t total = 0;
  for (const auto& h : hypotheses)
    for (std::size_t i = 1; i < h.size(); ++i) {
      distinct.emplace(h[i - 1], h[i]);
      ++total;
    }
  return total == 0 ? 0.0 : static_cast<double>(distinct.size()) / static_cast<double>(total);
}

double type_token_bigram(const std::vector<std::string>& hypotheses) {
  std::vector<Tokens> toks;
  toks.reserve(hypotheses.size());
  for (const auto& h : hypotheses) toks.push_back(text::words(h));
  return type_token_bigram(toks);
}

double diversity(const std::vector<std::string>& hypotheses) {
  if (hypotheses.empty()) throw std::invalid_argument("diversity of no hypotheses");
  std::set<std::string> distinct;
  for (const auto& h : hypotheses) distinct.insert(text::normalize_question(h));
  return static_cast<double>(distinct.size()) / static_cast<double>(hypotheses.size());
}

double redundancy(const std::vector<std::string>& hypotheses,
                  const std::set<std::string>& normalized_training) {
  if (hypotheses.empty()) throw std::invalid_argument("redundancy of no hypotheses");
  std::size_t hits = 0;
  for (const auto& h : hypotheses)
    if (normalized_training.contains(text::normalize_question(h))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(hypotheses.size());
}

double redundancy(const std::vector<std::string>& hypotheses,
                  const std::vector<std::string>& training_questions) {
  std::set<std::string> norm;
  for (const auto& q : training_questions) norm.insert(text::normalize_question(q));
  return redundancy(hypotheses, norm);
}

double pair_similarity(const std::string& q1, const std::string& q2, const SentenceEncoder& encoder) {
  return stats::cosine(encoder.encode(q1), encoder.encode(q2));
}

std::vector<QuestionPair> mark_divisive(std::vector<QuestionPair> pairs, double n_percentile) {
  for (auto& p : pairs) p.divisive = false;
  if (pairs.size() < 2) return pairs;
  std::vector<double> sims;
  sims.reserve(pairs.size());
  for (const auto& p : pairs) sims.push_back(p.similarity);
  const double threshold = stats::nearest_rank_percentile(sims, n_percentile);
  for (auto& p : pairs) p.divisive = p.similarity <= threshold;
  return pairs;
}

std::optional<double> word_embedding_similarity(const std::string& q1, const std::string& q2,
                                                const WordVectors& vectors) {
  auto mean_vec = [&](const std::string& q) -> std::optional<std::vector<double>> {
    std::vector<double> sum;
    std::size_t n = 0;
    for (const auto& w : text::words(q)) {
      auto it = vectors.find(w);
      if (it == vectors.end()) continue;
      if (sum.empty()) sum.assign(it->second.size(), 0.0);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += it->second[i];
      ++n;
    }
    if (n == 0) return std::nullopt;
    for (auto& x : sum) x /= static_cast<double>(n);
    return sum;
  };
  auto a = mean_vec(q1);
  auto b = mean_vec(q2);
  if (!a || !b) return std::nullopt;
  return stats::cosine(*a, *b);
}

namespace {
const std::set<std::string>& wh_words() {
  static const std::set<std::string> s{"what", "where", "when", "why", "how",
                                       "who", "whom", "whose", "which"};
  return s;
}
}  // namespace

std::string question_type(const std::string& question, const DependencyParser& parser,
                          std::vector<std::string>* warnings) {
  std::vector<DepToken> parse;
  try {
    parse = parser.parse(question);
  } catch (const std::exception& e) {
    if (warnings) warnings->push_back("parser failed on '" + question + "': " + e.what());
    return "other";
  }
  int root = -1;
  for (std::size_t i = 0; i < parse.size(); ++i)
    if (parse[i].head < 0) root = static_cast<int>(i);
  for (std::size_t i = 0; i < parse.size(); ++i) {
    const auto w = text::to_lower(parse[i].word);
    if (!wh_words().contains(w)) continue;
    if (static_cast<int>(i) == root || parse[i].head == root) return w;
  }
  return "other";
}

std::optional<double> post_similarity(const std::string& question, const std::string& post,
                                      const SentenceEncoder& encoder) {
  auto sentences = text::split_sentences(post);
  if (sentences.empty()) return std::nullopt;
  auto q = encoder.encode(question);
  double best = -INFINITY;
  for (const auto& s : sentences) best = std::max(best, stats::cosine(q, encoder.encode(s)));
  return best;
}

std::vector<QuestionPair> cross_group_pairs(const std::vector<EvalItem>& items,
                                            const SentenceEncoder& encoder) {
  std::map<std::string, std::vector<const EvalItem*>> by_post;
  for (const auto& it : items)
    if (it.group != GroupValue::UNK) by_post[it.post_id].push_back(&it);
  std::vector<QuestionPair> pairs;
  for (const auto& [post, members] : by_post)
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const auto& a = *members[i];
        const auto& b = *members[j];
        if (a.group == b.group) continue;
        QuestionPair p{post, a.id, b.id, a.reference, b.reference, a.group, b.group, 0.0, false};
        p.similarity = pair_similarity(a.reference, b.reference, encoder);
        pairs.push_back(std::move(p));
      }
  return pairs;
}

namespace {

MetricsRow score_subset(const std::string& subset, const ModelOutputs& m,
                        const std::vector<std::size_t>& idx, const std::vector<double>& bleu,
                        const std::vector<double>& bert, const std::set<std::string>& training) {
  MetricsRow row;
  row.model = m.name;
  row.subset = subset;
  row.n = idx.size();
  if (idx.empty()) return row;
  std::vector<std::string> hyps;
  double b = 0, d = 0;
  for (auto i : idx) {
    hyps.push_back(m.hypotheses[i]);
    b += bleu[i];
    d += bert[i];
  }
  row.bleu1 = b / static_cast<double>(idx.size());
  row.bert_distance = d / static_cast<double>(idx.size());
  row.diversity = diversity(hyps);
  row.type_token = type_token_bigram(hyps);
  row.redundancy = redundancy(hyps, training);
  if (m.reference_log_probs) {
    std::vector<std::vector<double>> lps;
    for (auto i : idx) lps.push_back((*m.reference_log_probs)[i]);
    row.perplexity = perplexity_from_log_probs(lps);
  }
  return row;
}

}  // namespace

std::vector<MetricsRow> evaluate_run(const std::vector<EvalItem>& items,
                                     const std::vector<ModelOutputs>& models,
                                     const std::vector<std::string>& subsets, const EvalContext& ctx) {
  if (!ctx.encoder) throw std::invalid_argument("evaluate_run needs a sentence encoder");
  for (const auto& m : models)
    if (m.hypotheses.size() != items.size() ||
        (m.reference_log_probs && m.reference_log_probs->size() != items.size()))
      throw std::invalid_argument("outputs of model '" + m.name + "' are not aligned with the items");

  std::set<std::string> training;
  for (const auto& q : ctx.training_questions) training.insert(text::normalize_question(q));

  // Subset name -> item indices, in request order.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> plan;
  std::vector<QuestionPair> pairs;
  bool pairs_ready = false;
  for (const auto& s : subsets) {
    if (s == "full") {
      std::vector<std::size_t> all(items.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      plan.emplace_back(s, std::move(all));
    } else if (s.rfind("divisive@", 0) == 0) {
      const double n = std::stod(s.substr(9));
      if (!pairs_ready) {
        pairs = cross_group_pairs(items, *ctx.encoder);
        pairs_ready = true;
      }
      std::set<std::string> ids;
      for (const auto& p : mark_divisive(pairs, n))
        if (p.divisive) {
          ids.insert(p.q1_id);
          ids.insert(p.q2_id);
        }
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (ids.contains(items[i].id)) idx.push_back(i);
      plan.emplace_back(s, std::move(idx));
    } else if (s == "group_specific" || s == "group-specific") {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (ctx.group_specific_ids.contains(items[i].id)) idx.push_back(i);
      plan.emplace_back("group_specific", std::move(idx));
    } else if (s == "by_question_type" || s == "by-question-type") {
      if (!ctx.parser) throw std::invalid_argument("question-type subsets need a parser");
      std::map<std::string, std::vector<std::size_t>> by_type;
      for (std::size_t i = 0; i < items.size(); ++i)
        by_type[question_type(items[i].reference, *ctx.parser)].push_back(i);
      for (auto& [t, idx] : by_type) plan.emplace_back("type:" + t, std::move(idx));
    } else {
      throw std::invalid_argument("unknown subset '" + s + "'");
    }
  }

  std::vector<MetricsRow> rows;
  for (const auto& m : models) {
    std::vector<double> bleu(items.size()), bert(items.size());
    const long n = static_cast<long>(items.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      bleu[u] = bleu1(m.hypotheses[u], items[u].reference);
      bert[u] = bert_distance(m.hypotheses[u], items[u].reference, *ctx.encoder);
    }
    for (const auto& [name, idx] : plan) rows.push_back(score_subset(name, m, idx, bleu, bert, training));
  }
  return rows;
}

std::string to_tsv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "model\tsubset\tn\tbleu1\tbert_distance\tdiversity\ttype_token\tredundancy\tperplexity\n";
  for (const auto& r : rows) {
    os << r.model << '\t' << r.subset << '\t';
    if (r.n == 0) {
      os << "n=0\t-\t-\t-\t-\t-\t-\n";
      continue;
    }
    os << r.n << '\t' << r.bleu1 << '\t' << r.bert_distance << '\t' << r.diversity << '\t'
       << r.type_token << '\t' << r.redundancy << '\t';
    if (r.perplexity)
      os << *r.perplexity;
    else
      os << '-';
    os << '\n';
  }
  return os.str();
}

std::string to_json(const std::vector<MetricsRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"model", r.model}, {"subset", r.subset}, {"n", r.n}};
    if (r.n > 0) {
      j["bleu1"] = r.bleu1;
      j["bert_distance"] = r.bert_distance;
      j["diversity"] = r.diversity;
      j["type_token"] = r.type_token;
      j["redundancy"] = r.redundancy;
      j["perplexity"] = r.perplexity ? nlohmann::json(*r.perplexity) : nlohmann::json(nullptr);
    }
    out.push_back(std::move(j));
  }
  return out.dump(2);
}

}  // namespace socq::eval
