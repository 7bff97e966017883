#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "socq/eval_harness.hpp"
#include "socq/ports.hpp"
#include "socq/stats.hpp"
#include "socq/synthetic.hpp"

using namespace socq;
using namespace socq::eval;

namespace {

// Maps a handful of fixed strings to orthogonal axes; anything else is zero.
struct AxisEncoder : SentenceEncoder {
  std::map<std::string, std::vector<double>> table;
  std::vector<double> encode(std::string_view t) const override {
    auto it = table.find(std::string(t));
    return it == table.end() ? std::vector<double>(3, 0.0) : it->second;
  }
  std::size_t dim() const override { return 3; }
};

}  // namespace

TEST_CASE("bleu1 examples") {
  CHECK(bleu1("where do you live?", "where do you live?") == 1.0);
  CHECK(bleu1("apples pears", "where do you live") == 0.0);
  CHECK(bleu1("where do you live", "where do you work") == doctest::Approx(0.75));
  CHECK(bleu1("", "where") == 0.0);
  CHECK(bleu1(Tokens{"the", "the", "the"}, Tokens{"the", "cat"}) == doctest::Approx(1.0 / 3.0));
  CHECK(bleu1(Tokens{"where"}, Tokens{"where", "do", "you"}) == doctest::Approx(std::exp(1.0 - 3.0)));
}

TEST_CASE("bleu1 is monotone under replacement by novel tokens") {
  std::mt19937 rng(2);
  const std::vector<std::string> pool{"a", "b", "c", "d", "e"};
  for (int t = 0; t < 50; ++t) {
    Tokens ref(1 + rng() % 8);
    for (auto& w : ref) w = pool[rng() % pool.size()];
    Tokens hyp = ref;
    double prev = bleu1(hyp, ref);
    CHECK(prev == doctest::Approx(1.0));
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      hyp[i] = "novel" + std::to_string(i);
      const double now = bleu1(hyp, ref);
      CHECK(now <= prev + 1e-15);
      prev = now;
    }
  }
}

TEST_CASE("bert distance") {
  HashingSentenceEncoder enc(64);
  CHECK(bert_distance("where do you live?", "where do you live?", enc) == doctest::Approx(0.0));
  CHECK(bert_distance("a b", "c d e", enc) == doctest::Approx(bert_distance("c d e", "a b", enc)));
  AxisEncoder axes;
  axes.table = {{"x", {1, 0, 0}}, {"y", {0, 1, 0}}};
  CHECK(bert_distance("x", "y", axes) == doctest::Approx(1.0));
  struct Down : SentenceEncoder {
    std::vector<double> encode(std::string_view) const override { throw PortError("down"); }
    std::size_t dim() const override { return 1; }
  } down;
  CHECK_THROWS_AS(bert_distance("a", "b", down), PortError);
}

TEST_CASE("perplexity") {
  for (std::size_t v : {10u, 100u, 1000u}) {
    UniformScorer s(v);
    CHECK(perplexity(s, {"where do you live?", "why", "how much is it"}) == doctest::Approx(v).epsilon(1e-12));
  }
  CHECK_THROWS(perplexity(UniformScorer(10), {}));
  CHECK(perplexity_from_log_probs({{0.0, 0.0}}) == 1.0);
}

TEST_CASE("type/token, diversity, redundancy examples") {
  CHECK(type_token_bigram(std::vector<std::string>{"where do you live"}) == 1.0);
  CHECK(type_token_bigram(std::vector<std::string>{"where do you live", "where do you live"}) == 0.5);
  // bigrams: (a b)(b c) + (b c)(c d) + (a b) -> 3 distinct of 5
  CHECK(type_token_bigram(std::vector<std::string>{"a b c", "b c d", "a b"}) == doctest::Approx(0.6));
  CHECK(type_token_bigram(std::vector<std::string>{"a", "b"}) == 0.0);

  CHECK(diversity({"a?", "A", "b"}) == doctest::Approx(2.0 / 3.0));
  CHECK(diversity({"a", "b", "c"}) == 1.0);
  CHECK(redundancy({"a", "b"}, std::vector<std::string>{"a"}) == 0.5);
  CHECK(redundancy({"a", "b"}, std::vector<std::string>{"b?", "A"}) == 1.0);
  CHECK(redundancy({"a", "b"}, std::vector<std::string>{}) == 0.0);
  CHECK_THROWS(diversity({}));
  CHECK_THROWS(redundancy({}, std::vector<std::string>{}));
}

TEST_CASE("metrics agree with the brute-force oracles") {
  std::mt19937 rng(17);
  const std::vector<std::string> pool{"where", "do", "you", "live", "what", "is", "it"};
  auto sentence = [&] {
    std::string s;
    const auto n = rng() % 6;
    for (std::size_t i = 0; i < n; ++i) s += (i ? (rng() % 3 ? " " : "  ") : "") + pool[rng() % pool.size()];
    if (rng() % 2) s += "?";
    if (!s.empty() && rng() % 4 == 0) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
  };
  for (int t = 0; t < 150; ++t) {
    const auto h = sentence(), r = sentence();
    CHECK(bleu1(h, r) == doctest::Approx(oracle::bleu1(oracle::words(h), oracle::words(r))).epsilon(1e-12));
    std::vector<std::string> hyps(1 + rng() % 10), train(rng() % 10);
    for (auto& x : hyps) x = sentence();
    for (auto& x : train) x = sentence();
    CHECK(diversity(hyps) == oracle::diversity(hyps));
    CHECK(redundancy(hyps, train) == oracle::redundancy(hyps, train));
    std::vector<std::vector<std::string>> toks;
    for (auto& x : hyps) toks.push_back(oracle::words(x));
    CHECK(type_token_bigram(toks) == oracle::type_token_bigram(toks));
  }
}

TEST_CASE("mark_divisive") {
  std::vector<QuestionPair> pairs;
  for (int i = 0; i < 20; ++i) {
    QuestionPair p;
    p.q1_id = std::to_string(i);
    p.similarity = 0.05 * ((i * 7) % 20);
    pairs.push_back(p);
  }
  auto marked = mark_divisive(pairs, 10);
  std::vector<double> low;
  for (auto& p : marked)
    if (p.divisive) low.push_back(p.similarity);
  std::sort(low.begin(), low.end());
  CHECK(low == std::vector<double>{0.0, 0.05});

  QuestionPair same;
  same.similarity = 1.0;
  auto withsame = pairs;
  withsame.push_back(same);
  CHECK_FALSE(mark_divisive(withsame, 50).back().divisive);
  CHECK_FALSE(mark_divisive({same}, 50).front().divisive);

  std::mt19937 rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<QuestionPair> ps(1 + rng() % 10);
    std::vector<double> sims;
    for (auto& p : ps) {
      p.similarity = static_cast<double>(rng() % 5) / 4.0;
      sims.push_back(p.similarity);
    }
    const double n = 1 + rng() % 99;
    auto out = mark_divisive(ps, n);
    auto want = oracle::divisive(sims, n);
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(out[i].divisive == want[i]);
  }
}

TEST_CASE("word embedding similarity") {
  WordVectors wv{{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, 1}}};
  CHECK(*word_embedding_similarity("a b", "b a", wv) == doctest::Approx(1.0));
  CHECK(*word_embedding_similarity("a", "b", wv) == doctest::Approx(0.0));
  CHECK(*word_embedding_similarity("a b zzz", "c", wv) == doctest::Approx(1.0));
  CHECK_FALSE(word_embedding_similarity("zzz", "a", wv));
}

TEST_CASE("divisiveness cross-check on clustered questions") {
  auto fx = synthetic::clustered_questions(60, 48, 5);
  HashingSentenceEncoder enc(256);
  std::vector<double> s1, s2;
  for (auto& [a, b] : fx.pairs) {
    auto w = word_embedding_similarity(a, b, fx.vectors);
    REQUIRE(w);
    s1.push_back(pair_similarity(a, b, enc));
    s2.push_back(*w);
  }
  CHECK(stats::spearman(s1, s2) > 0.9);
}

TEST_CASE("question type") {
  HeuristicDependencyParser p;
  CHECK(question_type("where do you live?", p) == "where");
  CHECK(question_type("you did what?", p) == "what");
  CHECK(question_type("tell me more?", p) == "other");
  CHECK(question_type("", p) == "other");
  struct Broken : DependencyParser {
    std::vector<DepToken> parse(std::string_view) const override { throw PortError("nope"); }
  } broken;
  std::vector<std::string> warnings;
  CHECK(question_type("why?", broken, &warnings) == "other");
  CHECK(warnings.size() == 1);
}

TEST_CASE("post similarity") {
  AxisEncoder axes;
  axes.table = {{"q", {1, 0, 0}}, {"One.", {1, 0, 0}}, {"Two.", {0, 1, 0}}, {"Three.", {0.6, 0.8, 0}}};
  CHECK(*post_similarity("q", "One. Two. Three.", axes) == doctest::Approx(1.0));
  CHECK(*post_similarity("q", "Two. Three.", axes) == doctest::Approx(0.6));
  CHECK(*post_similarity("q", "Two.", axes) == doctest::Approx(0.0));
  CHECK_FALSE(post_similarity("q", "", axes));
}

TEST_CASE("evaluate_run subsets and reporting") {
  std::vector<EvalItem> items{
      {"a", "p1", "s", "post one", "where do you live?", GroupValue::Expert},
      {"b", "p1", "s", "post one", "what model is it?", GroupValue::Novice},
      {"c", "p2", "s", "post two", "how old is it?", GroupValue::Expert},
      {"d", "p2", "s", "post two", "how old is it?", GroupValue::Novice},
      {"e", "p3", "s", "post three", "why?", GroupValue::UNK},
  };
  ModelOutputs m{"text_only", {"where do you live?", "what", "how old", "how old is it?", "why?"}, std::nullopt};
  ModelOutputs u{"uniform", m.hypotheses, std::vector<std::vector<double>>(5, std::vector<double>(3, -std::log(10.0)))};
  HashingSentenceEncoder enc(64);
  HeuristicDependencyParser parser;
  EvalContext ctx{&enc, &parser, {"why"}, {"a", "b"}};
  auto rows = evaluate_run(items, {m, u}, {"full", "divisive@50", "group-specific", "by_question_type"}, ctx);

  auto find = [&](const std::string& model, const std::string& subset) -> const MetricsRow& {
    for (auto& r : rows)
      if (r.model == model && r.subset == subset) return r;
    FAIL("missing row " << model << " " << subset);
    return rows.front();
  };
  auto& full = find("text_only", "full");
  CHECK(full.n == 5);
  CHECK(full.redundancy == doctest::Approx(0.2));
  CHECK_FALSE(full.perplexity);
  CHECK(*find("uniform", "full").perplexity == doctest::Approx(10.0));
  CHECK(find("text_only", "group_specific").n == 2);
  CHECK(find("text_only", "type:how").n == 2);
  CHECK(find("text_only", "type:why").n == 1);
  // two cross-group pairs; the dissimilar p1 pair is the divisive one at 50%
  CHECK(find("text_only", "divisive@50").n == 2);

  for (auto& r : rows) {
    CHECK(r.bleu1 >= 0.0);
    CHECK(r.bleu1 <= 1.0);
    CHECK(r.bert_distance >= 0.0);
    CHECK(r.bert_distance <= 2.0);
  }

  EvalContext none{&enc, &parser, {}, {}};
  auto empty = evaluate_run(items, {m}, {"group_specific"}, none);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].n == 0);
  CHECK(to_tsv(empty).find("n=0") != std::string::npos);
  CHECK(to_json(rows).find("\"divisive@50\"") != std::string::npos);

  CHECK(to_tsv(evaluate_run(items, {m, u}, {"full", "divisive@50"}, ctx)) ==
        to_tsv(evaluate_run(items, {m, u}, {"full", "divisive@50"}, ctx)));
  CHECK_THROWS(evaluate_run(items, {m}, {"bogus"}, ctx));
  ModelOutputs short_m{"x", {"a"}, std::nullopt};
  CHECK_THROWS(evaluate_run(items, {short_m}, {"full"}, ctx));
}
