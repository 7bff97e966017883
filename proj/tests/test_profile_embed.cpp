#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "socq/paragraph_vectors.hpp"
#include "socq/ports.hpp"
#include "socq/social_embeddings.hpp"
#include "socq/social_profiler.hpp"
#include "socq/stats.hpp"
#include "socq/synthetic.hpp"
#include "test_util.hpp"

using namespace socq;
using profile::HistoryEntry;

namespace {

HistoryEntry entry(const std::string& sub, std::int64_t t = 100, std::optional<std::int64_t> parent = {},
                   const std::string& body = "") {
  return HistoryEntry{sub, t, parent, body};
}

profile::AskerProfile with_subs(const std::vector<std::string>& subs) {
  std::vector<HistoryEntry> h;
  std::int64_t t = 1;
  for (auto& s : subs) h.push_back(entry(s, t++));
  return profile::make_profile("a", h);
}

struct Geo {
  MapGazetteer gaz{load_key_values(testutil::fixture("gazetteer.tsv"))};
  GazetteerEntityRecognizer ner{gaz};
  std::map<std::string, std::string> sub_geo = load_key_values(testutil::fixture("subreddit_geo.tsv"));
  profile::LocationPorts ports() const { return {ner, gaz, sub_geo}; }
};

}  // namespace

TEST_CASE("history is capped at the most recent 1000 entries") {
  std::vector<HistoryEntry> h;
  for (int i = 1500; i > 0; --i) h.push_back(entry("s", i));
  auto p = profile::make_profile("x", h);
  CHECK(p.history.size() == profile::kMaxHistory);
  CHECK(p.history.front().created_utc == 501);
  CHECK(p.history.back().created_utc == 1500);
}

TEST_CASE("expertise_score examples") {
  CHECK(profile::expertise_score(with_subs(std::vector<std::string>(10, "other")), "pf", {}) == 0.0);
  CHECK(profile::expertise_score(with_subs(std::vector<std::string>(10, "pf")), "pf", {}) == 1.0);
  std::vector<std::string> subs(9, "other");
  subs.insert(subs.end(), {"PF", "pf", "investing"});
  CHECK(profile::expertise_score(with_subs(subs), "pf", {"Investing"}) == doctest::Approx(0.25));
  CHECK(profile::expertise_score(profile::make_profile("e", {}), "pf", {}) == 0.0);
}

TEST_CASE("percentile threshold and expertise labels") {
  CHECK(profile::compute_percentile_threshold({0.1, 0.2, 0.3, 0.9}, 75) == 0.3);
  CHECK(profile::compute_percentile_threshold({0.5}, 33) == 0.5);
  CHECK_THROWS(profile::compute_percentile_threshold({}, 50));
  CHECK(profile::label_expertise(0.3, 0.3).value == GroupValue::Expert);
  CHECK(profile::label_expertise(0.0, 0.1).value == GroupValue::Novice);
  const std::vector<double> pop{0, 0, 0, 0.8};
  const double t = profile::compute_percentile_threshold(pop, 75);
  int experts = 0;
  for (double s : pop) experts += profile::label_expertise(s, t).value == GroupValue::Expert;
  // nearest-rank 75th of {0,0,0,0.8} is 0, so every asker ties at the threshold
  CHECK(t == 0.0);
  CHECK(experts == 4);
  CHECK(profile::label_expertise(0.8, profile::compute_percentile_threshold(pop, 76)).value == GroupValue::Expert);
  CHECK(profile::label_expertise(0.0, profile::compute_percentile_threshold(pop, 76)).value == GroupValue::Novice);
}

TEST_CASE("response time") {
  auto p = profile::make_profile("t", {entry("s", 160, 100), entry("s", 1120, 1000), entry("s", 50)});
  REQUIRE(profile::mean_response_secs(p));
  CHECK(*profile::mean_response_secs(p) == 90.0);
  CHECK(profile::label_time(p, 90.0).value == GroupValue::Slow);
  CHECK(profile::label_time(p, 91.0).value == GroupValue::Fast);
  auto none = profile::make_profile("n", {entry("s", 10), entry("s", 5, 50)});
  CHECK(profile::label_time(none, 1.0).value == GroupValue::UNK);
}

TEST_CASE("location inference fixture cases") {
  Geo g;
  std::vector<HistoryEntry> h{entry("cooking", 1, {}, "Honestly I live in Toronto and love it")};
  CHECK(profile::infer_location(profile::make_profile("a", h), g.ports()).value == GroupValue::NonUS);

  std::vector<HistoryEntry> nyc;
  for (int i = 0; i < 6; ++i) nyc.push_back(entry("nyc", i + 1, {}, "the subway was late"));
  CHECK(profile::infer_location(profile::make_profile("b", nyc), g.ports()).value == GroupValue::US);

  nyc.resize(4);
  CHECK(profile::infer_location(profile::make_profile("c", nyc), g.ports()).value == GroupValue::UNK);

  // a bare mention is not self-identification
  std::vector<HistoryEntry> mention{entry("travel", 1, {}, "Toronto has great food")};
  CHECK(profile::infer_location(profile::make_profile("d", mention), g.ports()).value == GroupValue::UNK);
}

TEST_CASE("location fallback is order-insensitive and breaks ties alphabetically") {
  Geo g;
  std::vector<HistoryEntry> h;
  for (int i = 0; i < 5; ++i) h.push_back(entry("toronto", i + 1));
  for (int i = 0; i < 5; ++i) h.push_back(entry("chicago", i + 10));
  auto a = profile::infer_location(profile::make_profile("a", h), g.ports());
  std::reverse(h.begin(), h.end());
  for (std::size_t i = 0; i < h.size(); ++i) h[i].created_utc = static_cast<std::int64_t>(i + 1);
  auto b = profile::infer_location(profile::make_profile("a", h), g.ports());
  CHECK(a == b);
  CHECK(a.value == GroupValue::US);  // chicago < toronto
}

TEST_CASE("gazetteer failures skip the entity") {
  struct Broken : Gazetteer {
    std::optional<std::string> country(std::string_view) const override { throw PortError("offline"); }
  } broken;
  Geo g;
  std::map<std::string, std::string> geo;
  profile::LocationPorts ports{g.ner, broken, geo};
  std::vector<HistoryEntry> h{entry("x", 1, {}, "I live in Toronto")};
  CHECK(profile::infer_location(profile::make_profile("a", h), ports).value == GroupValue::UNK);
}

TEST_CASE("labelling a synthetic population respects percentile bounds") {
  auto pop = synthetic::profile_population(400, "fixit", "repair", 9);
  auto th = profile::compute_thresholds(pop, "fixit", {"repair"}, "fixit");
  Geo g;
  profile::label_profiles(pop, th, "fixit", {"repair"}, g.ports());
  std::size_t experts = 0, ties = 0;
  for (auto& p : pop) {
    CHECK(p.expertise_score >= 0.0);
    CHECK(p.expertise_score <= 1.0);
    CHECK(p.labels.at(GroupCategory::Expertise) != GroupValue::UNK);
    experts += p.labels.at(GroupCategory::Expertise) == GroupValue::Expert;
    ties += p.expertise_score == th.expertise_p75;
  }
  CHECK(static_cast<double>(experts) <= 0.25 * static_cast<double>(pop.size()) + static_cast<double>(ties));
}

TEST_CASE("related subreddits") {
  profile::EmbeddingTable emb{{"personalfinance", {1, 0.1}}, {"investing", {1, 0.2}},
                              {"creditcards", {0.9, 0.3}}, {"gaming", {-1, 0}}};
  auto allow = profile::load_allowlist(testutil::fixture("allowlist.tsv"));
  auto rel = profile::related_subreddits("PersonalFinance", emb, 20, allow);
  CHECK(rel.contains("investing"));
  CHECK(rel.contains("creditcards"));
  CHECK_FALSE(rel.contains("gaming"));
  CHECK(profile::related_subreddits("personalfinance", emb, 20, {}).empty());
  std::vector<std::string> warn;
  CHECK(profile::related_subreddits("nowhere", emb, 20, allow, &warn).empty());
  CHECK(warn.size() == 1);
  profile::EmbeddingTable two{{"a", {1, 0}}, {"b", {0, 1}}};
  CHECK(profile::related_subreddits("a", two, 1, {{"a", {"b"}}}) == std::set<std::string>{"b"});
}

TEST_CASE("thresholds and profiles persist") {
  testutil::TempDir dir("prof");
  profile::write_thresholds(dir.file("t.jsonl"), {{0.25, 300.0, "fixit"}});
  auto back = profile::read_thresholds(dir.file("t.jsonl"));
  REQUIRE(back.size() == 1);
  CHECK(back[0].expertise_p75 == 0.25);
  CHECK(back[0].population_id == "fixit");

  auto p = profile::make_profile("u1", {entry("a", 10, 5, "hello")});
  p.labels[GroupCategory::Time] = GroupValue::Fast;
  testutil::write_file(dir.file("p.jsonl"), profile::to_json_line(p) + "\n");
  auto ps = profile::read_profiles(dir.file("p.jsonl"));
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].history[0].parent_created_utc == 5);
  CHECK(ps[0].labels.at(GroupCategory::Time) == GroupValue::Fast);
}

TEST_CASE("npmi examples and properties") {
  CHECK(embed::npmi(1, 2, 2, 4) == doctest::Approx(0.0));
  CHECK(embed::npmi(1, 1, 1, 4) == doctest::Approx(1.0));
  CHECK(embed::npmi(2, 2, 3, 6) == doctest::Approx(std::log(2.0) / std::log(3.0)));
  CHECK(embed::npmi(0, 2, 3, 6) == 0.0);
  CHECK_THROWS_AS(embed::npmi(3, 2, 3, 6), embed::CountError);
  CHECK_THROWS_AS(embed::npmi(1, 1, 1, 0), embed::CountError);

  std::mt19937 rng(4);
  for (int t = 0; t < 300; ++t) {
    const double grand = 1 + rng() % 50;
    const double row = 1 + rng() % static_cast<unsigned>(grand);
    const double col = 1 + rng() % static_cast<unsigned>(grand);
    const double lo = std::max(0.0, row + col - grand);
    const double joint = lo + rng() % static_cast<unsigned>(std::min(row, col) - lo + 1);
    const double v = embed::npmi(joint, row, col, grand);
    CHECK(v >= -1.0 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);
    CHECK(v == doctest::Approx(embed::npmi(joint, col, row, grand)));
    CHECK(v == doctest::Approx(oracle::npmi(joint, row, col, grand)).epsilon(1e-9));
  }
}

TEST_CASE("crosspost matrix") {
  auto a = profile::make_profile("a", {entry("A", 1), entry("A", 2)});
  auto b = profile::make_profile("b", {entry("a", 3)});
  auto e = profile::make_profile("e", {});
  auto m = embed::build_crosspost_matrix({a, b, e});
  REQUIRE(m.subreddits == std::vector<std::string>{"a"});
  CHECK(m.joint(0, 0) == 1.0);
  CHECK(m.joint(0, 2) == 0.0);
  CHECK(m.grand_total == 2.0);
  CHECK(m.values(0, 0) == doctest::Approx(oracle::npmi(1, 2, 1, 2)));
  CHECK(m.values(0, 2) == 0.0);

  auto single = embed::build_crosspost_matrix({a});
  CHECK(single.values.rows() == 1);
  CHECK(single.values.cols() == 1);
}

TEST_CASE("svd embedding") {
  Eigen::MatrixXd rank1 = Eigen::VectorXd::LinSpaced(4, 1, 4) * Eigen::RowVectorXd::LinSpaced(3, 1, 3);
  auto e1 = embed::svd_embed(rank1, {"a", "b", "c", "d"}, 1);
  CHECK(embed::reconstruction_error(rank1, e1, 1) < 1e-9);

  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  auto e3 = embed::svd_embed(id, {"a", "b", "c"}, 3);
  CHECK(embed::reconstruction_error(id, e3, 3) < 1e-9);

  std::mt19937 rng(2);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd r(5, 5);
  for (int i = 0; i < 25; ++i) r(i / 5, i % 5) = n01(rng);
  auto full = embed::svd_embed(r, {"a", "b", "c", "d", "e"}, 5);
  double prev = 1e300;
  for (int d = 1; d <= 5; ++d) {
    const double err = embed::reconstruction_error(r, full, d);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }

  auto padded = embed::svd_embed(r, {"a", "b", "c", "d", "e"}, 100);
  CHECK(padded.effective_dim == 5);
  CHECK_FALSE(padded.warnings.empty());
  for (auto& [name, v] : padded.vectors) {
    CHECK(v.size() == 100);
    for (std::size_t i = 5; i < 100; ++i) CHECK(v[i] == 0.0);
  }
  for (int k = 0; k < full.u.cols(); ++k) {
    Eigen::Index arg;
    full.u.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(full.u(arg, k) > 0);
  }
}

TEST_CASE("asker subreddit embedding") {
  std::map<std::string, std::vector<double>> table{{"a", {1, 0, 0}}, {"b", {0, 2, 0}}, {"c", {0, 0, 4}}};
  auto one = embed::asker_subreddit_embedding(with_subs({"a"}), table);
  CHECK(*one == table["a"]);
  auto two = embed::asker_subreddit_embedding(with_subs({"a", "b"}), table);
  CHECK(*two == std::vector<double>{0.5, 1.0, 0.0});
  auto rep = embed::asker_subreddit_embedding(with_subs({"a", "a", "a", "a", "a", "c"}), table);
  CHECK(*rep == std::vector<double>{0.5, 0.0, 2.0});
  CHECK_FALSE(embed::asker_subreddit_embedding(with_subs({"zzz"}), table));
  CHECK_FALSE(embed::asker_subreddit_embedding(profile::make_profile("e", {}), table));

  testutil::TempDir dir("emb");
  embed::write_embeddings(dir.file("e.txt"), table);
  CHECK(embed::read_embeddings(dir.file("e.txt")) == table);
}

TEST_CASE("paragraph vectors separate topic vocabularies") {
  const std::vector<std::string> cook{"flour", "butter", "oven", "dough", "bake", "sugar", "whisk", "yeast"};
  const std::vector<std::string> cars{"engine", "brake", "clutch", "tire", "gear", "piston", "axle", "oil"};
  std::mt19937 rng(3);
  auto doc = [&](const std::vector<std::string>& vocab) {
    std::vector<std::string> d;
    for (int i = 0; i < 12; ++i) d.push_back(vocab[rng() % vocab.size()]);
    return d;
  };
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < 60; ++i) corpus.push_back(doc(i % 2 ? cars : cook));
  embed::ParagraphVectorOptions opt;
  opt.dim = 100;
  opt.min_count = 1;
  opt.epochs = 20;
  auto model = embed::ParagraphVectorModel::train(corpus, opt);
  CHECK(model.dim() == 100);

  auto asker = [&](const std::vector<std::string>& vocab, const std::string& id) {
    std::vector<HistoryEntry> h;
    for (int i = 0; i < 3; ++i) {
      std::string body;
      for (auto& w : doc(vocab)) body += w + " ";
      h.push_back(entry("s", i + 1, {}, body));
    }
    return *embed::asker_text_embedding(profile::make_profile(id, h), model);
  };
  auto a = asker(cook, "a"), b = asker(cook, "b"), c = asker(cars, "c");
  CHECK(a.size() == 100);
  CHECK(stats::cosine(a, b) > stats::cosine(a, c));

  auto single = profile::make_profile("s", {entry("s", 1, {}, "flour butter oven")});
  auto same = profile::make_profile("t", {entry("s", 1, {}, "flour butter oven"), entry("s", 2, {}, "flour butter oven")});
  auto v1 = *embed::asker_text_embedding(single, model);
  auto v2 = *embed::asker_text_embedding(same, model);
  for (std::size_t i = 0; i < v1.size(); ++i) CHECK(v1[i] == doctest::Approx(v2[i]));
  CHECK(v1 == model.infer({"flour", "butter", "oven"}));
  CHECK_FALSE(embed::asker_text_embedding(profile::make_profile("e", {}), model));
  CHECK_THROWS(embed::ParagraphVectorModel::train({}, opt));

  testutil::TempDir dir("pv");
  model.save(dir.file("pv.bin"));
  auto back = embed::ParagraphVectorModel::load(dir.file("pv.bin"));
  CHECK(back.infer({"engine", "oil"}) == model.infer({"engine", "oil"}));
}
