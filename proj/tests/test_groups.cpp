#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "socq/group_analysis.hpp"
#include "socq/ports.hpp"
#include "test_util.hpp"

using namespace socq;

TEST_CASE("category frequency") {
  auto lex = groups::CategoryLexicon::load(testutil::fixture("lexicon.tsv"));
  auto f = groups::category_frequency("do you have money?", lex);
  CHECK(f.at("MONEY") == doctest::Approx(0.25));
  CHECK(f.at("YOU") == doctest::Approx(0.25));
  CHECK(f.at("WORK") == 0.0);
  CHECK(lex.matches("MONEY", "finances"));
  CHECK_FALSE(lex.matches("MONEY", "refinance"));
  for (auto& [c, v] : groups::category_frequency("", lex)) CHECK(v == 0.0);
  for (auto& [c, v] : groups::category_frequency("the cat sat", lex)) CHECK(v == 0.0);
  CHECK_THROWS(groups::CategoryLexicon::parse("EMPTY\t\n"));
}

TEST_CASE("mann-whitney examples and symmetry") {
  auto sep = groups::mann_whitney_u({1, 2}, {3, 4});
  CHECK(sep.u == 0.0);
  CHECK(sep.exact);
  CHECK(sep.p_two_sided == doctest::Approx(2.0 / 6.0));
  auto same = groups::mann_whitney_u({1, 2, 3}, {1, 2, 3});
  CHECK(same.u == 4.5);
  CHECK(same.p_two_sided == doctest::Approx(1.0));
  CHECK(groups::mann_whitney_u({1, 3}, {2, 4}).u == oracle::u_stat({1, 3}, {2, 4}));

  std::mt19937 rng(8);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(1 + rng() % 12), b(1 + rng() % 12);
    for (auto& x : a) x = rng() % 5;
    for (auto& x : b) x = rng() % 5;
    auto ab = groups::mann_whitney_u(a, b), ba = groups::mann_whitney_u(b, a);
    CHECK(ab.u + ba.u == static_cast<double>(a.size() * b.size()));
    CHECK(ab.p_two_sided == doctest::Approx(ba.p_two_sided));
    CHECK(ab.p_two_sided >= 0.0);
    CHECK(ab.p_two_sided <= 1.0);
  }
  std::vector<double> big_a(30), big_b(30);
  for (int i = 0; i < 30; ++i) {
    big_a[static_cast<std::size_t>(i)] = i;
    big_b[static_cast<std::size_t>(i)] = i + 25;
  }
  auto big = groups::mann_whitney_u(big_a, big_b);
  CHECK_FALSE(big.exact);
  CHECK(big.p_two_sided < 1e-6);
  CHECK_THROWS(groups::mann_whitney_u({}, {1}));
}

TEST_CASE("group diff report") {
  auto lex = groups::CategoryLexicon::load(testutil::fixture("lexicon.tsv"));
  const std::vector<std::string> qs{"what is your budget?", "where do you work?", "how big is the house?"};
  auto same = groups::group_diff_report("US", qs, "NonUS", qs, lex);
  for (auto& d : same.ranked) CHECK(d.difference == 0.0);

  const std::vector<std::string> money{"money cash price?", "what budget and salary?", "any loan or debt?"};
  const std::vector<std::string> work{"what job and career?", "is the office far?", "your boss?"};
  auto rep = groups::group_diff_report("US", money, "NonUS", work, lex);
  REQUIRE(rep.top_a_over_b(1).size() == 1);
  CHECK(rep.top_a_over_b(1)[0].category == "MONEY");
  CHECK(rep.top_b_over_a(1)[0].category == "WORK");
  for (auto& d : rep.ranked) {
    CHECK(d.difference == std::abs(d.freq_a - d.freq_b));
    CHECK(d.freq_a >= 0.0);
    CHECK(d.freq_a <= 1.0);
  }
  for (std::size_t i = 1; i < rep.ranked.size(); ++i) CHECK(rep.ranked[i - 1].difference >= rep.ranked[i].difference);
  CHECK(rep.to_tsv(3).find("MONEY") != std::string::npos);
}

TEST_CASE("pca and pair encoding") {
  std::mt19937 rng(1);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> rows(40, std::vector<double>(8));
  for (auto& r : rows) {
    const double a = n01(rng), b = n01(rng);
    for (std::size_t i = 0; i < 8; ++i) r[i] = a * (i < 4 ? 1.0 : 0.0) + b * (i % 2 ? 1.0 : -1.0);
  }
  auto pca = groups::Pca::fit(rows, 5);
  CHECK(pca.dim() == 5);
  auto y = pca.transform(rows[0]);
  REQUIRE(y.size() == 5);
  // rank-2 data: components past the rank carry nothing
  for (std::size_t i = 2; i < 5; ++i) CHECK(std::abs(y[i]) < 1e-9);

  HashingSentenceEncoder enc(32);
  std::vector<std::vector<double>> qv, pv;
  for (int i = 0; i < 30; ++i) {
    qv.push_back(enc.encode("question number " + std::to_string(i)));
    pv.push_back(enc.encode("post body " + std::to_string(i * 7)));
  }
  auto pq = groups::Pca::fit(qv, 100), pp = groups::Pca::fit(pv, 100);
  auto f1 = groups::encode_pair("x", "where is it?", "my post", enc, pq, pp);
  auto f2 = groups::encode_pair("x", "where is it?", "my post", enc, pq, pp);
  CHECK(f1.concatenated().size() == 200);
  CHECK(f1.concatenated() == f2.concatenated());
  const auto cat = f1.concatenated();
  CHECK(std::vector<double>(cat.begin(), cat.begin() + 100) == f1.question_vec);

  struct Failing : SentenceEncoder {
    std::vector<double> encode(std::string_view) const override { throw PortError("down"); }
    std::size_t dim() const override { return 32; }
  } failing;
  try {
    groups::encode_pair("item-42", "q", "p", failing, pq, pp);
    FAIL("expected EncodingError");
  } catch (const groups::EncodingError& e) {
    CHECK(std::string(e.what()).find("item-42") != std::string::npos);
  }
}

TEST_CASE("group classifier") {
  std::mt19937 rng(6);
  std::normal_distribution<double> n01;
  auto blobs = [&](std::size_t n, std::size_t minority) {
    std::vector<std::vector<double>> x;
    std::vector<GroupValue> y;
    for (std::size_t i = 0; i < n; ++i) {
      const bool expert = i < minority;
      std::vector<double> r(6);
      for (auto& v : r) v = n01(rng) * 0.3 + (expert ? 1.5 : -1.5);
      x.push_back(r);
      y.push_back(expert ? GroupValue::Expert : GroupValue::Novice);
    }
    return std::pair{x, y};
  };
  auto [x, y] = blobs(120, 30);
  auto clf = groups::GroupClassifier::train(x, y, GroupCategory::Expertise);
  auto [tx, ty] = blobs(80, 40);
  const double acc = groups::accuracy(clf, tx, ty);
  CHECK(acc == doctest::Approx(1.0));
  CHECK(acc >= 0.5);  // the majority-constant baseline on a balanced held-out set
  for (auto& r : tx) {
    auto p = clf.predict(r);
    CHECK(p.probability >= 0.0);
    CHECK(p.probability <= 1.0);
    CHECK(clf.probability_of(r, GroupValue::Expert) + clf.probability_of(r, GroupValue::Novice) ==
          doctest::Approx(1.0));
  }
  CHECK_THROWS(groups::GroupClassifier::train(x, std::vector<GroupValue>(x.size(), GroupValue::Expert),
                                              GroupCategory::Expertise));

  std::vector<groups::LabelledPair> pairs;
  for (std::size_t i = 0; i < tx.size(); ++i) pairs.push_back({std::to_string(i), tx[i], ty[i]});
  std::size_t prev = pairs.size() + 1;
  for (double c : {0.5, 0.9, 0.95, 0.99, 0.999999}) {
    const auto n = groups::subset_group_specific(pairs, clf, c).size();
    CHECK(n <= prev);
    prev = n;
  }
  CHECK(groups::subset_group_specific(pairs, clf, 1.01).empty());

  groups::GroupClassifierBank bank;
  bank.add("fixit", clf);
  CHECK(bank.find("fixit", GroupCategory::Expertise) != nullptr);
  CHECK(bank.find("fixit", GroupCategory::Time) == nullptr);
}

TEST_CASE("group-specific boundary at 0.95") {
  // one feature, weights fitted so that probabilities land on either side of 0.95
  std::vector<std::vector<double>> x;
  std::vector<GroupValue> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({i < 20 ? 1.0 : -1.0});
    y.push_back(i < 20 ? GroupValue::US : GroupValue::NonUS);
  }
  auto clf = groups::GroupClassifier::train(x, y, GroupCategory::Location);
  const double p = clf.probability_of({1.0}, GroupValue::US);
  std::vector<groups::LabelledPair> one{{"a", {1.0}, GroupValue::US}};
  CHECK(groups::subset_group_specific(one, clf, p).size() == 1);
  CHECK(groups::subset_group_specific(one, clf, std::nextafter(p, 2.0)).empty());
}
