#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "oracles.hpp"
#include "socq/human_eval.hpp"
#include "test_util.hpp"

using namespace socq;
using namespace socq::humaneval;

namespace {

std::vector<CandidatePost> posts(std::size_t n, GroupCategory c = GroupCategory::Expertise) {
  std::vector<CandidatePost> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({"p" + std::to_string(i), "fixit", "my sink leaks number " + std::to_string(i),
                   "what tools do you have?", c});
  return out;
}

std::string gen_text(const std::string& post, GroupValue) { return "text-only about " + post; }
std::string gen_social(const std::string& post, GroupValue g) {
  return "variant " + std::to_string(static_cast<int>(g)) + " asks about " + post;
}

}  // namespace

TEST_CASE("packets hold four questions in a seeded order") {
  auto pk = build_packets(posts(5), gen_text, gen_social, 11);
  REQUIRE(pk.size() == 5);
  for (auto& p : pk) {
    REQUIRE(p.questions.size() == 4);
    CHECK(p.questions[0].source == Source::GroundTruth);
    CHECK(p.questions[1].source == Source::TextOnly);
    CHECK(p.questions[2].group == GroupValue::Expert);
    CHECK(p.questions[3].group == GroupValue::Novice);
    std::set<std::size_t> slots(p.order.begin(), p.order.end());
    CHECK(slots == std::set<std::size_t>{0, 1, 2, 3});
  }
  auto again = build_packets(posts(5), gen_text, gen_social, 11);
  for (std::size_t i = 0; i < pk.size(); ++i) CHECK(pk[i].order == again[i].order);
}

TEST_CASE("answer key inverts the shuffle") {
  auto pk = build_packets(posts(12, GroupCategory::Location), gen_text, gen_social, 3);
  auto key = answer_key(pk);
  REQUIRE(key.size() == 48);
  for (auto& k : key) {
    const auto& p = *std::find_if(pk.begin(), pk.end(), [&](auto& x) { return x.packet_id == k.packet_id; });
    const auto& q = p.presented(k.slot);
    CHECK(q.source == k.source);
    CHECK(q.group == k.group);
    CHECK(k.category == GroupCategory::Location);
  }
  testutil::TempDir dir("key");
  write_key(dir.file("key.tsv"), key);
  auto back = read_key(dir.file("key.tsv"));
  REQUIRE(back.size() == key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    CHECK(back[i].packet_id == key[i].packet_id);
    CHECK(back[i].slot == key[i].slot);
    CHECK(back[i].source == key[i].source);
    CHECK(back[i].group == key[i].group);
  }
}

TEST_CASE("generator failures drop the post") {
  std::vector<std::string> warnings;
  auto bad = [](const std::string& post, GroupValue) -> std::string {
    if (post.find("number 1") != std::string::npos) return "";
    return "ok";
  };
  auto pk = build_packets(posts(3), bad, gen_social, 1, &warnings);
  CHECK(pk.size() == 2);
  CHECK(warnings.size() == 1);
}

TEST_CASE("annotator files carry no provenance and respect the size cap") {
  auto pk = build_packets(posts(30), gen_text, gen_social, 5);
  testutil::TempDir dir("export");
  auto files = export_annotator_files(pk, dir.str());
  std::size_t total = 0;
  for (auto& f : files) {
    std::ifstream in(f);
    std::string line, all;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      all += line + "\n";
    }
    CHECK(rows <= kMaxQuestionsPerAnnotatorFile);
    CHECK(rows % 4 == 0);
    total += rows;
    for (const char* word : {"ground_truth", "text_only", "social_token", "Expert", "Novice"})
      CHECK(all.find(word) == std::string::npos);
  }
  CHECK(total == 120);
  CHECK_THROWS(export_annotator_files(pk, dir.str(), 3));
}

TEST_CASE("krippendorff alpha") {
  using R = std::vector<std::vector<std::optional<int>>>;
  CHECK(*krippendorff_alpha(R{{1, 2, 3, 4}, {1, 2, 3, 4}}) == 1.0);
  CHECK_FALSE(krippendorff_alpha(R{{1, std::nullopt}, {std::nullopt, 2}}));
  CHECK_FALSE(krippendorff_alpha(R{}));

  std::mt19937 rng(44);
  for (int t = 0; t < 200; ++t) {
    R r(2 + rng() % 3, std::vector<std::optional<int>>(1 + rng() % 8));
    for (auto& row : r)
      for (auto& c : row)
        if (rng() % 5) c = 1 + static_cast<int>(rng() % 5);
    auto got = krippendorff_alpha(r);
    auto want = oracle::alpha_ordinal(r);
    REQUIRE(got.has_value() == want.has_value());
    if (got && std::isfinite(*want)) CHECK(*got == doctest::Approx(*want).epsilon(1e-9));
  }
}

TEST_CASE("wilcoxon signed rank") {
  auto all_up = wilcoxon_signed_rank({2, 3, 4, 5, 6}, {1, 1, 1, 1, 1});
  CHECK(all_up.exact);
  CHECK(all_up.n == 5);
  CHECK(all_up.w_plus == 15.0);
  CHECK(all_up.p_two_sided == doctest::Approx(2.0 / 32.0));
  auto none = wilcoxon_signed_rank({1, 2}, {1, 2});
  CHECK(none.n == 0);
  CHECK(none.p_two_sided == 1.0);
  std::vector<double> a(40), b(40);
  for (int i = 0; i < 40; ++i) {
    a[static_cast<std::size_t>(i)] = i + 3;
    b[static_cast<std::size_t>(i)] = i;
  }
  auto big = wilcoxon_signed_rank(a, b);
  CHECK_FALSE(big.exact);
  CHECK(big.p_two_sided < 1e-6);
  CHECK_THROWS(wilcoxon_signed_rank({1}, {1, 2}));
}

TEST_CASE("summary on a two-annotator fixture") {
  auto pk = build_packets(posts(2), gen_text, gen_social, 9);
  auto key = answer_key(pk);
  std::vector<Rating> ratings;
  for (const char* who : {"ann1", "ann2"})
    for (auto& k : key) {
      Rating r;
      r.annotator = who;
      r.packet_id = k.packet_id;
      r.slot = k.slot;
      const int base = k.source == Source::SocialToken ? 5 : k.source == Source::TextOnly ? 3 : 4;
      r.answerable = base;
      r.relevant = base;
      r.understandable = std::string(who) == "ann1" ? 2 : 4;
      if (k.source == Source::SocialToken) r.group_guess = k.group;
      ratings.push_back(r);
    }
  auto s = summarize(ratings, key);
  auto m = s.means.at({"EXPERTISE", "*", "social_token"});
  CHECK(m.answerable == 5.0);
  CHECK(m.understandable == 3.0);
  CHECK(m.n == 8);
  CHECK(s.means.at({"EXPERTISE", "fixit", "text_only"}).relevant == 3.0);
  CHECK(s.guess_accuracy("EXPERTISE") == 1.0);
  REQUIRE(s.tests.size() == 3);
  CHECK(s.tests[0].result.n == 4);
  CHECK(s.to_tsv().find("social_token") != std::string::npos);

  Rating bad = ratings[0];
  bad.answerable = 6;
  CHECK_THROWS_AS(validate(bad), RatingError);
  Rating orphan = ratings[0];
  orphan.packet_id = "nope";
  CHECK_THROWS_AS(summarize({orphan}, key), RatingError);
}

TEST_CASE("ratings file parsing") {
  testutil::TempDir dir("ratings");
  testutil::write_file(dir.file("r.tsv"),
                       "annotator\tpacket_id\tslot\tanswerable\trelevant\tunderstandable\tgroup_guess\n"
                       "a\tpk\t0\t5\t4\t3\tExpert\n"
                       "a\tpk\t1\t1\t1\t1\t\n");
  auto r = read_ratings(dir.file("r.tsv"));
  REQUIRE(r.size() == 2);
  CHECK(r[0].group_guess == GroupValue::Expert);
  CHECK_FALSE(r[1].group_guess);
  testutil::write_file(dir.file("bad.tsv"), "h\na\tpk\t0\t9\t4\t3\n");
  CHECK_THROWS_AS(read_ratings(dir.file("bad.tsv")), RatingError);
}

TEST_CASE("divisive post sampling") {
  HashingSentenceEncoder enc(64);
  std::vector<eval::EvalItem> items;
  for (int p = 0; p < 10; ++p) {
    const auto pid = "post" + std::to_string(p);
    items.push_back({pid + "a", pid, "fixit", "body " + std::to_string(p), "what tools do you own?", GroupValue::Expert});
    items.push_back({pid + "b", pid, "fixit", "body " + std::to_string(p),
                     p % 2 ? "is it safe for a beginner?" : "what tools do you own?", GroupValue::Novice});
  }
  CHECK(sample_divisive_posts(items, "fixit", GroupCategory::Expertise, 0, 50, enc, 1).empty());
  auto a = sample_divisive_posts(items, "fixit", GroupCategory::Expertise, 3, 50, enc, 1);
  auto b = sample_divisive_posts(items, "fixit", GroupCategory::Expertise, 3, 50, enc, 1);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].post_id == b[i].post_id);
    // only odd posts have differing questions
    CHECK((a[i].post_id.back() - '0') % 2 == 1);
  }
  CHECK(sample_divisive_posts(items, "other", GroupCategory::Expertise, 3, 50, enc, 1).empty());
}
