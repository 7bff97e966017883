#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "socq/kernels.hpp"
#include "socq/stats.hpp"
#include "socq/text.hpp"
#include "socq/types.hpp"

using namespace socq;

TEST_CASE("group catalog and parsing") {
  CHECK(values_of(GroupCategory::Location) ==
        std::vector<GroupValue>{GroupValue::US, GroupValue::NonUS, GroupValue::UNK});
  CHECK(is_legal(GroupCategory::Time, GroupValue::UNK));
  CHECK_FALSE(is_legal(GroupCategory::Time, GroupValue::Expert));
  CHECK_THROWS_AS(make_label(GroupCategory::Expertise, GroupValue::US), InvalidGroup);
  CHECK(parse_value("NonUS") == GroupValue::NonUS);
  CHECK(parse_category("LOCATION") == GroupCategory::Location);
  CHECK_THROWS_AS(parse_category("AGE"), InvalidGroup);
}

TEST_CASE("tokenize, words, sentences") {
  CHECK(text::tokenize("Where do you live?") ==
        std::vector<std::string>{"where", "do", "you", "live", "?"});
  CHECK(text::words("It's fine, really!") == std::vector<std::string>{"it's", "fine", "really"});
  CHECK(text::split_sentences("Really?? Why? ok") ==
        std::vector<std::string>{"Really??", "Why?", "ok"});
  CHECK(text::normalize_question("  Where   do YOU live?? ") == "where do you live");
  CHECK(text::detokenize({"where", "do", "you", "live", "?"}) == "where do you live?");
}

TEST_CASE("nearest-rank percentile") {
  std::vector<double> xs{0.1, 0.2, 0.3, 0.9};
  CHECK(stats::nearest_rank_percentile(xs, 75) == 0.3);
  CHECK(stats::nearest_rank_percentile(std::vector<double>{0.5}, 10) == 0.5);
  CHECK(stats::nearest_rank_percentile(std::vector<double>{2, 2, 2}, 50) == 2);
  CHECK_THROWS_AS(stats::nearest_rank_percentile(std::vector<double>{}, 50), stats::EmptyPopulation);

  std::mt19937 rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> pop(1 + rng() % 10);
    for (auto& x : pop) x = static_cast<double>(rng() % 6);
    const double p = 1 + rng() % 100;
    CHECK(stats::nearest_rank_percentile(pop, p) == oracle::percentile(pop, p));
  }
}

TEST_CASE("midranks and spearman") {
  CHECK(stats::midranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
  std::vector<double> a{1, 2, 3, 4, 5}, b{10, 20, 30, 40, 1000};
  CHECK(stats::spearman(a, b) == doctest::Approx(1.0));
  std::vector<double> c{5, 4, 3, 2, 1};
  CHECK(stats::spearman(a, c) == doctest::Approx(-1.0));
  CHECK(stats::normal_sf(0) == doctest::Approx(0.5));
  CHECK(stats::normal_sf(1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
}

TEST_CASE("cosine handles zero vectors") {
  std::vector<double> z{0, 0}, x{1, 0}, y{0, 2};
  CHECK(stats::cosine(z, x) == 0.0);
  CHECK(stats::cosine(x, y) == doctest::Approx(0.0));
  CHECK(stats::cosine(x, x) == doctest::Approx(1.0));
}

TEST_CASE("parallel kernels equal the serial reference bitwise") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (auto [m, k, n] : {std::tuple{3, 4, 5}, std::tuple{64, 48, 80}, std::tuple{130, 70, 90}}) {
    const kernels::Dims d{static_cast<std::size_t>(m), static_cast<std::size_t>(k), static_cast<std::size_t>(n)};
    std::vector<double> a(d.m * d.k), b(d.k * d.n), bt(d.n * d.k), at(d.k * d.m);
    for (auto* v : {&a, &b, &bt, &at})
      for (auto& x : *v) x = n01(rng);
    std::vector<double> c1(d.m * d.n, 0.5), c2 = c1;
    kernels::serial::gemm_nn(a, b, c1, d);
    kernels::parallel::gemm_nn(a, b, c2, d);
    CHECK(c1 == c2);
    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    kernels::serial::gemm_nt(a, bt, c1, d);
    kernels::parallel::gemm_nt(a, bt, c2, d);
    CHECK(c1 == c2);
    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    kernels::serial::gemm_tn(at, b, c1, d);
    kernels::parallel::gemm_tn(at, b, c2, d);
    CHECK(c1 == c2);

    // serial gemm_nn against a naive triple loop
    std::vector<double> ref(d.m * d.n, 0.0), got(d.m * d.n, 0.0);
    for (std::size_t i = 0; i < d.m; ++i)
      for (std::size_t j = 0; j < d.n; ++j)
        for (std::size_t p = 0; p < d.k; ++p) ref[i * d.n + j] += a[i * d.k + p] * b[p * d.n + j];
    kernels::serial::gemm_nn(a, b, got, d);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }

  std::vector<double> x(200 * 16);
  for (auto& v : x) v = n01(rng);
  CHECK(kernels::serial::pairwise_cosine(x, 200, 16) == kernels::parallel::pairwise_cosine(x, 200, 16));
  std::vector<std::vector<std::size_t>> members{{0, 3}, {}, {1, 2, 3}};
  const auto pres = kernels::serial::presence(members, 4);
  CHECK(pres == kernels::parallel::presence(members, 4));
  CHECK(pres == std::vector<double>{1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 1});
}
