#include <doctest.h>

#include <cmath>
#include <functional>

#include "socq/autograd.hpp"
#include "socq/transformer.hpp"

using namespace socq;
using namespace socq::nn;

namespace {

TensorPtr random_param(int r, int c, Rng& rng, double s = 1.0) {
  auto t = make_parameter(r, c);
  for (auto& v : t->value) v = rng.normal() * s;
  return t;
}

// Weighted sum to a scalar so every output element gets a distinct gradient.
TensorPtr reduce(const TensorPtr& x, Rng& rng) {
  auto left = make_tensor(1, x->rows);
  auto right = make_tensor(x->cols, 1);
  for (auto& v : left->value) v = rng.normal();
  for (auto& v : right->value) v = rng.normal();
  return matmul(matmul(left, x), right);
}

// Compares backward() against central differences for every parameter entry.
void gradcheck(const std::function<TensorPtr()>& f, const std::vector<TensorPtr>& params, double tol = 1e-6) {
  for (auto& p : params) p->zero_grad();
  backward(f());
  for (auto& p : params) {
    REQUIRE(p->grad.size() == p->value.size());
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      const double h = 1e-6;
      double plus, minus;
      {
        NoGradGuard g;
        p->value[i] = saved + h;
        plus = f()->value[0];
        p->value[i] = saved - h;
        minus = f()->value[0];
      }
      p->value[i] = saved;
      const double numeric = (plus - minus) / (2 * h);
      CHECK(p->grad[i] == doctest::Approx(numeric).epsilon(tol).scale(1.0));
    }
  }
}

double max_abs_diff(const TensorPtr& a, const TensorPtr& b) {
  REQUIRE(a->size() == b->size());
  double m = 0;
  for (std::size_t i = 0; i < a->size(); ++i) m = std::max(m, std::abs(a->value[i] - b->value[i]));
  return m;
}

}  // namespace

TEST_CASE("autograd matches finite differences") {
  Rng rng(21);
  auto a = random_param(3, 4, rng), b = random_param(4, 5, rng), c = random_param(5, 4, rng);
  auto bias = random_param(1, 5, rng), other = random_param(3, 5, rng);

  SUBCASE("matmul, matmul_nt, add, add_bias, scale") {
    Rng r1(1), r2(1);
    gradcheck([&] { Rng r = r1; return reduce(add(scale(add_bias(matmul(a, b), bias), 0.7), other), r); },
              {a, b, bias, other});
    gradcheck([&] { Rng r = r2; return reduce(matmul_nt(a, c), r); }, {a, c});
  }
  SUBCASE("relu and gelu") {
    Rng r1(2);
    gradcheck([&] { Rng r = r1; return reduce(gelu(matmul(a, b)), r); }, {a, b});
    Rng r2(3);
    gradcheck([&] { Rng r = r2; return reduce(relu(matmul(a, b)), r); }, {a, b}, 1e-5);
  }
  SUBCASE("layer norm") {
    auto gamma = random_param(1, 5, rng), beta = random_param(1, 5, rng);
    Rng r1(4);
    gradcheck([&] { Rng r = r1; return reduce(layer_norm(matmul(a, b), gamma, beta), r); }, {a, b, gamma, beta}, 1e-5);
  }
  SUBCASE("softmax, causal softmax") {
    auto sq = random_param(4, 4, rng);
    Rng r1(5), r2(6);
    gradcheck([&] { Rng r = r1; return reduce(softmax_rows(sq), r); }, {sq});
    gradcheck([&] { Rng r = r2; return reduce(softmax_rows(sq, true), r); }, {sq});
  }
  SUBCASE("gather, concat, slice") {
    auto table = random_param(6, 3, rng);
    const std::vector<int> ids{4, 1, 4};
    Rng r1(7);
    gradcheck(
        [&] {
          Rng r = r1;
          auto g = gather_rows(table, ids);
          auto cc = concat_cols({g, slice_cols(matmul(a, b), 1, 2)});
          return reduce(concat_rows({cc, slice_rows(cc, 1, 2)}), r);
        },
        {table, a, b});
  }
  SUBCASE("cross entropy") {
    const std::vector<int> targets{0, 4, 2};
    gradcheck([&] { return cross_entropy(matmul(a, b), targets); }, {a, b});
  }
}

TEST_CASE("softmax rows sum to one and causal mask holds") {
  Rng rng(3);
  auto x = random_param(5, 5, rng);
  auto s = softmax_rows(x, true);
  for (int i = 0; i < 5; ++i) {
    double sum = 0;
    for (int j = 0; j < 5; ++j) {
      sum += s->at(i, j);
      if (j > i) CHECK(s->at(i, j) == 0.0);
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("no-grad guard records nothing") {
  Rng rng(4);
  auto a = random_param(2, 2, rng);
  NoGradGuard g;
  CHECK_FALSE(grad_enabled());
  auto y = matmul(a, a);
  CHECK(y->parents.empty());
}

TEST_CASE("social attention with tied weights equals plain attention") {
  Rng rng(9);
  const int dim = 16, heads = 4;
  MultiHeadAttention plain(dim, heads, rng);
  SocialAttention social(dim, heads, GroupCategory::Expertise, rng);
  social.generic.copy_from(plain);
  for (auto& [v, m] : social.groups) m.copy_from(plain);

  auto x = random_param(7, dim, rng);
  auto ref = plain.forward(x, x, false);
  for (auto g : {GroupValue::Expert, GroupValue::Novice, GroupValue::UNK, GroupValue::US}) {
    auto out = social.forward(x, g);
    CHECK(out->rows == 7);
    CHECK(out->cols == dim);
    CHECK(max_abs_diff(out, ref) < 1e-5);
  }
  CHECK(&social.route(GroupValue::US) == &social.route(GroupValue::UNK));
  CHECK(&social.route(GroupValue::Expert) != &social.route(GroupValue::Novice));
}

TEST_CASE("enabling social attention leaves the encoder output unchanged") {
  TransformerShape shape;
  shape.vocab_size = 30;
  shape.dim = 16;
  shape.heads = 2;
  shape.ffn = 32;
  shape.max_source_positions = 20;
  Seq2SeqTransformer net(shape, 5);
  const std::vector<int> ids{5, 9, 12, 7, 3};
  TensorPtr before;
  {
    NoGradGuard g;
    before = net.encode(ids, nullptr, GroupValue::UNK);
  }
  net.enable_social_attention(1, GroupCategory::Time, 77);
  REQUIRE(net.social_layer() == 1);
  NoGradGuard g;
  for (auto v : {GroupValue::Fast, GroupValue::Slow, GroupValue::UNK})
    CHECK(max_abs_diff(net.encode(ids, nullptr, v), before) < 1e-5);
  CHECK_THROWS(net.enable_social_attention(2, GroupCategory::Time, 1));
}

TEST_CASE("decoder is causal") {
  TransformerShape shape;
  shape.vocab_size = 25;
  shape.dim = 16;
  shape.heads = 2;
  shape.ffn = 32;
  shape.max_source_positions = 16;
  shape.max_target_positions = 8;
  Seq2SeqTransformer net(shape, 2);
  NoGradGuard g;
  auto mem = net.encode({5, 6, 7}, nullptr, GroupValue::UNK);
  auto a = net.decode(mem, {1, 8, 9});
  auto b = net.decode(mem, {1, 8, 20});
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 25; ++c) CHECK(a->at(r, c) == doctest::Approx(b->at(r, c)).epsilon(1e-12));
  CHECK(a->rows == 3);
  CHECK(a->cols == 25);
}

TEST_CASE("attention capture rows are distributions") {
  Rng rng(12);
  MultiHeadAttention mha(8, 2, rng);
  auto x = random_param(4, 8, rng);
  AttentionMaps maps;
  mha.forward(x, x, false, &maps);
  REQUIRE(maps.size() == 2);
  for (auto& h : maps) {
    REQUIRE(h.size() == 16);
    for (int r = 0; r < 4; ++r) {
      double s = 0;
      for (int c = 0; c < 4; ++c) {
        CHECK(h[static_cast<std::size_t>(r * 4 + c)] >= 0.0);
        s += h[static_cast<std::size_t>(r * 4 + c)];
      }
      CHECK(s == doctest::Approx(1.0));
    }
  }
}
