#include "socq/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "socq/ports.hpp"
#include "socq/transformer.hpp"

namespace socq::synthetic {

namespace {

const std::vector<std::string> kTopics{
    "laptop", "bike",   "car",     "phone",   "oven",    "router",  "camera",  "guitar",
    "printer", "sofa",  "kettle",  "fridge",  "monitor", "tablet",  "drone",   "boiler",
    "heater", "blender", "scooter", "speaker", "watch",   "mixer",   "lawnmower", "dishwasher",
    "keyboard", "headset", "projector", "treadmill", "furnace", "toaster", "vacuum", "thermostat"};

const std::vector<std::string> kOpeners{"so", "ok", "hey all", "quick question", "help", "ugh"};
const std::vector<std::string> kProblems{
    "keeps shutting down after a few minutes", "makes a loud grinding noise",
    "stopped working this morning",           "will not turn on anymore",
    "is acting weird since last week",         "broke right after the warranty ended"};
const std::vector<std::string> kFillers{
    "i have no idea what to do", "any advice is welcome", "thanks in advance",
    "this is driving me crazy",  "i really need it for work", "what should i try next"};

template <typename T>
const T& pick(const std::vector<T>& v, nn::Rng& rng) {
  return v[rng.below(v.size())];
}

}  // namespace

std::string question_template(GroupValue value, const std::string& topic) {
  switch (value) {
    case GroupValue::Expert:
      return "what exact model number and firmware version does your " + topic + " run ?";
    case GroupValue::Novice:
      return "did you try asking someone at the store to look at the " + topic + " ?";
    case GroupValue::Fast:
      return "quick check , is the " + topic + " plugged in right now ?";
    case GroupValue::Slow:
      return "after thinking about it for a while , how old is this " + topic + " overall ?";
    case GroupValue::US:
      return "which state do you live in and where did you buy the " + topic + " ?";
    case GroupValue::NonUS:
      return "which country are you in , and is the " + topic + " an imported unit ?";
    case GroupValue::UNK:
      break;
  }
  return "can you say more about the " + topic + " ?";
}

std::vector<Triple> question_corpus(std::size_t posts, GroupCategory category, std::uint64_t seed) {
  nn::Rng rng(seed);
  const auto& values = values_of(category);
  std::vector<Triple> out;
  for (std::size_t p = 0; p < posts; ++p) {
    const auto& topic = pick(kTopics, rng);
    const std::string post = pick(kOpeners, rng) + " , my " + topic + " " + pick(kProblems, rng) +
                             " . " + pick(kFillers, rng) + " .";
    const std::string post_id = "p" + std::to_string(p);
    for (std::size_t g = 0; g < 2; ++g)
      out.push_back({post_id + "_q" + std::to_string(g), post_id, "fixit", post,
                     question_template(values[g], topic), values[g]});
  }
  return out;
}

std::vector<seq2seq::ConditionedExample> to_examples(const std::vector<Triple>& triples) {
  std::vector<seq2seq::ConditionedExample> out;
  for (const auto& t : triples) out.push_back({t.id, t.post_id, t.post, t.question, t.group, std::nullopt});
  return out;
}

std::vector<eval::EvalItem> to_eval_items(const std::vector<Triple>& triples) {
  std::vector<eval::EvalItem> out;
  for (const auto& t : triples) out.push_back({t.id, t.post_id, t.subreddit, t.post, t.question, t.group});
  return out;
}

std::vector<profile::AskerProfile> profile_population(std::size_t n, const std::string& target,
                                                      const std::string& related,
                                                      std::uint64_t seed) {
  nn::Rng rng(seed);
  const std::vector<std::string> others{"news", "pics", "gaming", "movies", "funny"};
  std::vector<profile::AskerProfile> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto comments = 1 + rng.below(60);
    const double affinity = std::pow(rng.uniform(), 2.0);
    const double latency = 60.0 + rng.uniform() * 36000.0;
    std::vector<profile::HistoryEntry> h;
    std::int64_t t = 1'500'000'000 + static_cast<std::int64_t>(rng.below(1'000'000));
    for (std::size_t c = 0; c < comments; ++c) {
      profile::HistoryEntry e;
      const double u = rng.uniform();
      e.subreddit = u < affinity * 0.7 ? target : u < affinity ? related : pick(others, rng);
      t += 600 + static_cast<std::int64_t>(rng.below(7200));
      e.created_utc = t;
      if (rng.uniform() < 0.9)
        e.parent_created_utc = t - static_cast<std::int64_t>(latency * (0.5 + rng.uniform()));
      e.body = "comment " + std::to_string(c);
      h.push_back(std::move(e));
    }
    out.push_back(profile::make_profile("u" + std::to_string(i), std::move(h)));
  }
  return out;
}

std::vector<questions::AnnotatedQuestion> separable_annotations(std::size_t n, std::uint64_t seed) {
  nn::Rng rng(seed);
  const std::vector<std::string> seek{"specify", "clarify", "details", "exactly", "model", "budget"};
  const std::vector<std::string> chat{"lol", "congrats", "awesome", "cute", "haha", "nice"};
  const std::vector<std::string> filler{"the", "thing", "you", "this", "post", "it", "really", "here"};
  std::vector<questions::AnnotatedQuestion> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const auto& markers = label ? seek : chat;
    std::vector<std::string> words;
    for (int k = 0; k < 3; ++k) words.push_back(pick(markers, rng));
    for (int k = 0; k < 4; ++k) words.push_back(pick(filler, rng));
    for (std::size_t k = words.size(); k > 1; --k) std::swap(words[k - 1], words[rng.below(k)]);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    text += " ?";
    out.push_back({"a" + std::to_string(i), "p" + std::to_string(i / 4), text, {1, 1, 1},
                   {label, label, label}});
  }
  return out;
}

ClusterFixture clustered_questions(std::size_t pairs, std::size_t dim, std::uint64_t seed) {
  nn::Rng rng(seed);
  const std::vector<std::vector<std::string>> clusters{
      {"recipe", "oven", "flour", "butter", "sugar", "dough", "bake", "yeast", "crust", "icing", "whisk", "batter"},
      {"engine", "tire", "brake", "clutch", "gear", "oil", "wheel", "axle", "piston", "exhaust", "spark", "radiator"}};
  ClusterFixture f;
  std::vector<std::vector<double>> centroids(2, std::vector<double>(dim));
  for (auto& c : centroids)
    for (auto& x : c) x = rng.normal();
  for (std::size_t c = 0; c < 2; ++c)
    for (const auto& w : clusters[c]) {
      auto d = hashed_direction(w, dim, seed + 99);
      for (std::size_t i = 0; i < dim; ++i) d[i] = 0.5 * centroids[c][i] + d[i];
      f.vectors[w] = std::move(d);
    }
  constexpr std::size_t kContent = 6;
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t home = rng.below(2);
    std::vector<std::string> a, b;
    for (std::size_t k = 0; k < kContent; ++k) a.push_back(pick(clusters[home], rng));
    b = a;
    const std::size_t swaps = rng.below(kContent + 1);
    for (std::size_t k = 0; k < swaps; ++k) b[k] = pick(clusters[1 - home], rng);
    auto render = [](const std::vector<std::string>& ws) {
      std::string s = "what about";
      for (const auto& w : ws) s += " " + w;
      return s + " ?";
    };
    f.pairs.emplace_back(render(a), render(b));
  }
  return f;
}

}  // namespace socq::synthetic
