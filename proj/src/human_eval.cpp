#include "socq/human_eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "socq/stats.hpp"
#include "socq/text.hpp"

namespace socq::humaneval {

namespace fs = std::filesystem;

namespace {

std::uint64_t mix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[mix(seed) % i]);
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::string_view to_string(Source s) {
  switch (s) {
    case Source::GroundTruth: return "ground_truth";
    case Source::TextOnly: return "text_only";
    case Source::SocialToken: return "social_token";
  }
  return "ground_truth";
}

Source parse_source(std::string_view s) {
  if (s == "ground_truth") return Source::GroundTruth;
  if (s == "text_only") return Source::TextOnly;
  if (s == "social_token") return Source::SocialToken;
  throw std::invalid_argument("unknown question source '" + std::string(s) + "'");
}

std::vector<CandidatePost> sample_divisive_posts(const std::vector<eval::EvalItem>& test,
                                                 const std::string& subreddit,
                                                 GroupCategory category, std::size_t n,
                                                 double percentile,
                                                 const SentenceEncoder& encoder,
                                                 std::uint64_t seed) {
  if (n == 0) return {};
  std::vector<eval::EvalItem> items;
  for (const auto& it : test) {
    if (it.subreddit != subreddit || it.group == GroupValue::UNK || !is_legal(category, it.group)) continue;
    items.push_back(it);
  }
  auto pairs = eval::mark_divisive(eval::cross_group_pairs(items, encoder), percentile);
  // lowest-similarity divisive pair per post supplies the ground truth
  std::map<std::string, const eval::QuestionPair*> best;
  for (const auto& p : pairs) {
    if (!p.divisive) continue;
    auto [it, inserted] = best.emplace(p.post_id, &p);
    if (!inserted && p.similarity < it->second->similarity) it->second = &p;
  }
  std::vector<std::string> post_ids;
  for (const auto& [id, p] : best) post_ids.push_back(id);
  seeded_shuffle(post_ids, seed ^ text::fnv1a(subreddit + "/" + std::string(socq::to_string(category))));
  if (post_ids.size() > n) post_ids.resize(n);

  std::vector<CandidatePost> out;
  for (const auto& id : post_ids) {
    const auto* p = best.at(id);
    const auto it = std::find_if(items.begin(), items.end(), [&](const auto& x) { return x.id == p->q1_id; });
    out.push_back({id, subreddit, it->post_text, p->q1, category});
  }
  return out;
}

std::vector<Packet> build_packets(const std::vector<CandidatePost>& posts, const Generator& text_only,
                                  const Generator& social_token, std::uint64_t seed,
                                  std::vector<std::string>* warnings) {
  std::vector<Packet> out;
  for (const auto& post : posts) {
    Packet p;
    p.packet_id = "pk_" + std::string(socq::to_string(post.category)) + "_" + post.post_id;
    p.post = post;
    try {
      p.questions.push_back({post.ground_truth, Source::GroundTruth, GroupValue::UNK});
      auto t = text_only(post.post_text, GroupValue::UNK);
      if (t.empty()) throw std::runtime_error("empty text-only generation");
      p.questions.push_back({t, Source::TextOnly, GroupValue::UNK});
      const auto& values = values_of(post.category);
      for (std::size_t i = 0; i < 2; ++i) {
        auto s = social_token(post.post_text, values[i]);
        if (s.empty()) throw std::runtime_error("empty social-token generation");
        p.questions.push_back({s, Source::SocialToken, values[i]});
      }
    } catch (const std::exception& e) {
      if (warnings) warnings->push_back("dropping post " + post.post_id + ": " + e.what());
      continue;
    }
    p.seed = seed ^ text::fnv1a(p.packet_id);
    p.order = {0, 1, 2, 3};
    seeded_shuffle(p.order, p.seed);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<KeyEntry> answer_key(const std::vector<Packet>& packets) {
  std::vector<KeyEntry> key;
  for (const auto& p : packets)
    for (std::size_t slot = 0; slot < p.order.size(); ++slot) {
      const auto& q = p.presented(slot);
      key.push_back({p.packet_id, slot, q.source, q.group, p.post.category, p.post.subreddit, p.post.post_id});
    }
  return key;
}

std::vector<std::string> export_annotator_files(const std::vector<Packet>& packets,
                                                const std::string& dir, std::size_t max_questions) {
  if (max_questions < 4) throw std::invalid_argument("annotator files must hold at least one packet");
  fs::create_directories(dir);
  const std::size_t per_file = max_questions / 4;
  std::vector<std::string> paths;
  for (std::size_t start = 0; start < packets.size(); start += per_file) {
    std::ostringstream name;
    name << "annotator_" << (paths.size() + 1) << ".tsv";
    const auto path = (fs::path(dir) / name.str()).string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "packet_id\tslot\tpost\tquestion\tanswerable\trelevant\tunderstandable\tgroup_guess\n";
    for (std::size_t i = start; i < std::min(packets.size(), start + per_file); ++i) {
      const auto& p = packets[i];
      for (std::size_t slot = 0; slot < p.order.size(); ++slot)
        out << p.packet_id << '\t' << slot << '\t' << one_line(p.post.post_text) << '\t'
            << one_line(p.presented(slot).text) << "\t\t\t\t\n";
    }
    paths.push_back(path);
  }
  return paths;
}

void write_key(const std::string& path, const std::vector<KeyEntry>& key) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "packet_id\tslot\tsource\tgroup\tcategory\tsubreddit\tpost_id\n";
  for (const auto& k : key)
    out << k.packet_id << '\t' << k.slot << '\t' << to_string(k.source) << '\t'
        << socq::to_string(k.group) << '\t' << socq::to_string(k.category) << '\t' << k.subreddit
        << '\t' << k.post_id << '\n';
}

namespace {

std::vector<std::vector<std::string>> read_tsv(const std::string& path, std::size_t min_cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() < min_cols)
      throw RatingError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(min_cols) +
                        " columns");
    rows.push_back(std::move(cols));
  }
  return rows;
}

}  // namespace

std::vector<KeyEntry> read_key(const std::string& path) {
  std::vector<KeyEntry> key;
  for (const auto& c : read_tsv(path, 7))
    key.push_back({c[0], std::stoul(c[1]), parse_source(c[2]), parse_value(c[3]), parse_category(c[4]),
                   c[5], c[6]});
  return key;
}

void validate(const Rating& r) {
  for (int v : {r.answerable, r.relevant, r.understandable})
    if (v < 1 || v > 5)
      throw RatingError("rating " + std::to_string(v) + " outside 1..5 (annotator " + r.annotator +
                        ", packet " + r.packet_id + ")");
}

std::vector<Rating> read_ratings(const std::string& path) {
  std::vector<Rating> out;
  for (const auto& c : read_tsv(path, 6)) {
    Rating r;
    r.annotator = c[0];
    r.packet_id = c[1];
    try {
      r.slot = std::stoul(c[2]);
      r.answerable = std::stoi(c[3]);
      r.relevant = std::stoi(c[4]);
      r.understandable = std::stoi(c[5]);
    } catch (const std::logic_error&) {
      throw RatingError(path + ": non-numeric rating for packet " + r.packet_id);
    }
    if (c.size() > 6 && !text::trim(c[6]).empty()) r.group_guess = parse_value(text::trim(c[6]));
    validate(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& ratings) {
  std::size_t items = 0;
  for (const auto& row : ratings) items = std::max(items, row.size());
  std::set<int> domain;
  std::vector<std::vector<int>> units;
  for (std::size_t i = 0; i < items; ++i) {
    std::vector<int> vals;
    for (const auto& row : ratings)
      if (i < row.size() && row[i]) vals.push_back(*row[i]);
    if (vals.size() < 2) continue;
    for (int v : vals) domain.insert(v);
    units.push_back(std::move(vals));
  }
  if (units.empty()) return std::nullopt;
  const std::vector<int> values(domain.begin(), domain.end());
  const std::size_t k = values.size();
  auto index = [&](int v) { return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin()); };
  std::vector<double> o(k * k, 0.0);
  for (const auto& u : units) {
    const double w = 1.0 / static_cast<double>(u.size() - 1);
    for (std::size_t a = 0; a < u.size(); ++a)
      for (std::size_t b = 0; b < u.size(); ++b)
        if (a != b) o[index(u[a]) * k + index(u[b])] += w;
  }
  std::vector<double> nc(k, 0.0);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < k; ++d) nc[c] += o[c * k + d];
  double n = 0;
  for (double x : nc) n += x;
  auto delta2 = [&](std::size_t c, std::size_t d) {
    if (c > d) std::swap(c, d);
    double s = 0;
    for (std::size_t g = c; g <= d; ++g) s += nc[g];
    s -= (nc[c] + nc[d]) / 2.0;
    return s * s;
  };
  double observed = 0, expected = 0;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t d = 0; d < k; ++d) {
      const double dd = delta2(c, d);
      observed += o[c * k + d] * dd;
      expected += nc[c] * nc[d] * dd;
    }
  if (observed == 0.0) return 1.0;
  expected /= (n - 1.0);
  return 1.0 - observed / expected;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: unpaired samples");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
  WilcoxonResult r;
  r.n = diffs.size();
  if (diffs.empty()) return r;
  std::vector<double> mags;
  for (double d : diffs) mags.push_back(std::fabs(d));
  const auto ranks = stats::midranks(mags);
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 0) r.w_plus += ranks[i];
  const double nn = static_cast<double>(r.n);
  if (r.n <= 20) {
    r.exact = true;
    // doubled ranks are integers even with ties
    std::vector<int> twice;
    int max_sum = 0;
    for (double x : ranks) {
      twice.push_back(static_cast<int>(std::lround(2 * x)));
      max_sum += twice.back();
    }
    std::vector<double> ways(static_cast<std::size_t>(max_sum) + 1, 0.0);
    ways[0] = 1;
    for (int t : twice)
      for (int s = max_sum; s >= t; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - t)];
    const int obs = static_cast<int>(std::lround(2 * r.w_plus));
    double lower = 0, upper = 0, total = std::ldexp(1.0, static_cast<int>(r.n));
    for (int s = 0; s <= max_sum; ++s) {
      if (s <= obs) lower += ways[static_cast<std::size_t>(s)];
      if (s >= obs) upper += ways[static_cast<std::size_t>(s)];
    }
    r.p_two_sided = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    return r;
  }
  const double mu = nn * (nn + 1) / 4.0;
  double tie = 0;
  {
    auto sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie += t * t * t - t;
      i = j;
    }
  }
  const double sd = std::sqrt(nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie / 48.0);
  if (sd == 0) return r;
  const double diff = r.w_plus - mu;
  const double z = (std::fabs(diff) - 0.5) / sd;
  r.p_two_sided = std::min(1.0, 2.0 * stats::normal_sf(std::max(0.0, z)));
  return r;
}

double Summary::guess_accuracy(const std::string& category, const std::string& subreddit) const {
  auto it = guesses.find({category, subreddit});
  if (it == guesses.end() || it->second.second == 0) return 0.0;
  return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
}

Summary summarize(const std::vector<Rating>& ratings, const std::vector<KeyEntry>& key) {
  std::map<std::pair<std::string, std::size_t>, const KeyEntry*> lookup;
  for (const auto& k : key) lookup[{k.packet_id, k.slot}] = &k;

  struct Acc {
    double a = 0, r = 0, u = 0;
    std::size_t n = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Acc> acc;
  // (category, annotator, packet) -> per source score sums for pairing
  std::map<std::tuple<std::string, std::string, std::string>, std::map<Source, Acc>> paired;
  Summary s;
  for (const auto& rt : ratings) {
    validate(rt);
    auto it = lookup.find({rt.packet_id, rt.slot});
    if (it == lookup.end())
      throw RatingError("rating for unknown packet slot " + rt.packet_id + "/" + std::to_string(rt.slot));
    const auto& k = *it->second;
    const std::string cat(socq::to_string(k.category));
    const std::string src(to_string(k.source));
    for (const auto& sub : {k.subreddit, std::string("*")}) {
      auto& x = acc[{cat, sub, src}];
      x.a += rt.answerable;
      x.r += rt.relevant;
      x.u += rt.understandable;
      ++x.n;
    }
    auto& p = paired[{cat, rt.annotator, rt.packet_id}][k.source];
    p.a += rt.answerable;
    p.r += rt.relevant;
    p.u += rt.understandable;
    ++p.n;
    if (k.source == Source::SocialToken && rt.group_guess) {
      for (const auto& sub : {k.subreddit, std::string("*")}) {
        auto& g = s.guesses[{cat, sub}];
        if (*rt.group_guess == k.group) ++g.first;
        ++g.second;
      }
    }
  }
  for (const auto& [k, x] : acc) {
    const double n = static_cast<double>(x.n);
    s.means[k] = {x.a / n, x.r / n, x.u / n, x.n};
  }
  std::map<std::string, std::array<std::pair<std::vector<double>, std::vector<double>>, 3>> samples;
  for (const auto& [k, by_source] : paired) {
    auto social = by_source.find(Source::SocialToken);
    auto text_only = by_source.find(Source::TextOnly);
    if (social == by_source.end() || text_only == by_source.end()) continue;
    auto& smp = samples[std::get<0>(k)];
    const double ns = static_cast<double>(social->second.n), nt = static_cast<double>(text_only->second.n);
    smp[0].first.push_back(social->second.a / ns);
    smp[0].second.push_back(text_only->second.a / nt);
    smp[1].first.push_back(social->second.r / ns);
    smp[1].second.push_back(text_only->second.r / nt);
    smp[2].first.push_back(social->second.u / ns);
    smp[2].second.push_back(text_only->second.u / nt);
  }
  const char* measures[] = {"answerable", "relevant", "understandable"};
  for (const auto& [cat, smp] : samples)
    for (std::size_t m = 0; m < 3; ++m)
      s.tests.push_back({cat, measures[m], wilcoxon_signed_rank(smp[m].first, smp[m].second)});
  return s;
}

std::string Summary::to_tsv() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "# mean ratings\ncategory\tsubreddit\tsource\tn\tanswerable\trelevant\tunderstandable\n";
  for (const auto& [k, m] : means)
    os << std::get<0>(k) << '\t' << std::get<1>(k) << '\t' << std::get<2>(k) << '\t' << m.n << '\t'
       << m.answerable << '\t' << m.relevant << '\t' << m.understandable << '\n';
  os << "# social_token vs text_only (Wilcoxon signed-rank)\ncategory\tmeasure\tn\tw_plus\tp\tsignificant\n";
  for (const auto& t : tests)
    os << t.category << '\t' << t.measure << '\t' << t.result.n << '\t' << t.result.w_plus << '\t'
       << t.result.p_two_sided << '\t' << (t.result.p_two_sided < 0.05 ? "yes" : "no") << '\n';
  os << "# group guessing\ncategory\tsubreddit\tcorrect\ttotal\taccuracy\n";
  for (const auto& [k, g] : guesses)
    os << k.first << '\t' << k.second << '\t' << g.first << '\t' << g.second << '\t'
       << (g.second ? static_cast<double>(g.first) / static_cast<double>(g.second) : 0.0) << '\n';
  return os.str();
}

}  // namespace socq::humaneval
