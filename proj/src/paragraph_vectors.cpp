#include "socq/paragraph_vectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "socq/text.hpp"

namespace socq::embed {

namespace {

std::uint64_t next(std::uint64_t& s) {
  // splitmix64
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform(std::uint64_t& s) { return static_cast<double>(next(s) >> 11) * 0x1.0p-53; }

double sigmoid(double x) {
  if (x > 30) return 1.0;
  if (x < -30) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

std::vector<double> random_vector(int dim, std::uint64_t& s) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (auto& x : v) x = (uniform(s) - 0.5) / dim;
  return v;
}

}  // namespace

std::size_t ParagraphVectorModel::sample_negative(std::uint64_t& s) const {
  double r = uniform(s) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), words_.size() - 1);
}

void ParagraphVectorModel::update_pair(std::vector<double>& input, std::size_t target,
                                       double alpha, std::uint64_t& s, bool update_output,
                                       std::vector<double>& neu1e) {
  std::fill(neu1e.begin(), neu1e.end(), 0.0);
  const auto dim = input.size();
  for (int d = 0; d <= options_.negative; ++d) {
    std::size_t t;
    double label;
    if (d == 0) {
      t = target;
      label = 1.0;
    } else {
      t = sample_negative(s);
      if (t == target) continue;
      label = 0.0;
    }
    auto& out = word_out_[t];
    double f = 0;
    for (std::size_t i = 0; i < dim; ++i) f += input[i] * out[i];
    const double g = (label - sigmoid(f)) * alpha;
    for (std::size_t i = 0; i < dim; ++i) neu1e[i] += g * out[i];
    if (update_output)
      for (std::size_t i = 0; i < dim; ++i) out[i] += g * input[i];
  }
  for (std::size_t i = 0; i < dim; ++i) input[i] += neu1e[i];
}

void ParagraphVectorModel::update_pair_frozen(std::vector<double>& input, std::size_t target,
                                              double alpha, std::uint64_t& s,
                                              std::vector<double>& neu1e) const {
  std::fill(neu1e.begin(), neu1e.end(), 0.0);
  const auto dim = input.size();
  for (int d = 0; d <= options_.negative; ++d) {
    std::size_t t = d == 0 ? target : sample_negative(s);
    if (d > 0 && t == target) continue;
    const double label = d == 0 ? 1.0 : 0.0;
    const auto& out = word_out_[t];
    double f = 0;
    for (std::size_t i = 0; i < dim; ++i) f += input[i] * out[i];
    const double g = (label - sigmoid(f)) * alpha;
    for (std::size_t i = 0; i < dim; ++i) neu1e[i] += g * out[i];
  }
  for (std::size_t i = 0; i < dim; ++i) input[i] += neu1e[i];
}

std::vector<std::size_t> ParagraphVectorModel::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> ids;
  for (const auto& t : tokens) {
    auto it = index_.find(t);
    if (it != index_.end()) ids.push_back(it->second);
  }
  return ids;
}

ParagraphVectorModel ParagraphVectorModel::train(
    const std::vector<std::vector<std::string>>& documents, const ParagraphVectorOptions& options) {
  if (documents.empty()) throw std::invalid_argument("paragraph vectors: empty corpus");
  ParagraphVectorModel m;
  m.options_ = options;
  std::map<std::string, std::size_t> freq;
  for (const auto& d : documents)
    for (const auto& w : d) ++freq[w];
  for (const auto& [w, c] : freq) {
    if (c < static_cast<std::size_t>(std::max(options.min_count, 1))) continue;
    m.index_[w] = m.words_.size();
    m.words_.push_back(w);
    m.counts_.push_back(static_cast<double>(c));
  }
  if (m.words_.empty()) throw std::invalid_argument("paragraph vectors: no word reaches min_count");
  double acc = 0;
  for (double c : m.counts_) {
    acc += std::pow(c, 0.75);
    m.cumulative_.push_back(acc);
  }

  std::uint64_t s = options.seed;
  for (std::size_t i = 0; i < m.words_.size(); ++i) {
    m.word_in_.push_back(random_vector(options.dim, s));
    m.word_out_.emplace_back(static_cast<std::size_t>(options.dim), 0.0);
  }
  for (std::size_t i = 0; i < documents.size(); ++i) m.docs_.push_back(random_vector(options.dim, s));

  std::vector<std::vector<std::size_t>> encoded;
  std::size_t total_words = 0;
  for (const auto& d : documents) {
    encoded.push_back(m.encode(d));
    total_words += encoded.back().size();
  }
  const double total = static_cast<double>(std::max<std::size_t>(total_words, 1)) * options.epochs;
  double processed = 0;
  std::vector<double> scratch(static_cast<std::size_t>(options.dim));
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t di = 0; di < encoded.size(); ++di) {
      const auto& ids = encoded[di];
      for (std::size_t pos = 0; pos < ids.size(); ++pos, ++processed) {
        const double alpha =
            std::max(options.min_alpha, options.alpha - (options.alpha - options.min_alpha) * processed / total);
        m.update_pair(m.docs_[di], ids[pos], alpha, s, true, scratch);
        if (!options.train_words) continue;
        const int reduced = static_cast<int>(next(s) % static_cast<std::uint64_t>(options.window));
        const int w = options.window - reduced;
        for (int off = -w; off <= w; ++off) {
          if (off == 0) continue;
          const long ctx = static_cast<long>(pos) + off;
          if (ctx < 0 || ctx >= static_cast<long>(ids.size())) continue;
          m.update_pair(m.word_in_[ids[static_cast<std::size_t>(ctx)]], ids[pos], alpha, s, true,
                        scratch);
        }
      }
    }
  }
  return m;
}

std::vector<double> ParagraphVectorModel::infer(const std::vector<std::string>& tokens) const {
  auto ids = encode(tokens);
  std::uint64_t s = options_.seed ^ text::fnv1a(text::join(tokens, "\x1f"));
  auto v = random_vector(options_.dim, s);
  if (ids.empty()) return v;
  std::vector<double> scratch(static_cast<std::size_t>(options_.dim));
  const double steps = static_cast<double>(ids.size()) * options_.infer_epochs;
  double done = 0;
  for (int e = 0; e < options_.infer_epochs; ++e)
    for (auto id : ids) {
      const double alpha =
          std::max(options_.min_alpha, options_.alpha - (options_.alpha - options_.min_alpha) * done / steps);
      update_pair_frozen(v, id, alpha, s, scratch);
      ++done;
    }
  return v;
}

void ParagraphVectorModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  out << options_.dim << ' ' << options_.window << ' ' << options_.negative << ' '
      << options_.min_count << ' ' << options_.epochs << ' ' << options_.alpha << ' '
      << options_.min_alpha << ' ' << options_.train_words << ' ' << options_.infer_epochs << ' '
      << options_.seed << '\n';
  out << words_.size() << ' ' << docs_.size() << '\n';
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << ' ' << counts_[i];
    for (double x : word_in_[i]) out << ' ' << x;
    for (double x : word_out_[i]) out << ' ' << x;
    out << '\n';
  }
  for (const auto& d : docs_) {
    for (std::size_t i = 0; i < d.size(); ++i) out << (i ? " " : "") << d[i];
    out << '\n';
  }
}

ParagraphVectorModel ParagraphVectorModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ParagraphVectorModel m;
  auto& o = m.options_;
  in >> o.dim >> o.window >> o.negative >> o.min_count >> o.epochs >> o.alpha >> o.min_alpha >>
      o.train_words >> o.infer_epochs >> o.seed;
  std::size_t nw = 0, nd = 0;
  in >> nw >> nd;
  if (!in) throw std::runtime_error(path + ": bad paragraph-vector header");
  const auto dim = static_cast<std::size_t>(o.dim);
  double acc = 0;
  for (std::size_t i = 0; i < nw; ++i) {
    std::string w;
    double c;
    in >> w >> c;
    std::vector<double> vin(dim), vout(dim);
    for (auto& x : vin) in >> x;
    for (auto& x : vout) in >> x;
    m.index_[w] = i;
    m.words_.push_back(w);
    m.counts_.push_back(c);
    acc += std::pow(c, 0.75);
    m.cumulative_.push_back(acc);
    m.word_in_.push_back(std::move(vin));
    m.word_out_.push_back(std::move(vout));
  }
  for (std::size_t i = 0; i < nd; ++i) {
    std::vector<double> d(dim);
    for (auto& x : d) in >> x;
    m.docs_.push_back(std::move(d));
  }
  if (!in) throw std::runtime_error(path + ": truncated paragraph-vector model");
  return m;
}

std::optional<std::vector<double>> asker_text_embedding(const profile::AskerProfile& profile,
                                                        const ParagraphVectorModel& model) {
  if (profile.history.empty()) return std::nullopt;
  std::vector<double> sum(static_cast<std::size_t>(model.dim()), 0.0);
  for (const auto& e : profile.history) {
    auto v = model.infer(text::words(e.body));
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  for (auto& x : sum) x /= static_cast<double>(profile.history.size());
  return sum;
}

}  // namespace socq::embed
