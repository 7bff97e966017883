#include "socq/group_analysis.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "socq/stats.hpp"
#include "socq/text.hpp"

namespace socq::groups {

void CategoryLexicon::add(const std::string& category, const std::string& entry) {
  auto e = text::to_lower(text::trim(entry));
  if (e.empty()) return;
  auto& c = categories_[category];
  if (e.back() == '*') {
    e.pop_back();
    if (!e.empty()) c.prefixes.push_back(e);
  } else {
    c.words.insert(e);
  }
}

CategoryLexicon CategoryLexicon::parse(const std::string& contents) {
  CategoryLexicon lex;
  std::istringstream in(contents);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    auto name = text::trim(line.substr(0, tab));
    lex.categories_[name];
    for (auto& w : text::split_whitespace(line.substr(tab + 1))) lex.add(name, w);
  }
  for (const auto& [name, e] : lex.categories_)
    if (e.words.empty() && e.prefixes.empty())
      throw std::runtime_error("lexicon category " + name + " is empty");
  return lex;
}

CategoryLexicon CategoryLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool CategoryLexicon::matches(const std::string& category, const std::string& token) const {
  auto it = categories_.find(category);
  if (it == categories_.end()) return false;
  if (it->second.words.contains(token)) return true;
  for (const auto& p : it->second.prefixes)
    if (token.size() >= p.size() && token.compare(0, p.size(), p) == 0) return true;
  return false;
}

std::vector<std::string> CategoryLexicon::categories() const {
  std::vector<std::string> out;
  for (const auto& [name, e] : categories_) out.push_back(name);
  return out;
}

std::map<std::string, double> category_frequency(const std::string& question,
                                                 const CategoryLexicon& lexicon) {
  std::map<std::string, double> out;
  auto toks = text::words(question);
  for (const auto& c : lexicon.categories()) {
    double hits = 0;
    for (const auto& t : toks) hits += lexicon.matches(c, t);
    out[c] = toks.empty() ? 0.0 : hits / static_cast<double>(toks.size());
  }
  return out;
}

namespace {

double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

}  // namespace

MannWhitney mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
  MannWhitney r;
  r.u = u_statistic(a, b);
  const auto na = a.size(), nb = b.size(), n = na + nb;
  const double mu = static_cast<double>(na * nb) / 2.0;
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  const auto ranks = stats::midranks(all);

  if (n <= 20) {
    r.exact = true;
    const double obs = std::abs(r.u - mu);
    const double offset = static_cast<double>(na * (na + 1)) / 2.0;
    std::vector<std::size_t> pick(na);
    for (std::size_t i = 0; i < na; ++i) pick[i] = i;
    std::size_t total = 0, extreme = 0;
    while (true) {
      double rs = 0;
      for (auto i : pick) rs += ranks[i];
      if (std::abs(rs - offset - mu) >= obs - 1e-9) ++extreme;
      ++total;
      // next combination in lexicographic order
      std::size_t i = na;
      while (i > 0 && pick[i - 1] == n - na + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < na; ++j) pick[j] = pick[j - 1] + 1;
    }
    r.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
    return r;
  }

  std::map<double, double> ties;
  for (double x : all) ++ties[x];
  double tie_sum = 0;
  for (const auto& [v, t] : ties) tie_sum += t * t * t - t;
  const double nn = static_cast<double>(n);
  const double var = static_cast<double>(na * nb) / 12.0 * ((nn + 1) - tie_sum / (nn * (nn - 1)));
  if (var <= 0) {
    r.p_two_sided = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.u - mu) - 0.5) / std::sqrt(var);
  r.p_two_sided = std::min(1.0, 2.0 * stats::normal_sf(z));
  return r;
}

std::vector<CategoryDiff> GroupDiffReport::top_a_over_b(std::size_t k) const {
  std::vector<CategoryDiff> out;
  for (const auto& d : ranked)
    if (d.freq_a > d.freq_b && out.size() < k) out.push_back(d);
  return out;
}

std::vector<CategoryDiff> GroupDiffReport::top_b_over_a(std::size_t k) const {
  std::vector<CategoryDiff> out;
  for (const auto& d : ranked)
    if (d.freq_b > d.freq_a && out.size() < k) out.push_back(d);
  return out;
}

std::string GroupDiffReport::to_tsv(std::size_t k) const {
  std::ostringstream out;
  out << "direction\tcategory\tfreq_" << group_a << "\tfreq_" << group_b
      << "\tabs_diff_pct\tU\tp_value\n";
  auto emit = [&](const std::string& dir, const std::vector<CategoryDiff>& rows) {
    for (const auto& d : rows)
      out << dir << '\t' << d.category << '\t' << d.freq_a << '\t' << d.freq_b << '\t'
          << d.difference * 100.0 << '\t' << d.u << '\t' << d.p_value << '\n';
  };
  emit(group_a + ">" + group_b, top_a_over_b(k));
  emit(group_b + ">" + group_a, top_b_over_a(k));
  return out.str();
}

GroupDiffReport group_diff_report(const std::string& name_a, const std::vector<std::string>& group_a,
                                  const std::string& name_b, const std::vector<std::string>& group_b,
                                  const CategoryLexicon& lexicon) {
  if (group_a.empty() || group_b.empty())
    throw std::invalid_argument("group_diff_report: both groups need questions");
  GroupDiffReport rep;
  rep.group_a = name_a;
  rep.group_b = name_b;
  std::vector<std::map<std::string, double>> fa, fb;
  for (const auto& q : group_a) fa.push_back(category_frequency(q, lexicon));
  for (const auto& q : group_b) fb.push_back(category_frequency(q, lexicon));
  for (const auto& c : lexicon.categories()) {
    std::vector<double> va, vb;
    for (const auto& f : fa) va.push_back(f.at(c));
    for (const auto& f : fb) vb.push_back(f.at(c));
    CategoryDiff d;
    d.category = c;
    d.freq_a = stats::mean(va);
    d.freq_b = stats::mean(vb);
    d.difference = std::abs(d.freq_a - d.freq_b);
    auto mw = mann_whitney_u(va, vb);
    d.u = mw.u;
    d.p_value = mw.p_two_sided;
    rep.ranked.push_back(d);
  }
  std::stable_sort(rep.ranked.begin(), rep.ranked.end(),
                   [](const auto& x, const auto& y) { return x.difference > y.difference; });
  return rep;
}

Pca Pca::fit(const std::vector<std::vector<double>>& rows, int d) {
  if (rows.empty()) throw std::invalid_argument("pca: no rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto dim = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Pca p;
  p.d_ = d;
  p.mean_ = x.colwise().mean().transpose();
  x.rowwise() -= p.mean_.transpose();
  const auto k = std::min<Eigen::Index>({d, n, dim});
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  p.components_ = svd.matrixV().leftCols(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    p.components_.col(c).cwiseAbs().maxCoeff(&arg);
    if (p.components_(arg, c) < 0) p.components_.col(c) *= -1.0;
  }
  return p;
}

std::vector<double> Pca::transform(const std::vector<double>& row) const {
  Eigen::Map<const Eigen::VectorXd> v(row.data(), static_cast<Eigen::Index>(row.size()));
  if (v.size() != mean_.size()) throw std::invalid_argument("pca: input width mismatch");
  Eigen::VectorXd proj = components_.transpose() * (v - mean_);
  std::vector<double> out(static_cast<std::size_t>(d_), 0.0);
  for (Eigen::Index i = 0; i < proj.size(); ++i) out[static_cast<std::size_t>(i)] = proj(i);
  return out;
}

std::vector<double> PairFeature::concatenated() const {
  std::vector<double> out(question_vec);
  out.insert(out.end(), post_vec.begin(), post_vec.end());
  return out;
}

PairFeature encode_pair(const std::string& item_id, const std::string& question,
                        const std::string& post, const SentenceEncoder& encoder, const Pca& pca_q,
                        const Pca& pca_p) {
  try {
    return PairFeature{pca_q.transform(encoder.encode(question)),
                       pca_p.transform(encoder.encode(post))};
  } catch (const std::exception& e) {
    throw EncodingError("encoding failed for " + item_id + ": " + e.what());
  }
}

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Adam {
  Eigen::MatrixXd m, v;
  void init(Eigen::Index r, Eigen::Index c) {
    m = Eigen::MatrixXd::Zero(r, c);
    v = Eigen::MatrixXd::Zero(r, c);
  }
  template <typename P>
  void step(P& param, const Eigen::MatrixXd& grad, double lr, double wd, int t) {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1 - std::pow(b1, t), c2 = 1 - std::pow(b2, t);
    Eigen::MatrixXd update =
        (m / c1).array() / ((v / c2).array().sqrt() + eps);
    param = (param - lr * update - lr * wd * Eigen::MatrixXd(param)).eval();
  }
};

}  // namespace

GroupClassifier GroupClassifier::train(const std::vector<std::vector<double>>& features,
                                       const std::vector<GroupValue>& labels,
                                       GroupCategory category, const ClassifierOptions& o) {
  if (features.empty() || features.size() != labels.size())
    throw std::invalid_argument("group classifier: bad training shape");
  std::vector<GroupValue> classes;
  for (auto l : labels)
    if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
  if (classes.size() != 2)
    throw std::invalid_argument("group classifier needs exactly two classes, got " +
                                std::to_string(classes.size()));
  // canonical order: catalog order of the category
  std::sort(classes.begin(), classes.end());

  std::mt19937_64 rng(o.seed);
  std::vector<std::size_t> idx[2];
  for (std::size_t i = 0; i < labels.size(); ++i) idx[labels[i] == classes[1]].push_back(i);
  const std::size_t minority = idx[0].size() < idx[1].size() ? 0 : 1;
  std::vector<std::size_t> rows(idx[0]);
  rows.insert(rows.end(), idx[1].begin(), idx[1].end());
  {
    std::vector<std::size_t> pool = idx[minority];
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t need = idx[1 - minority].size() - idx[minority].size();
    for (std::size_t k = 0; k < need; ++k) rows.push_back(pool[k % pool.size()]);
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto dim = static_cast<Eigen::Index>(features.front().size());
  Eigen::MatrixXd x(n, dim);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    x.row(r) = to_eigen(features[rows[static_cast<std::size_t>(r)]]).transpose();
    y(r, labels[rows[static_cast<std::size_t>(r)]] == classes[1]) = 1.0;
  }

  GroupClassifier c;
  c.category_ = category;
  c.classes_ = classes;
  std::normal_distribution<double> g(0.0, 1.0);
  const double s1 = std::sqrt(2.0 / static_cast<double>(dim + o.hidden));
  const double s2 = std::sqrt(2.0 / static_cast<double>(o.hidden + 2));
  c.w1_ = Eigen::MatrixXd(dim, o.hidden);
  c.w2_ = Eigen::MatrixXd(o.hidden, 2);
  for (Eigen::Index i = 0; i < c.w1_.size(); ++i) c.w1_.data()[i] = g(rng) * s1;
  for (Eigen::Index i = 0; i < c.w2_.size(); ++i) c.w2_.data()[i] = g(rng) * s2;
  c.b1_ = Eigen::VectorXd::Zero(o.hidden);
  c.b2_ = Eigen::VectorXd::Zero(2);

  Adam aw1, ab1, aw2, ab2;
  aw1.init(dim, o.hidden);
  ab1.init(o.hidden, 1);
  aw2.init(o.hidden, 2);
  ab2.init(2, 1);
  for (int t = 1; t <= o.epochs; ++t) {
    Eigen::MatrixXd h = ((x * c.w1_).rowwise() + c.b1_.transpose()).array().tanh();
    Eigen::MatrixXd z = (h * c.w2_).rowwise() + c.b2_.transpose();
    Eigen::MatrixXd p(n, 2);
    for (Eigen::Index r = 0; r < n; ++r) {
      const double m = z.row(r).maxCoeff();
      const double e0 = std::exp(z(r, 0) - m), e1 = std::exp(z(r, 1) - m);
      p(r, 0) = e0 / (e0 + e1);
      p(r, 1) = e1 / (e0 + e1);
    }
    Eigen::MatrixXd dz = (p - y) / static_cast<double>(n);
    Eigen::MatrixXd gw2 = h.transpose() * dz;
    Eigen::MatrixXd gb2 = dz.colwise().sum().transpose();
    Eigen::MatrixXd dh = (dz * c.w2_.transpose()).array() * (1.0 - h.array().square());
    Eigen::MatrixXd gw1 = x.transpose() * dh;
    Eigen::MatrixXd gb1 = dh.colwise().sum().transpose();
    aw1.step(c.w1_, gw1, o.learning_rate, o.weight_decay, t);
    aw2.step(c.w2_, gw2, o.learning_rate, o.weight_decay, t);
    ab1.step(c.b1_, gb1, o.learning_rate, 0.0, t);
    ab2.step(c.b2_, gb2, o.learning_rate, 0.0, t);
  }
  return c;
}

Eigen::VectorXd GroupClassifier::logits(const std::vector<double>& feature) const {
  Eigen::VectorXd x = to_eigen(feature);
  if (x.size() != w1_.rows()) throw std::invalid_argument("group classifier: feature width mismatch");
  Eigen::VectorXd h = (w1_.transpose() * x + b1_).array().tanh();
  return w2_.transpose() * h + b2_;
}

GroupPrediction GroupClassifier::predict(const std::vector<double>& feature) const {
  auto z = logits(feature);
  const double p1 = 1.0 / (1.0 + std::exp(z(0) - z(1)));
  if (p1 > 0.5) return {classes_[1], p1};
  return {classes_[0], 1.0 - p1};
}

double GroupClassifier::probability_of(const std::vector<double>& feature, GroupValue label) const {
  auto z = logits(feature);
  const double p1 = 1.0 / (1.0 + std::exp(z(0) - z(1)));
  if (label == classes_[1]) return p1;
  if (label == classes_[0]) return 1.0 - p1;
  return 0.0;
}

double accuracy(const GroupClassifier& c, const std::vector<std::vector<double>>& features,
                const std::vector<GroupValue>& labels) {
  if (features.empty()) return 0.0;
  double hit = 0;
  for (std::size_t i = 0; i < features.size(); ++i) hit += c.predict(features[i]).label == labels[i];
  return hit / static_cast<double>(features.size());
}

std::vector<std::string> subset_group_specific(const std::vector<LabelledPair>& pairs,
                                               const GroupClassifier& classifier,
                                               double confidence) {
  std::vector<std::string> out;
  for (const auto& p : pairs)
    if (classifier.probability_of(p.feature, p.true_label) >= confidence) out.push_back(p.id);
  return out;
}

void GroupClassifierBank::add(const std::string& subreddit, GroupClassifier classifier) {
  auto key = std::make_pair(text::to_lower(subreddit), classifier.category());
  models_.insert_or_assign(key, std::move(classifier));
}

const GroupClassifier* GroupClassifierBank::find(const std::string& subreddit,
                                                 GroupCategory category) const {
  auto it = models_.find({text::to_lower(subreddit), category});
  return it == models_.end() ? nullptr : &it->second;
}

}  // namespace socq::groups
