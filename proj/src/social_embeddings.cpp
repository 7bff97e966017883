#include "socq/social_embeddings.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "socq/kernels.hpp"
#include "socq/text.hpp"

namespace socq::embed {

double npmi(double joint, double row_total, double col_total, double grand_total) {
  if (!(grand_total > 0)) throw CountError("npmi: grand total must be positive");
  if (joint < 0 || row_total < 0 || col_total < 0) throw CountError("npmi: negative count");
  if (joint > row_total || joint > col_total) throw CountError("npmi: joint exceeds a margin");
  if (row_total > grand_total || col_total > grand_total)
    throw CountError("npmi: margin exceeds grand total");
  if (joint == 0) return 0.0;
  if (joint == row_total && joint == col_total) return 1.0;
  const double pij = joint / grand_total;
  const double pi = row_total / grand_total;
  const double pj = col_total / grand_total;
  const double v = std::log(pij / (pi * pj)) / -std::log(pij);
  return std::clamp(v, -1.0, 1.0);
}

CrosspostMatrix build_crosspost_matrix(const std::vector<profile::AskerProfile>& profiles) {
  CrosspostMatrix m;
  std::set<std::string> names;
  for (const auto& p : profiles)
    for (const auto& e : p.history) names.insert(text::to_lower(e.subreddit));
  m.subreddits.assign(names.begin(), names.end());
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < m.subreddits.size(); ++i) row_of[m.subreddits[i]] = i;

  std::vector<std::vector<std::size_t>> members(m.subreddits.size());
  for (std::size_t j = 0; j < profiles.size(); ++j) {
    m.askers.push_back(profiles[j].asker_id);
    std::set<std::size_t> rows;
    for (const auto& e : profiles[j].history) rows.insert(row_of.at(text::to_lower(e.subreddit)));
    for (auto r : rows) members[r].push_back(j);
  }
  const auto rows = static_cast<Eigen::Index>(m.subreddits.size());
  const auto cols = static_cast<Eigen::Index>(profiles.size());
  auto flat = kernels::parallel::presence(members, profiles.size());
  m.joint = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), rows, cols);
  m.row_totals = m.joint.rowwise().sum();
  m.col_totals = m.joint.colwise().sum().transpose();
  m.grand_total = m.joint.sum();
  m.values = Eigen::MatrixXd::Zero(rows, cols);
  if (m.grand_total > 0) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        m.values(i, j) = npmi(m.joint(i, j), m.row_totals(i), m.col_totals(j), m.grand_total);
  }
  return m;
}

SvdEmbedding svd_embed(const Eigen::MatrixXd& matrix, const std::vector<std::string>& row_names,
                       int d) {
  if (!matrix.allFinite()) throw std::invalid_argument("svd_embed: matrix has non-finite entries");
  if (static_cast<Eigen::Index>(row_names.size()) != matrix.rows())
    throw std::invalid_argument("svd_embed: row names do not match matrix rows");
  SvdEmbedding out;
  out.requested_dim = d;
  const auto max_rank = std::min(matrix.rows(), matrix.cols());
  out.effective_dim = static_cast<int>(std::min<Eigen::Index>(d, max_rank));
  if (out.effective_dim < d)
    out.warnings.push_back("svd_embed: d=" + std::to_string(d) + " clamped to " +
                           std::to_string(out.effective_dim));
  const int k = out.effective_dim;
  if (k > 0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU().leftCols(k);
    out.v = svd.matrixV().leftCols(k);
    out.singular_values = svd.singularValues().head(k);
    for (int c = 0; c < k; ++c) {
      Eigen::Index arg = 0;
      out.u.col(c).cwiseAbs().maxCoeff(&arg);
      if (out.u(arg, c) < 0) {
        out.u.col(c) *= -1.0;
        out.v.col(c) *= -1.0;
      }
    }
  } else {
    out.u.resize(matrix.rows(), 0);
    out.v.resize(matrix.cols(), 0);
  }
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    std::vector<double> vec(static_cast<std::size_t>(d), 0.0);
    for (int c = 0; c < k; ++c) vec[static_cast<std::size_t>(c)] = out.u(r, c) * out.singular_values(c);
    out.vectors[row_names[static_cast<std::size_t>(r)]] = std::move(vec);
  }
  return out;
}

double reconstruction_error(const Eigen::MatrixXd& matrix, const SvdEmbedding& e, int d) {
  const int k = std::min(d, e.effective_dim);
  Eigen::MatrixXd approx = Eigen::MatrixXd::Zero(matrix.rows(), matrix.cols());
  for (int c = 0; c < k; ++c)
    approx += e.singular_values(c) * e.u.col(c) * e.v.col(c).transpose();
  return (matrix - approx).norm();
}

std::optional<std::vector<double>> asker_subreddit_embedding(
    const profile::AskerProfile& profile, const std::map<std::string, std::vector<double>>& table) {
  std::set<std::string> distinct;
  for (const auto& e : profile.history) distinct.insert(text::to_lower(e.subreddit));
  std::vector<double> sum;
  std::size_t n = 0;
  for (const auto& s : distinct) {
    auto it = table.find(s);
    if (it == table.end()) continue;
    if (sum.empty()) sum.assign(it->second.size(), 0.0);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += it->second[i];
    ++n;
  }
  if (n == 0) return std::nullopt;
  for (auto& x : sum) x /= static_cast<double>(n);
  return sum;
}

void write_embeddings(const std::string& path,
                      const std::map<std::string, std::vector<double>>& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  for (const auto& [name, v] : table) {
    out << name;
    for (double x : v) out << ' ' << x;
    out << '\n';
  }
}

std::map<std::string, std::vector<double>> read_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::vector<double>> out;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (width == 0) width = v.size();
    if (v.size() != width) throw std::runtime_error(path + ": ragged embedding row for " + name);
    out[name] = std::move(v);
  }
  return out;
}

}  // namespace socq::embed
