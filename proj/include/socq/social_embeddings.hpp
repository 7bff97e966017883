#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "socq/social_profiler.hpp"

namespace socq::embed {

inline constexpr int kEmbeddingDim = 100;

class CountError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Normalised PMI of a cell given its joint count, margins and grand total.
// A zero joint count maps to 0. Throws CountError on inconsistent counts.
double npmi(double joint, double row_total, double col_total, double grand_total);

// Subreddit x asker NPMI matrix over presence events: an asker counts once
// for a subreddit when at least one history comment was written there.
struct CrosspostMatrix {
  std::vector<std::string> subreddits;  // row labels, lowercased, sorted
  std::vector<std::string> askers;      // column labels, input order
  Eigen::MatrixXd joint;                // 0/1 presence
  Eigen::VectorXd row_totals;
  Eigen::VectorXd col_totals;
  double grand_total = 0.0;
  Eigen::MatrixXd values;  // NPMI
};

CrosspostMatrix build_crosspost_matrix(const std::vector<profile::AskerProfile>& profiles);

struct SvdEmbedding {
  std::map<std::string, std::vector<double>> vectors;  // each of length `requested_dim`
  int requested_dim = 0;
  int effective_dim = 0;  // min(requested, rows, cols); trailing entries are zero
  Eigen::MatrixXd u;      // rows x effective_dim, sign-fixed
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd v;  // cols x effective_dim
  std::vector<std::string> warnings;
};

// Truncated SVD; subreddit vector = left singular vectors scaled by the
// singular values. Each singular pair is flipped so the largest-magnitude
// entry of the left vector is positive.
SvdEmbedding svd_embed(const Eigen::MatrixXd& matrix, const std::vector<std::string>& row_names,
                       int d = kEmbeddingDim);

// Frobenius norm of matrix - U_d S_d V_d^T.
double reconstruction_error(const Eigen::MatrixXd& matrix, const SvdEmbedding& e, int d);

// Unweighted mean over the distinct history subreddits that have a vector.
std::optional<std::vector<double>> asker_subreddit_embedding(
    const profile::AskerProfile& profile, const std::map<std::string, std::vector<double>>& table);

// "name v1 v2 ... vd" per line.
void write_embeddings(const std::string& path, const std::map<std::string, std::vector<double>>& table);
std::map<std::string, std::vector<double>> read_embeddings(const std::string& path);

}  // namespace socq::embed
