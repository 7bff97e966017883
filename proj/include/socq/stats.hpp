#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace socq::stats {

class EmptyPopulation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Nearest-rank percentile: the smallest value v such that at least p% of the
// population is <= v. p must lie in (0, 100]; throws EmptyPopulation on empty input.
double nearest_rank_percentile(std::span<const double> population, double p);

double mean(std::span<const double> xs);

// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// Average ranks (1-based), ties receive the mean of the ranks they span.
std::vector<double> midranks(std::span<const double> xs);

double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

// Standard normal survival function, P(Z > z).
double normal_sf(double z);

}  // namespace socq::stats
