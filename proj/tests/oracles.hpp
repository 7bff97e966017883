#pragma once

// Brute-force reference implementations. They deliberately avoid the
// library's helpers so a shared bug cannot hide in both places.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '\'') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Consume reference tokens one match at a time.
inline double bleu1(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (hyp.empty() || ref.empty()) return 0.0;
  std::vector<bool> used(ref.size(), false);
  int matches = 0;
  for (const auto& h : hyp)
    for (std::size_t j = 0; j < ref.size(); ++j)
      if (!used[j] && ref[j] == h) {
        used[j] = true;
        ++matches;
        break;
      }
  double bp = 1.0;
  if (hyp.size() < ref.size()) bp = std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()));
  return static_cast<double>(matches) / static_cast<double>(hyp.size()) * bp;
}

inline std::string normalize(const std::string& s) {
  std::string out;
  bool space = false;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && std::string("?.!,;: ").find(out.back()) != std::string::npos)
    out.pop_back();
  return out;
}

inline double diversity(const std::vector<std::string>& hyps) {
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j)
      if (normalize(hyps[j]) == normalize(hyps[i])) seen = true;
    if (!seen) ++distinct;
  }
  return static_cast<double>(distinct) / static_cast<double>(hyps.size());
}

inline double redundancy(const std::vector<std::string>& hyps, const std::vector<std::string>& train) {
  std::size_t hits = 0;
  for (const auto& h : hyps)
    for (const auto& t : train)
      if (normalize(h) == normalize(t)) {
        ++hits;
        break;
      }
  return static_cast<double>(hits) / static_cast<double>(hyps.size());
}

inline double type_token_bigram(const std::vector<std::vector<std::string>>& hyps) {
  std::vector<std::string> bigrams;
  for (const auto& h : hyps)
    for (std::size_t i = 1; i < h.size(); ++i) bigrams.push_back(h[i - 1] + " " + h[i]);
  if (bigrams.empty()) return 0.0;
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < bigrams.size(); ++i)
    if (std::find(bigrams.begin(), bigrams.begin() + static_cast<long>(i), bigrams[i]) == bigrams.begin() + static_cast<long>(i))
      ++distinct;
  return static_cast<double>(distinct) / static_cast<double>(bigrams.size());
}

// Smallest sample value v with at least p% of the sample <= v.
inline double percentile(const std::vector<double>& xs, double p) {
  std::optional<double> best;
  for (double v : xs) {
    std::size_t le = 0;
    for (double x : xs)
      if (x <= v) ++le;
    if (static_cast<double>(le) * 100.0 >= p * static_cast<double>(xs.size()) - 1e-9 && (!best || v < *best)) best = v;
  }
  return *best;
}

inline std::vector<bool> divisive(const std::vector<double>& sims, double n) {
  std::vector<bool> out(sims.size(), false);
  if (sims.size() < 2) return out;
  const double t = percentile(sims, n);
  for (std::size_t i = 0; i < sims.size(); ++i) out[i] = sims[i] <= t;
  return out;
}

inline double npmi(double joint, double row, double col, double grand) {
  if (joint == 0) return 0.0;
  const double pij = joint / grand, pi = row / grand, pj = col / grand;
  if (pij == 1.0) return 1.0;
  return std::log(pij / (pi * pj)) / -std::log(pij);
}

inline double u_stat(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : x == y ? 0.5 : 0.0;
  return u;
}

// Exact two-sided permutation p over every split of the pooled values.
inline double mw_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pool(a);
  pool.insert(pool.end(), b.begin(), b.end());
  const std::size_t n = pool.size(), na = a.size();
  const double mu = static_cast<double>(a.size() * b.size()) / 2.0;
  const double obs = std::fabs(u_stat(a, b) - mu);
  std::size_t total = 0, extreme = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pool[i]);
    ++total;
    if (std::fabs(u_stat(x, y) - mu) >= obs - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

// Ordinal alpha from pairable values; ratings[annotator][item].
inline std::optional<double> alpha_ordinal(const std::vector<std::vector<std::optional<int>>>& r) {
  std::size_t items = 0;
  for (const auto& row : r) items = std::max(items, row.size());
  std::vector<std::vector<int>> units;
  std::map<int, double> ng;
  for (std::size_t i = 0; i < items; ++i) {
    std::vector<int> u;
    for (const auto& row : r)
      if (i < row.size() && row[i]) u.push_back(*row[i]);
    if (u.size() < 2) continue;
    for (int v : u) ng[v] += 1;
    units.push_back(u);
  }
  if (units.empty()) return std::nullopt;
  double n = 0;
  for (const auto& [v, c] : ng) n += c;
  auto d2 = [&](int c, int k) {
    if (c > k) std::swap(c, k);
    double s = 0;
    for (const auto& [g, cnt] : ng)
      if (g >= c && g <= k) s += cnt;
    s -= (ng[c] + ng[k]) / 2.0;
    return s * s;
  };
  double dobs = 0;
  for (const auto& u : units) {
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j) s += d2(u[i], u[j]);
    dobs += s / static_cast<double>(u.size() - 1);
  }
  dobs /= n;
  std::vector<int> pooled;
  for (const auto& u : units) pooled.insert(pooled.end(), u.begin(), u.end());
  double dexp = 0;
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = 0; j < pooled.size(); ++j)
      if (i != j) dexp += d2(pooled[i], pooled[j]);
  dexp /= n * (n - 1);
  if (dobs == 0) return 1.0;
  return 1.0 - dobs / dexp;
}

}  // namespace oracle
