#pragma once

// Similarity metrics between rule sets: Jaccard, syntactic and per-rule
// semantic similarity, and the WSC ratio.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rebac/policy.hpp"

namespace rebac {

// Exact rational p/q with q > 0, kept reduced.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Ratio() = default;
  Ratio(std::int64_t n, std::int64_t d) : num(n), den(d) {
    const auto g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Throws std::overflow_error if an intermediate value leaves int64.
  friend Ratio operator+(const Ratio& a, const Ratio& b) {
    std::int64_t x, y, n, d;
    if (__builtin_mul_overflow(a.num, b.den, &x) || __builtin_mul_overflow(b.num, a.den, &y) ||
        __builtin_add_overflow(x, y, &n) || __builtin_mul_overflow(a.den, b.den, &d))
      throw std::overflow_error("Ratio overflow");
    return {n, d};
  }
  friend Ratio operator/(const Ratio& a, std::int64_t k) {
    std::int64_t d;
    if (__builtin_mul_overflow(a.den, k, &d)) throw std::overflow_error("Ratio overflow");
    return {a.num, d};
  }
  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Ratio& a, const Ratio& b) { return a.num * b.den < b.num * a.den; }
};

// |S1 ∩ S2| / |S1 ∪ S2|, with J(∅, ∅) = 1.
template <typename T>
Ratio jaccard_ratio(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return {1, 1};
  std::int64_t inter = 0;
  for (const auto& x : a) inter += b.count(x) ? 1 : 0;
  const auto uni = static_cast<std::int64_t>(a.size() + b.size()) - inter;
  return {inter, uni};
}

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
  return jaccard_ratio(a, b).value();
}

template <typename T>
std::set<T> as_set(const std::vector<T>& v) {
  return {v.begin(), v.end()};
}

// Mean of the Jaccard similarities of subject type, subject condition,
// resource type, resource condition, constraint and actions.
inline Ratio rule_syn_sim_ratio(const Rule& x, const Rule& y) {
  const Rule a = canonicalize(x), b = canonicalize(y);
  Ratio sum = jaccard_ratio(std::set<std::string>{a.subject_type}, std::set<std::string>{b.subject_type});
  sum = sum + jaccard_ratio(as_set(a.subject_condition), as_set(b.subject_condition));
  sum = sum + jaccard_ratio(std::set<std::string>{a.resource_type}, std::set<std::string>{b.resource_type});
  sum = sum + jaccard_ratio(as_set(a.resource_condition), as_set(b.resource_condition));
  sum = sum + jaccard_ratio(as_set(a.constraint), as_set(b.constraint));
  sum = sum + jaccard_ratio(as_set(a.actions), as_set(b.actions));
  return sum / 6;
}

inline double rule_syn_sim(const Rule& a, const Rule& b) { return rule_syn_sim_ratio(a, b).value(); }

namespace detail {

// For each i, the best similarity over j.
template <typename Sim>
std::vector<Ratio> best_matches(std::size_t n1, std::size_t n2, Sim&& sim) {
  std::vector<Ratio> out(n1, Ratio{0, 1});
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      const Ratio s = sim(i, j);
      if (out[i] < s) out[i] = s;
    }
  return out;
}

inline Ratio exact_mean(const std::vector<Ratio>& v, std::size_t n2) {
  if (v.empty()) return n2 == 0 ? Ratio{1, 1} : Ratio{0, 1};
  Ratio total{0, 1};
  for (const auto& r : v) total = total + r;
  return total / static_cast<std::int64_t>(v.size());
}

inline double mean(const std::vector<Ratio>& v, std::size_t n2) {
  if (v.empty()) return n2 == 0 ? 1.0 : 0.0;
  double total = 0;
  for (const auto& r : v) total += r.value();
  return total / static_cast<double>(v.size());
}

inline std::vector<Ratio> syn_matches(const std::vector<Rule>& r1, const std::vector<Rule>& r2) {
  return best_matches(r1.size(), r2.size(), [&](std::size_t i, std::size_t j) { return rule_syn_sim_ratio(r1[i], r2[j]); });
}

inline std::vector<Ratio> sem_matches(const ObjectModel& om, const std::vector<Rule>& r1, const std::vector<Rule>& r2) {
  std::vector<AuthorizationSet> m1, m2;
  for (const auto& r : r1) m1.push_back(rule_meaning(om, r));
  for (const auto& r : r2) m2.push_back(rule_meaning(om, r));
  return best_matches(r1.size(), r2.size(), [&](std::size_t i, std::size_t j) { return jaccard_ratio(m1[i], m2[j]); });
}

}  // namespace detail

// Average over rules of r1 of the similarity to the most similar rule of r2.
// The exact forms throw std::overflow_error when the sum does not fit.
inline Ratio policy_syn_sim_ratio(const std::vector<Rule>& r1, const std::vector<Rule>& r2) {
  return detail::exact_mean(detail::syn_matches(r1, r2), r2.size());
}

inline double policy_syn_sim(const std::vector<Rule>& r1, const std::vector<Rule>& r2) {
  return detail::mean(detail::syn_matches(r1, r2), r2.size());
}

// Same extension with J(⟦ρ1⟧, ⟦ρ2⟧) as the rule similarity.
inline Ratio per_rule_sem_sim_ratio(const ObjectModel& om, const std::vector<Rule>& r1,
                                    const std::vector<Rule>& r2) {
  return detail::exact_mean(detail::sem_matches(om, r1, r2), r2.size());
}

inline double per_rule_sem_sim(const ObjectModel& om, const std::vector<Rule>& r1, const std::vector<Rule>& r2) {
  return detail::mean(detail::sem_matches(om, r1, r2), r2.size());
}

struct SimilarityReport {
  double syn_sim = 0;
  double per_rule_sem_sim = 0;
  int wsc_mined = 0;
  int wsc_input = 0;
  double wsc_ratio = 0;
};

// Compares mined rules against input rules (similarities are taken from
// the mined side).
inline SimilarityReport compare_policies(const ObjectModel& om, const std::vector<Rule>& mined,
                                         const std::vector<Rule>& input) {
  SimilarityReport r;
  r.syn_sim = policy_syn_sim(mined, input);
  r.per_rule_sem_sim = per_rule_sem_sim(om, mined, input);
  r.wsc_mined = wsc(mined);
  r.wsc_input = wsc(input);
  r.wsc_ratio = r.wsc_input > 0 ? static_cast<double>(r.wsc_mined) / r.wsc_input : (r.wsc_mined == 0 ? 1.0 : 0.0);
  return r;
}

}  // namespace rebac
