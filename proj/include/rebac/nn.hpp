#pragma once

// Two-layer ReLU/softmax classifier over feature vectors, trained full-batch
// with ADADELTA on class-weighted cross-entropy, and the edge-weight feature
// scores derived from it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rebac/features.hpp"
#include "rebac/random.hpp"

namespace rebac {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int hidden = 64;
  int n_tr = 10000;
  double rho = 0.9;
  double eps = 1e-6;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// w_in[x * hidden + z] is w_{x->z}; w_out[z * 2 + c] is w_{z->p_c}.
struct NetworkWeights {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w_in;
  std::vector<double> w_out;

  NetworkWeights() = default;
  NetworkWeights(std::size_t n_in, std::size_t n_hidden)
      : inputs(n_in), hidden(n_hidden), w_in(n_in * n_hidden, 0.0), w_out(n_hidden * 2, 0.0) {}

  double& in(std::size_t x, std::size_t z) { return w_in[x * hidden + z]; }
  double in(std::size_t x, std::size_t z) const { return w_in[x * hidden + z]; }
  double& out(std::size_t z, int c) { return w_out[z * 2 + static_cast<std::size_t>(c)]; }
  double out(std::size_t z, int c) const { return w_out[z * 2 + static_cast<std::size_t>(c)]; }

  friend bool operator==(const NetworkWeights&, const NetworkWeights&) = default;
};

// Uniform in [-1/sqrt(fanIn), 1/sqrt(fanIn)] per layer.
inline NetworkWeights init_weights(std::size_t inputs, const TrainConfig& cfg) {
  if (cfg.hidden < 1) throw std::invalid_argument("hidden size must be >= 1");
  NetworkWeights w(inputs, static_cast<std::size_t>(cfg.hidden));
  Rng rng = make_rng(cfg.seed, "nn-init");
  const double a_in = inputs ? 1.0 / std::sqrt(static_cast<double>(inputs)) : 0.0;
  const double a_out = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (auto& v : w.w_in) v = (2.0 * uniform_real(rng) - 1.0) * a_in;
  for (auto& v : w.w_out) v = (2.0 * uniform_real(rng) - 1.0) * a_out;
  return w;
}

struct ForwardResult {
  std::vector<double> z;
  std::array<double, 2> b{};
  std::array<double, 2> p{};
};

enum class Classification { kDeny, kPermit, kUnclassified };

inline Classification classify(const std::array<double, 2>& p) {
  if (p[1] > p[0]) return Classification::kPermit;
  if (p[0] > p[1]) return Classification::kDeny;
  return Classification::kUnclassified;
}

inline std::array<double, 2> softmax2(const std::array<double, 2>& b) {
  const double m = std::max(b[0], b[1]);
  const double e0 = std::exp(b[0] - m), e1 = std::exp(b[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

namespace detail {

inline void forward_active(const NetworkWeights& w, const std::vector<std::uint32_t>& active, ForwardResult& out) {
  out.z.assign(w.hidden, 0.0);
  for (auto x : active) {
    const double* row = &w.w_in[x * w.hidden];
    for (std::size_t k = 0; k < w.hidden; ++k) out.z[k] += row[k];
  }
  out.b = {0.0, 0.0};
  for (std::size_t k = 0; k < w.hidden; ++k) {
    if (out.z[k] < 0) out.z[k] = 0;
    out.b[0] += out.z[k] * w.w_out[k * 2];
    out.b[1] += out.z[k] * w.w_out[k * 2 + 1];
  }
  out.p = softmax2(out.b);
}

inline std::vector<std::uint32_t> active_bits(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

}  // namespace detail

inline ForwardResult forward(const NetworkWeights& w, const std::vector<std::uint8_t>& x) {
  if (x.size() != w.inputs) throw std::invalid_argument("forward: input size mismatch");
  ForwardResult r;
  detail::forward_active(w, detail::active_bits(x), r);
  return r;
}

// w1 = (N - N1) / N, w0 = 1 - w1.
struct ClassWeights {
  double w0 = 0.5;
  double w1 = 0.5;
};

inline ClassWeights class_weights(std::size_t n, std::size_t n1) {
  if (n == 0) return {};
  const double w1 = static_cast<double>(n - n1) / static_cast<double>(n);
  return {1.0 - w1, w1};
}

inline ClassWeights class_weights(const std::vector<LabeledFeatureVector>& vs) {
  std::size_t n1 = 0;
  for (const auto& v : vs) n1 += v.label == 1 ? 1 : 0;
  return class_weights(vs.size(), n1);
}

inline double clamped_log(double p) { return std::log(std::max(p, 1e-12)); }

inline double loss(const std::vector<LabeledFeatureVector>& batch, const NetworkWeights& w) {
  const auto cw = class_weights(batch);
  double total = 0;
  for (const auto& v : batch) {
    const auto f = forward(w, v.bits);
    total += v.label == 1 ? -cw.w1 * clamped_log(f.p[1]) : -cw.w0 * clamped_log(f.p[0]);
  }
  return total;
}

// Distinct bit patterns with per-label multiplicities. Gradients over the
// compressed batch equal those over the original one.
class CompressedBatch {
 public:
  struct Row {
    std::vector<std::uint32_t> active;
    double count[2] = {0, 0};
  };

  explicit CompressedBatch(const std::vector<LabeledFeatureVector>& vs) {
    if (vs.empty()) throw std::invalid_argument("empty training batch");
    inputs_ = vs.front().bits.size();
    std::map<std::vector<std::uint8_t>, std::size_t> index;
    std::size_t n1 = 0;
    for (const auto& v : vs) {
      if (v.bits.size() != inputs_) throw std::invalid_argument("inconsistent feature vector lengths");
      auto [it, fresh] = index.emplace(v.bits, rows_.size());
      if (fresh) rows_.push_back({detail::active_bits(v.bits), {0, 0}});
      rows_[it->second].count[v.label == 1 ? 1 : 0] += 1;
      n1 += v.label == 1 ? 1 : 0;
    }
    cw_ = class_weights(vs.size(), n1);
  }

  std::size_t inputs() const { return inputs_; }
  const std::vector<Row>& rows() const { return rows_; }
  const ClassWeights& weights() const { return cw_; }

 private:
  std::size_t inputs_ = 0;
  std::vector<Row> rows_;
  ClassWeights cw_;
};

struct Gradient {
  std::vector<double> g_in;
  std::vector<double> g_out;
};

// Loss and its analytic gradient.
inline double loss_and_gradient(const CompressedBatch& batch, const NetworkWeights& w, Gradient& g) {
  g.g_in.assign(w.w_in.size(), 0.0);
  g.g_out.assign(w.w_out.size(), 0.0);
  const auto& cw = batch.weights();
  ForwardResult f;
  std::vector<double> dz(w.hidden);
  double total = 0;
  for (const auto& row : batch.rows()) {
    detail::forward_active(w, row.active, f);
    const double c0 = row.count[0] * cw.w0, c1 = row.count[1] * cw.w1;
    total += -c0 * clamped_log(f.p[0]) - c1 * clamped_log(f.p[1]);
    // dL/db_c = sum over labels y of weight_y * (p_c - [c == y])
    const double db0 = (c0 + c1) * f.p[0] - c0;
    const double db1 = (c0 + c1) * f.p[1] - c1;
    for (std::size_t k = 0; k < w.hidden; ++k) {
      g.g_out[k * 2] += db0 * f.z[k];
      g.g_out[k * 2 + 1] += db1 * f.z[k];
      dz[k] = f.z[k] > 0 ? db0 * w.w_out[k * 2] + db1 * w.w_out[k * 2 + 1] : 0.0;
    }
    for (auto x : row.active) {
      double* gr = &g.g_in[x * w.hidden];
      for (std::size_t k = 0; k < w.hidden; ++k) gr[k] += dz[k];
    }
  }
  return total;
}

inline Gradient gradient(const std::vector<LabeledFeatureVector>& batch, const NetworkWeights& w) {
  Gradient g;
  loss_and_gradient(CompressedBatch(batch), w, g);
  return g;
}

struct TrainResult {
  NetworkWeights weights;
  int iterations = 0;
  double accuracy = 0;         // over all vectors, unclassified counts as wrong
  double final_loss = 0;
  bool converged = false;      // every learnable vector correctly classified
  std::size_t unlearnable = 0; // vectors that no classifier can get right
};

namespace detail {

// Rows no network can classify correctly: all-zero inputs (p is always
// (0.5, 0.5) without biases) and patterns carrying both labels.
inline bool learnable(const CompressedBatch::Row& row) {
  return !row.active.empty() && (row.count[0] == 0 || row.count[1] == 0);
}

inline std::pair<double, bool> evaluate(const CompressedBatch& batch, const NetworkWeights& w) {
  ForwardResult f;
  double correct = 0, total = 0;
  bool all_learnable_ok = true;
  for (const auto& row : batch.rows()) {
    detail::forward_active(w, row.active, f);
    const auto c = classify(f.p);
    const double ok = c == Classification::kPermit ? row.count[1] : c == Classification::kDeny ? row.count[0] : 0.0;
    correct += ok;
    total += row.count[0] + row.count[1];
    if (learnable(row) && ok == 0) all_learnable_ok = false;
  }
  return {total > 0 ? correct / total : 1.0, all_learnable_ok};
}

}  // namespace detail

inline TrainResult train(const std::vector<LabeledFeatureVector>& vectors, const TrainConfig& cfg) {
  if (cfg.n_tr < 1) throw std::invalid_argument("n_tr must be >= 1");
  CompressedBatch batch(vectors);
  TrainResult res;
  res.weights = init_weights(batch.inputs(), cfg);
  for (const auto& row : batch.rows())
    if (!detail::learnable(row)) res.unlearnable += static_cast<std::size_t>(row.count[0] + row.count[1]);
  auto& w = res.weights;
  std::vector<double> eg_in(w.w_in.size(), 0.0), ed_in(w.w_in.size(), 0.0);
  std::vector<double> eg_out(w.w_out.size(), 0.0), ed_out(w.w_out.size(), 0.0);
  Gradient g;
  auto step = [&](std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& eg,
                  std::vector<double>& ed) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      eg[i] = cfg.rho * eg[i] + (1 - cfg.rho) * grad[i] * grad[i];
      const double d = -std::sqrt(ed[i] + cfg.eps) / std::sqrt(eg[i] + cfg.eps) * grad[i];
      ed[i] = cfg.rho * ed[i] + (1 - cfg.rho) * d * d;
      param[i] += d;
    }
  };
  for (;;) {
    auto [acc, ok] = detail::evaluate(batch, w);
    res.accuracy = acc;
    if (ok) {
      res.converged = true;
      break;
    }
    if (res.iterations >= cfg.n_tr) break;
    const double l = loss_and_gradient(batch, w, g);
    if (!std::isfinite(l))
      throw TrainingError("training diverged: non-finite loss at iteration " + std::to_string(res.iterations));
    step(w.w_in, g.g_in, eg_in, ed_in);
    step(w.w_out, g.g_out, eg_out, ed_out);
    ++res.iterations;
  }
  res.final_loss = loss_and_gradient(batch, w, g);
  return res;
}

struct FeatureScores {
  std::vector<double> s0;
  std::vector<double> s1;
};

inline double hidden_permit_score(const NetworkWeights& w, std::size_t z) { return w.out(z, 1) - w.out(z, 0); }

inline FeatureScores score_features(const NetworkWeights& w) {
  std::vector<double> s1z(w.hidden);
  for (std::size_t z = 0; z < w.hidden; ++z) s1z[z] = hidden_permit_score(w, z);
  FeatureScores out{std::vector<double>(w.inputs, 0.0), std::vector<double>(w.inputs, 0.0)};
  for (std::size_t x = 0; x < w.inputs; ++x) {
    for (std::size_t z = 0; z < w.hidden; ++z) {
      const double a = std::max(0.0, w.in(x, z));
      out.s1[x] += a * s1z[z];
      out.s0[x] -= a * s1z[z];
    }
  }
  return out;
}

// Indices of the `k` highest scores, ties broken by index.
inline std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

struct UsefulFeatureSet {
  std::vector<Feature> features;  // ordered by Feature::index
  double fu = 0;

  bool contains(const std::string& key) const {
    return std::any_of(features.begin(), features.end(), [&](const Feature& f) { return f.key == key; });
  }
};

// N_uf = ceil(F_u * N_f); top ceil(N_uf/3) by s0 and top ceil(2 N_uf/3) by s1,
// closed under Boolean complements found in `universe` (defaults to
// `features`). N_uf = N_f keeps everything.
inline UsefulFeatureSet select_useful(const FeatureScores& scores, const std::vector<Feature>& features, double fu,
                                      const std::vector<Feature>* universe = nullptr) {
  if (!(fu > 0 && fu <= 1)) throw std::invalid_argument("F_u must be in (0, 1]");
  if (scores.s0.size() != features.size() || scores.s1.size() != features.size())
    throw std::invalid_argument("select_useful: score/feature size mismatch");
  const std::size_t nf = features.size();
  const auto nuf = static_cast<std::size_t>(std::ceil(fu * static_cast<double>(nf) - 1e-9));
  const auto& all = universe ? *universe : features;
  UsefulFeatureSet out;
  out.fu = fu;
  if (nuf >= nf) {
    out.features = features;
    std::sort(out.features.begin(), out.features.end(), [](const Feature& a, const Feature& b) { return a.index < b.index; });
    return out;
  }
  const std::size_t k0 = (nuf + 2) / 3;
  const std::size_t k1 = (2 * nuf + 2) / 3;
  std::map<std::size_t, Feature> chosen;
  for (auto i : top_k(scores.s0, k0)) chosen.emplace(features[i].index, features[i]);
  for (auto i : top_k(scores.s1, k1)) chosen.emplace(features[i].index, features[i]);
  std::unordered_map<std::string, const Feature*> by_key;
  for (const auto& f : all) by_key.emplace(f.key, &f);
  std::vector<Feature> extra;
  for (const auto& [idx, f] : chosen) {
    if (auto ck = f.complement_key()) {
      auto it = by_key.find(*ck);
      if (it != by_key.end()) extra.push_back(*it->second);
    }
  }
  for (auto& f : extra) chosen.emplace(f.index, std::move(f));
  for (auto& [idx, f] : chosen) out.features.push_back(std::move(f));
  return out;
}

}  // namespace rebac
