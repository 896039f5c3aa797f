#pragma once

// Mining drivers: plain evolutionary search, one-shot feature selection
// followed by restricted search, and iterated feature selection/search.

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rebac/features.hpp"
#include "rebac/grammar.hpp"
#include "rebac/nn.hpp"
#include "rebac/parallel.hpp"
#include "rebac/search.hpp"

namespace rebac {

enum class Algorithm : std::uint8_t { kSea, kFsSea1, kFsSeaStar };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSea: return "sea";
    case Algorithm::kFsSea1: return "fs-sea1";
    case Algorithm::kFsSeaStar: return "fs-sea-star";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
  if (s == "sea") return Algorithm::kSea;
  if (s == "fs-sea1") return Algorithm::kFsSea1;
  if (s == "fs-sea-star") return Algorithm::kFsSeaStar;
  return std::nullopt;
}

struct MinerConfig {
  Algorithm algorithm = Algorithm::kFsSeaStar;
  std::optional<double> fu;  // default 0.15 for fs-sea1, 0.05 for fs-sea-star
  TrainConfig train;
  SearchConfig search;
  FeatureLimits limits;
  LanguageOptions language;
  int max_outer_iterations = 20;
  int candidates_per_triple = 3;  // seeded searches per triple per iteration
  bool expand_equivalents = true;  // grammars also get features pruned as equivalent to a useful one
  std::uint64_t seed = 0;
  int threads = 0;  // 0: REBAC_MINER_THREADS or hardware concurrency

  double effective_fu() const {
    if (fu) return *fu;
    return algorithm == Algorithm::kFsSea1 ? 0.15 : 0.05;
  }
};

struct TripleStats {
  std::string triple;
  std::size_t positives = 0;
  std::size_t vectors = 0;
  std::size_t features = 0;        // before pruning
  std::size_t kept_features = 0;   // after constant and equivalence pruning
  std::size_t useful = 0;
  double accuracy = 0;
  int nn_iterations = 0;
  bool converged = false;
  std::size_t unlearnable = 0;
  bool rule_added = false;
};

struct IterationStats {
  int iteration = 0;
  std::size_t uncovered_before = 0;
  std::size_t uncovered_after = 0;
  int rules_added = 0;
  std::vector<TripleStats> triples;
};

struct MiningReport {
  Algorithm algorithm = Algorithm::kFsSeaStar;
  ReBACPolicy policy;
  std::vector<IterationStats> iterations;
  double elapsed_seconds = 0;
  bool consistent = false;
  std::string consistency_reason;
  int searches = 0;
  int fallback_rules = 0;      // id-based rules added when a search found no valid rule
  bool sea_fallback = false;   // iterated selection stalled; remainder mined without restriction
  int id_rules = 0;            // mined rules with an id condition
  ImprovementStats improvement;
  std::vector<std::string> warnings;
};

namespace detail {

struct MiningState {
  std::shared_ptr<const ObjectModel> om;
  std::vector<std::shared_ptr<const PairContext>> contexts;
  std::vector<std::vector<PairSet>> uncov;  // per context, per action
  std::vector<std::vector<MinedRule>> rules;

  std::size_t uncovered() const {
    std::size_t n = 0;
    for (const auto& u : uncov)
      for (const auto& s : u) n += s.count();
    return n;
  }
};

inline MiningState init_state(const ACLPolicy& acl, const MinerConfig& cfg, unsigned threads) {
  MiningState st;
  st.om = acl.object_model;
  std::set<std::pair<ClassId, ClassId>> pairs;
  for (const auto& t : typed_triples(*st.om, acl.authorizations)) pairs.emplace(t.subject_type, t.resource_type);
  std::vector<std::pair<ClassId, ClassId>> list(pairs.begin(), pairs.end());
  st.contexts.resize(list.size());
  parallel_for(list.size(), threads, [&](std::size_t i) {
    st.contexts[i] =
        make_pair_context(st.om, acl.authorizations, list[i].first, list[i].second, cfg.limits, cfg.language);
  });
  for (const auto& c : st.contexts) st.uncov.push_back(c->au);
  st.rules.resize(list.size());
  return st;
}

inline std::string triple_label(const PairContext& ctx, std::size_t a) {
  const auto& cm = ctx.object_model().class_model();
  return cm.name(ctx.subject_type()) + "/" + cm.name(ctx.resource_type()) + "/" + ctx.actions[a];
}

struct Selection {
  std::optional<UsefulFeatureSet> useful;
  std::vector<Feature> grammar_features;  // useful features plus their dropped equivalents
  TripleStats stats;
};

// Feature selection for one triple: positives are `positives`, negatives all
// pairs outside AU for the action; other pairs are left out.
inline Selection select_features(const PairContext& ctx, std::size_t a, const PairSet& positives,
                                 const MinerConfig& cfg, int iteration) {
  Selection out;
  out.stats.triple = triple_label(ctx, a);
  const auto& table = *ctx.table;
  PairSet include(table.pair_count(), true);
  include.subtract(ctx.au[a]);
  include |= positives;
  out.stats.positives = positives.count();
  auto vectors = build_vectors(table, table.features(), positives, &include);
  out.stats.vectors = vectors.size();
  out.stats.features = table.size();
  if (vectors.empty() || positives.none()) return out;
  auto constant = prune_constant_features(vectors, table.features());
  auto equiv = prune_equivalent_features(constant.vectors, constant.features);
  out.stats.kept_features = equiv.features.size();
  if (equiv.features.empty()) return out;
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "nn/" + out.stats.triple, static_cast<std::uint64_t>(iteration));
  auto trained = train(equiv.vectors, tc);
  out.stats.accuracy = trained.accuracy;
  out.stats.nn_iterations = trained.iterations;
  out.stats.converged = trained.converged;
  out.stats.unlearnable = trained.unlearnable;
  out.useful = select_useful(score_features(trained.weights), equiv.features, cfg.effective_fu(), &table.features());
  out.stats.useful = out.useful->features.size();
  std::set<std::size_t> idx;
  for (const auto& f : out.useful->features) {
    idx.insert(f.index);
    if (!cfg.expand_equivalents) continue;
    if (auto it = equiv.equivalents.find(f.index); it != equiv.equivalents.end()) idx.insert(it->second.begin(), it->second.end());
  }
  for (auto k : idx) out.grammar_features.push_back(table.feature(k));
  return out;
}

inline Grammar restricted_grammar(const std::shared_ptr<const PairContext>& ctx, const std::vector<Feature>& uf) {
  if (uf.empty()) return specialize_grammar(ctx);
  return specialize_grammar(ctx, &uf);
}

// Sample of up to k uncovered seed pairs for action a, spread over the
// lexicographic order.
inline std::vector<std::size_t> spread_seeds(const PairSet& uncov, int k) {
  std::vector<std::size_t> all;
  uncov.for_each([&](std::size_t p) { all.push_back(p); });
  std::vector<std::size_t> out;
  const auto n = all.size();
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), n);
  for (std::size_t i = 0; i < kk; ++i) {
    const auto p = all[i * n / kk];
    if (out.empty() || out.back() != p) out.push_back(p);
  }
  return out;
}

inline void run_phase1(MiningState& st, const MinerConfig& cfg, unsigned threads, MiningReport& report,
                       const std::function<const Grammar&(std::size_t, std::size_t)>& grammar_for,
                       const std::string& stream) {
  std::vector<Phase1Result> results(st.contexts.size());
  parallel_for(st.contexts.size(), threads, [&](std::size_t c) {
    const auto& ctx = *st.contexts[c];
    results[c] = phase1(
        ctx, [&](std::size_t a) -> const Grammar& { return grammar_for(c, a); }, st.uncov[c], cfg.search,
        cfg.seed, stream + "/" + triple_label(ctx, 0));
  });
  for (std::size_t c = 0; c < st.contexts.size(); ++c) {
    for (auto& r : results[c].rules) {
      cover(*st.contexts[c], r, st.uncov[c]);
      st.rules[c].push_back(std::move(r));
    }
    report.searches += results[c].searches;
    report.fallback_rules += results[c].fallbacks;
  }
}

inline void run_improvement(MiningState& st, const MinerConfig& cfg, unsigned threads, MiningReport& report,
                            const std::vector<std::set<std::size_t>>* useful) {
  std::vector<ImprovementStats> stats(st.contexts.size());
  parallel_for(st.contexts.size(), threads, [&](std::size_t c) {
    const auto& ctx = st.contexts[c];
    Grammar g = [&] {
      if (!useful || (*useful)[c].empty()) return specialize_grammar(ctx);
      std::vector<Feature> uf;
      for (auto k : (*useful)[c]) uf.push_back(ctx->table->feature(k));
      return specialize_grammar(ctx, &uf);
    }();
    st.rules[c] = improvement_phase(*ctx, std::move(st.rules[c]), g, cfg.search, cfg.seed,
                                    "improve/" + triple_label(*ctx, 0), &stats[c]);
  });
  auto& agg = report.improvement;
  for (const auto& s : stats) {
    agg.rounds = std::max(agg.rounds, s.rounds);
    agg.replaced += s.replaced;
    agg.atoms_dropped += s.atoms_dropped;
    agg.actions_dropped += s.actions_dropped;
    agg.merged += s.merged;
    agg.redundant_removed += s.redundant_removed;
  }
  if (!stats.empty()) agg.notes = stats.front().notes;
}

inline void finish(MiningState& st, const ACLPolicy& acl, MiningReport& report,
                   std::chrono::steady_clock::time_point start) {
  report.policy.object_model = acl.object_model;
  report.policy.actions = acl.actions;
  for (auto& rs : st.rules)
    for (auto& r : rs) report.policy.rules.push_back(std::move(r.rule));
  std::sort(report.policy.rules.begin(), report.policy.rules.end());
  report.policy.rules.erase(std::unique(report.policy.rules.begin(), report.policy.rules.end()),
                            report.policy.rules.end());
  for (const auto& r : report.policy.rules) report.id_rules += id_usage(r) > 0 ? 1 : 0;
  auto check = check_consistency(report.policy, acl);
  report.consistent = check.consistent;
  report.consistency_reason = check.reason;
  if (!check.consistent && check.reason.empty())
    report.consistency_reason = std::to_string(check.over_granted.size()) + " over-granted, " +
                                std::to_string(check.under_granted.size()) + " under-granted tuples";
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

inline MiningReport run_sea(const ACLPolicy& acl, const MinerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const unsigned threads = thread_count(cfg.threads);
  MiningReport report;
  report.algorithm = Algorithm::kSea;
  auto st = detail::init_state(acl, cfg, threads);
  std::vector<Grammar> grammars;
  for (const auto& c : st.contexts) grammars.push_back(specialize_grammar(c));
  IterationStats it;
  it.iteration = 1;
  it.uncovered_before = st.uncovered();
  detail::run_phase1(st, cfg, threads, report,
                     [&](std::size_t c, std::size_t) -> const Grammar& { return grammars[c]; }, "sea");
  it.uncovered_after = st.uncovered();
  for (const auto& rs : st.rules) it.rules_added += static_cast<int>(rs.size());
  report.iterations.push_back(it);
  detail::run_improvement(st, cfg, threads, report, nullptr);
  detail::finish(st, acl, report, start);
  return report;
}

inline MiningReport run_fs_sea1(const ACLPolicy& acl, const MinerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const unsigned threads = thread_count(cfg.threads);
  MiningReport report;
  report.algorithm = Algorithm::kFsSea1;
  auto st = detail::init_state(acl, cfg, threads);
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t c = 0; c < st.contexts.size(); ++c)
    for (std::size_t a = 0; a < st.contexts[c]->actions.size(); ++a) tasks.emplace_back(c, a);
  std::vector<detail::Selection> sel(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    auto [c, a] = tasks[t];
    sel[t] = detail::select_features(*st.contexts[c], a, st.contexts[c]->au[a], cfg, 1);
  });
  std::vector<std::vector<Grammar>> grammars(st.contexts.size());
  std::vector<std::set<std::size_t>> useful(st.contexts.size());
  IterationStats it;
  it.iteration = 1;
  it.uncovered_before = st.uncovered();
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto [c, a] = tasks[t];
    std::vector<Feature> uf = sel[t].grammar_features;
    if (uf.empty()) report.warnings.push_back(sel[t].stats.triple + ": no useful features; search unrestricted");
    if (!sel[t].stats.converged && sel[t].useful)
      report.warnings.push_back(sel[t].stats.triple + ": classifier did not reach full accuracy");
    for (const auto& f : uf) useful[c].insert(f.index);
    grammars[c].push_back(detail::restricted_grammar(st.contexts[c], uf));
    it.triples.push_back(sel[t].stats);
  }
  detail::run_phase1(st, cfg, threads, report,
                     [&](std::size_t c, std::size_t a) -> const Grammar& { return grammars[c][a]; }, "fs-sea1");
  it.uncovered_after = st.uncovered();
  for (const auto& rs : st.rules) it.rules_added += static_cast<int>(rs.size());
  report.iterations.push_back(it);
  detail::run_improvement(st, cfg, threads, report, &useful);
  detail::finish(st, acl, report, start);
  return report;
}

inline MiningReport run_fs_sea_star(const ACLPolicy& acl, const MinerConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const unsigned threads = thread_count(cfg.threads);
  MiningReport report;
  report.algorithm = Algorithm::kFsSeaStar;
  auto st = detail::init_state(acl, cfg, threads);
  std::vector<std::set<std::size_t>> useful(st.contexts.size());
  for (int iter = 1; iter <= cfg.max_outer_iterations && st.uncovered() > 0; ++iter) {
    IterationStats it;
    it.iteration = iter;
    it.uncovered_before = st.uncovered();
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t c = 0; c < st.contexts.size(); ++c)
      for (std::size_t a = 0; a < st.contexts[c]->actions.size(); ++a)
        if (!st.uncov[c][a].none()) tasks.emplace_back(c, a);
    struct Outcome {
      detail::Selection sel;
      std::vector<Feature> uf;
      std::optional<MinedRule> rule;
      int searches = 0;
    };
    std::vector<Outcome> out(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t t) {
      auto [c, a] = tasks[t];
      const auto& ctx = st.contexts[c];
      auto& o = out[t];
      o.sel = detail::select_features(*ctx, a, st.uncov[c][a], cfg, iter);
      o.uf = o.sel.grammar_features;
      const Grammar g = detail::restricted_grammar(ctx, o.uf);
      std::optional<Fitness> best;
      std::uint64_t k = 0;
      for (auto p : detail::spread_seeds(st.uncov[c][a], cfg.candidates_per_triple)) {
        Rng rng = make_rng(cfg.seed, "fs-sea-star/" + o.sel.stats.triple,
                           static_cast<std::uint64_t>(iter) * 1000 + k++);
        auto res = search_rule(g, st.uncov[c], p, a, cfg.search, rng);
        ++o.searches;
        MinedRule mr{res.rule, res.pairs};
        if (!res.valid || covered_count(*ctx, mr, st.uncov[c]) == 0) continue;
        if (!best || res.fitness < *best) {
          best = res.fitness;
          o.rule = std::move(mr);
        }
      }
    });
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      auto [c, a] = tasks[t];
      auto& o = out[t];
      report.searches += o.searches;
      for (const auto& f : o.uf) useful[c].insert(f.index);
      if (o.sel.useful && !o.sel.stats.converged)
        report.warnings.push_back("iteration " + std::to_string(iter) + ": " + o.sel.stats.triple +
                                  ": classifier did not reach full accuracy");
      if (o.rule && covered_count(*st.contexts[c], *o.rule, st.uncov[c]) > 0) {
        cover(*st.contexts[c], *o.rule, st.uncov[c]);
        st.rules[c].push_back(std::move(*o.rule));
        o.sel.stats.rule_added = true;
        ++it.rules_added;
      }
      it.triples.push_back(o.sel.stats);
    }
    it.uncovered_after = st.uncovered();
    report.iterations.push_back(std::move(it));
    if (report.iterations.back().uncovered_after >= report.iterations.back().uncovered_before) break;
  }
  if (st.uncovered() > 0) {
    report.sea_fallback = true;
    report.warnings.push_back("iterated feature selection stopped with " + std::to_string(st.uncovered()) +
                              " uncovered tuples; covering the rest without restriction");
    std::vector<Grammar> grammars;
    for (const auto& c : st.contexts) grammars.push_back(specialize_grammar(c));
    IterationStats it;
    it.iteration = static_cast<int>(report.iterations.size()) + 1;
    it.uncovered_before = st.uncovered();
    std::size_t before_rules = 0;
    for (const auto& rs : st.rules) before_rules += rs.size();
    detail::run_phase1(st, cfg, threads, report,
                       [&](std::size_t c, std::size_t) -> const Grammar& { return grammars[c]; }, "fallback");
    std::size_t after_rules = 0;
    for (const auto& rs : st.rules) after_rules += rs.size();
    it.rules_added = static_cast<int>(after_rules - before_rules);
    it.uncovered_after = st.uncovered();
    report.iterations.push_back(it);
  }
  detail::run_improvement(st, cfg, threads, report, &useful);
  detail::finish(st, acl, report, start);
  return report;
}

inline MiningReport mine(const ACLPolicy& acl, const MinerConfig& cfg) {
  const double fu = cfg.effective_fu();
  if (!(fu > 0 && fu <= 1)) throw std::invalid_argument("F_u must be in (0, 1]");
  switch (cfg.algorithm) {
    case Algorithm::kSea: return run_sea(acl, cfg);
    case Algorithm::kFsSea1: return run_fs_sea1(acl, cfg);
    case Algorithm::kFsSeaStar: return run_fs_sea_star(acl, cfg);
  }
  return {};
}

}  // namespace rebac
