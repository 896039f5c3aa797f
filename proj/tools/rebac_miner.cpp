#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rebac/rebac.hpp"

namespace fs = std::filesystem;
using namespace rebac;

namespace {

constexpr int kExitError = 1;
constexpr int kExitInconsistent = 2;

struct ModelFiles {
  std::string bundle;
  std::string class_model;
  std::string object_model;

  void add(CLI::App* cmd) {
    cmd->add_option("--bundle", bundle, "Directory holding class_model.json, object_model.json, ...");
    cmd->add_option("--class-model", class_model, "Class model file (overrides --bundle)");
    cmd->add_option("--object-model", object_model, "Object model file (overrides --bundle)");
  }

  fs::path file(const std::string& explicit_path, const std::string& stem) const {
    if (!explicit_path.empty()) return explicit_path;
    if (bundle.empty()) throw IoError("no " + stem + " file given and no --bundle directory");
    return fs::path(bundle) / (stem + ".json");
  }

  LoadedModels load() const { return load_models(file(class_model, "class_model"), file(object_model, "object_model")); }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") std::cout << text;
  else write_file_atomic(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relationship-based access control policy miner"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration (unknown keys are rejected)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Global seed for all random streams");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic class model, object model, rules and ACL");
  std::optional<int> n_sub, n_r, n_actions;
  std::string out_dir, freq_path;
  gen->add_option("--n-sub", n_sub, "Instances per subject class");
  gen->add_option("--n-r", n_r, "Number of rules");
  gen->add_option("--n-actions", n_actions, "Size of the action alphabet");
  gen->add_option("--type-frequencies", freq_path, "JSON file of condition/constraint type weights")
      ->check(CLI::ExistingFile);
  gen->add_option("--out-dir", out_dir, "Output directory")->required();

  // mine
  auto* mine_cmd = app.add_subcommand("mine", "Mine a ReBAC policy from an ACL");
  ModelFiles mine_models;
  mine_models.add(mine_cmd);
  std::string acl_path, rules_out, report_out, algorithm;
  std::optional<double> fu;
  std::optional<int> threads;
  bool timing = false;
  mine_cmd->add_option("--acl", acl_path, "ACL file (overrides --bundle)");
  mine_cmd->add_option("--algorithm", algorithm, "sea, fs-sea1 or fs-sea-star")
      ->check(CLI::IsMember({"sea", "fs-sea1", "fs-sea-star"}));
  mine_cmd->add_option("--fu", fu, "Fraction of features kept as useful")->check(CLI::Range(0.0, 1.0));
  mine_cmd->add_option("--threads", threads, "Worker threads (default: REBAC_MINER_THREADS or all cores)");
  mine_cmd->add_option("--out", rules_out, "Mined rules file")->required();
  mine_cmd->add_option("--report", report_out, "Mining report file");
  mine_cmd->add_flag("--timing", timing, "Include elapsed time in the report");

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare mined rules with input rules");
  ModelFiles cmp_models;
  cmp_models.add(cmp);
  std::string mined_path, input_path, cmp_out;
  cmp->add_option("--mined", mined_path, "Mined rules file")->required();
  cmp->add_option("--input", input_path, "Input rules file (default: rules.json in --bundle)");
  cmp->add_option("--out", cmp_out, "Similarity report file (default: stdout)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Decide one request against a rules file");
  ModelFiles ev_models;
  ev_models.add(ev);
  std::string ev_rules, subject, resource, action;
  ev->add_option("--rules", ev_rules, "Rules file (default: rules.json in --bundle)");
  ev->add_option("--subject", subject, "Subject object id")->required();
  ev->add_option("--resource", resource, "Resource object id")->required();
  ev->add_option("--action", action, "Action")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_config(read_json_file(config_path), cfg);
    if (seed) {
      cfg.seed = *seed;
      cfg.miner.seed = *seed;
      cfg.synth.seed = *seed;
    }

    if (*gen) {
      if (n_sub) cfg.synth.n_sub = *n_sub;
      if (n_r) cfg.synth.n_r = *n_r;
      if (n_actions) cfg.synth.n_actions = *n_actions;
      if (!freq_path.empty()) cfg.synth.type_frequencies = load_type_frequencies(freq_path);
      try {
        cfg.synth.validate();
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
      }
      const auto b = generate_bundle(cfg.synth);
      write_bundle(out_dir, b);
      std::cout << "objects: " << b.object_model->size() << "\n"
                << "rules: " << b.rules.size() << "\n"
                << "authorizations: " << b.acl.authorizations.size() << "\n"
                << "wsc: " << wsc(b.rules) << "\n";
      return 0;
    }

    if (*mine_cmd) {
      if (!algorithm.empty()) cfg.miner.algorithm = *parse_algorithm(algorithm);
      if (fu) cfg.miner.fu = *fu;
      if (threads) cfg.miner.threads = *threads;
      const auto models = mine_models.load();
      const auto acl = load_acl(mine_models.file(acl_path, "acl"), models.object_model);
      const auto report = mine(acl, cfg.miner);
      write_file_atomic(rules_out, dump(rules_to_json(report.policy.rules)));
      if (!report_out.empty()) write_file_atomic(report_out, dump(to_json(report, timing)));
      std::cout << "algorithm: " << to_string(report.algorithm) << "\n"
                << "rules: " << report.policy.rules.size() << "\n"
                << "wsc: " << wsc(report.policy.rules) << "\n"
                << "consistent: " << (report.consistent ? "true" : "false") << "\n";
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      if (!report.consistent) {
        std::cerr << "error: mined policy is inconsistent with the ACL: " << report.consistency_reason << "\n";
        return kExitInconsistent;
      }
      return 0;
    }

    if (*cmp) {
      const auto models = cmp_models.load();
      const auto& om = *models.object_model;
      const auto mined = load_rules(mined_path, om);
      const auto input = load_rules(cmp_models.file(input_path, "rules"), om);
      emit(cmp_out, dump(to_json(compare_policies(om, mined, input))));
      return 0;
    }

    if (*ev) {
      const auto models = ev_models.load();
      const auto& om = *models.object_model;
      const auto rules = load_rules(ev_models.file(ev_rules, "rules"), om);
      const auto s = om.find(subject);
      const auto r = om.find(resource);
      if (!s) throw IoError("unknown subject '" + subject + "'");
      if (!r) throw IoError("unknown resource '" + resource + "'");
      const bool ok = permits(om, rules, *s, *r, action);
      std::cout << (ok ? "permit" : "deny") << "\n";
      for (const auto& rule : rules)
        if (CompiledRule(om, rule).permits(om, *s, *r, action)) std::cout << "  by " << to_string(rule) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
