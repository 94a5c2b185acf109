// certree: fit, predict, count, ablate, oracle.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "certree/certree.hpp"

namespace {

constexpr int kExitCertified = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitUncertified = 3;

struct FitOptions {
  std::string data;
  std::string label;
  std::string lambda;
  std::string policy = "curiosity";
  std::string out;
  std::string trace;
  std::optional<double> time_limit;
  std::optional<std::uint64_t> max_trees;
  std::optional<std::size_t> max_cache_entries;
  bool warm_start = true;
  bool no_lookahead = false;
  bool no_support_bound = false;
  bool no_incremental_accuracy = false;
  bool no_accuracy_bound = false;
  bool no_equiv_points = false;
  bool no_permutation_cache = false;
  bool similar_support = false;
};

void add_data_flags(CLI::App* cmd, FitOptions& o) {
  cmd->add_option("--data", o.data, "binary CSV")->required();
  cmd->add_option("--label", o.label, "label column")->required();
  cmd->add_option("--lambda", o.lambda, "per-leaf penalty (decimal or p/q)")->required();
}

void add_search_flags(CLI::App* cmd, FitOptions& o) {
  cmd->add_option("--policy", o.policy, "bfs|dfs|lower_bound|objective|curiosity|entropy|gini");
  cmd->add_option("--time-limit", o.time_limit, "seconds");
  cmd->add_option("--max-trees", o.max_trees, "stop after this many evaluated trees");
  cmd->add_option("--max-cache-entries", o.max_cache_entries, "stop once the caches hold this many entries");
  cmd->add_flag("--warm-start,!--no-warm-start", o.warm_start, "seed the incumbent with a greedy tree");
  cmd->add_flag("--no-lookahead", o.no_lookahead);
  cmd->add_flag("--no-support-bound", o.no_support_bound);
  cmd->add_flag("--no-incremental-accuracy", o.no_incremental_accuracy);
  cmd->add_flag("--no-accuracy-bound", o.no_accuracy_bound);
  cmd->add_flag("--no-equiv-points", o.no_equiv_points);
  cmd->add_flag("--no-permutation-cache", o.no_permutation_cache);
  cmd->add_flag("--similar-support", o.similar_support);
}

certree::Dataset load_dataset(const std::string& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw certree::UsageError("cannot open '" + path + "'");
  return certree::load_csv(in, label);
}

certree::SearchConfig make_config(const FitOptions& o) {
  certree::SearchConfig c;
  c.lambda = certree::ExactValue::parse(o.lambda);
  c.policy = certree::parse_policy(o.policy);
  c.warm_start = o.warm_start;
  c.time_limit_s = o.time_limit;
  c.max_trees = o.max_trees;
  c.max_cache_entries = o.max_cache_entries;
  c.toggles.lookahead = !o.no_lookahead;
  c.toggles.node_support = !o.no_support_bound;
  c.toggles.incremental_accuracy = !o.no_incremental_accuracy;
  c.toggles.leaf_accuracy = !o.no_accuracy_bound;
  c.toggles.equivalent_points = !o.no_equiv_points;
  c.toggles.permutation_cache = !o.no_permutation_cache;
  c.toggles.similar_support = o.similar_support;
  c.validate();
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw certree::UsageError("cannot write '" + path + "'");
  out << text;
}

void print_summary(std::ostream& os, const certree::SearchResult& r, const certree::Model& m) {
  const auto& s = r.stats;
  os << "objective: " << r.objective.to_string() << " (" << r.objective.to_decimal(6) << ")\n"
     << "training_accuracy: " << m.training_accuracy << '\n'
     << "leaves: " << r.best_tree.size() << '\n'
     << "certified: " << (r.certified ? "true" : "false") << '\n'
     << "gap: " << r.gap.to_string() << " (" << r.gap.to_decimal(6) << ")\n";
  if (!r.certified) os << "stopped_by: " << certree::to_string(r.stop_reason) << '\n';
  os << "trees_evaluated: " << s.trees_evaluated << '\n'
     << "trees_to_optimum: " << s.trees_to_optimum << '\n'
     << "time_to_optimum_s: " << s.time_to_optimum_s << '\n'
     << "total_time_s: " << s.total_time_s << '\n'
     << "max_queue_size: " << s.max_queue_size << '\n'
     << "tree_cache_size: " << s.tree_cache_size << '\n'
     << "leaf_cache_size: " << s.leaf_cache_size << '\n';
}

int cmd_fit(const FitOptions& o) {
  const auto ds = load_dataset(o.data, o.label);
  const auto config = make_config(o);
  const auto result = certree::fit(ds, config);
  const auto model = certree::make_model(result.best_tree, ds, config.lambda, result.certified);
  const std::string json = certree::to_json(model).dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << json;
  } else {
    write_text(o.out, json);
  }
  if (!o.trace.empty()) {
    std::ostringstream t;
    certree::write_trace_csv(t, result.trace);
    write_text(o.trace, t.str());
  }
  print_summary(o.out.empty() ? std::cerr : std::cout, result, model);
  return result.certified ? kExitCertified : kExitUncertified;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& label) {
  std::ifstream in(model_path);
  if (!in) throw certree::UsageError("cannot open '" + model_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw certree::FormatError(std::string("malformed model JSON: ") + e.what());
  }
  const auto model = certree::model_from_json(j);
  const auto ds = load_dataset(data, label);
  const auto summary = certree::predict(model, ds);
  std::cout << "accuracy: " << summary.accuracy().to_decimal(6) << " (" << summary.correct << "/"
            << summary.n_samples << ")\n"
            << "mistakes: " << summary.mistakes << '\n';
  return kExitCertified;
}

int cmd_count(std::int64_t p, std::int64_t d) {
  std::cout << certree::count_trees(p, d) << '\n';
  return kExitCertified;
}

int cmd_ablate(const FitOptions& o) {
  const auto ds = load_dataset(o.data, o.label);
  const auto base = make_config(o);

  std::vector<std::pair<std::string, certree::SearchConfig>> variants;
  variants.emplace_back("all_bounds", base);
  auto ablated = [&](const std::string& name, bool certree::BoundToggles::*flag) {
    auto c = base;
    c.toggles.*flag = false;
    variants.emplace_back(name, c);
  };
  ablated("no_lookahead", &certree::BoundToggles::lookahead);
  ablated("no_support_bound", &certree::BoundToggles::node_support);
  ablated("no_incremental_accuracy", &certree::BoundToggles::incremental_accuracy);
  ablated("no_accuracy_bound", &certree::BoundToggles::leaf_accuracy);
  ablated("no_equiv_points", &certree::BoundToggles::equivalent_points);
  ablated("no_permutation_cache", &certree::BoundToggles::permutation_cache);
  for (auto p : certree::kAllPolicies) {
    auto c = base;
    c.policy = p;
    variants.emplace_back("policy_" + std::string(certree::to_string(p)), c);
  }

  std::ostringstream csv;
  csv << "variant,total_time,time_to_optimum,total_trees_evaluated,trees_to_optimum,max_queue_size\n";
  std::optional<certree::ExactValue> reference;
  bool censored = false;
  bool diverged = false;
  for (const auto& [name, config] : variants) {
    const auto r = certree::fit(ds, config);
    const auto& s = r.stats;
    csv << name << ',';
    if (r.certified) {
      csv << s.total_time_s;
      if (!reference) reference = r.objective;
      if (r.objective != *reference) {
        diverged = true;
        std::cerr << "variant " << name << " certified " << r.objective.to_string() << " but all_bounds certified "
                  << reference->to_string() << '\n';
      }
    } else {
      csv << ">limit";
      censored = true;
    }
    csv << ',' << s.time_to_optimum_s << ',' << s.trees_evaluated << ',' << s.trees_to_optimum << ','
        << s.max_queue_size << '\n';
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(o.out, csv.str());
  }
  if (reference) std::cerr << "certified objective: " << reference->to_string() << '\n';
  if (diverged) return kExitInvariant;
  return censored ? kExitUncertified : kExitCertified;
}

int cmd_oracle(const FitOptions& o, std::size_t max_features) {
  const auto ds = load_dataset(o.data, o.label);
  const auto lambda = certree::ExactValue::parse(o.lambda);
  certree::OracleLimits limits;
  limits.max_features = max_features;
  const auto r = certree::exhaustive_optimum(ds, lambda, limits);
  const auto model = certree::make_model(r.tree, ds, lambda, true);
  if (!o.out.empty()) write_text(o.out, certree::to_json(model).dump(2) + "\n");
  std::cout << "objective: " << r.objective.to_string() << " (" << r.objective.to_decimal(6) << ")\n"
            << "leaves: " << r.leaf_count << '\n'
            << "training_accuracy: " << model.training_accuracy << '\n';
  return kExitCertified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certifiably optimal sparse decision trees"};
  app.require_subcommand(1);

  FitOptions fit_opts;
  auto* fit = app.add_subcommand("fit", "search for a provably optimal tree");
  add_data_flags(fit, fit_opts);
  add_search_flags(fit, fit_opts);
  fit->add_option("--out", fit_opts.out, "model JSON path (stdout if omitted)");
  fit->add_option("--trace", fit_opts.trace, "trace CSV path");

  std::string model_path, predict_data, predict_label;
  auto* pred = app.add_subcommand("predict", "score a saved model on a CSV");
  pred->add_option("--model", model_path, "model JSON")->required();
  pred->add_option("--data", predict_data, "binary CSV")->required();
  pred->add_option("--label", predict_label, "label column")->required();

  std::int64_t count_p = 0, count_d = 0;
  auto* count = app.add_subcommand("count", "number of distinct trees up to a depth");
  count->add_option("--features", count_p, "feature count p")->required()->check(CLI::NonNegativeNumber);
  count->add_option("--depth", count_d, "maximum depth d")->required()->check(CLI::NonNegativeNumber);

  FitOptions ablate_opts;
  auto* ablate = app.add_subcommand("ablate", "one run per removed bound and per policy");
  add_data_flags(ablate, ablate_opts);
  add_search_flags(ablate, ablate_opts);
  ablate->add_option("--out", ablate_opts.out, "CSV path (stdout if omitted)");

  FitOptions oracle_opts;
  std::size_t oracle_max_features = 6;
  auto* oracle = app.add_subcommand("oracle", "exhaustive optimum for tiny datasets");
  add_data_flags(oracle, oracle_opts);
  oracle->add_option("--out", oracle_opts.out, "model JSON path");
  oracle->add_option("--max-features", oracle_max_features, "refuse larger feature counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fit) return cmd_fit(fit_opts);
    if (*pred) return cmd_predict(model_path, predict_data, predict_label);
    if (*count) return cmd_count(count_p, count_d);
    if (*ablate) return cmd_ablate(ablate_opts);
    if (*oracle) return cmd_oracle(oracle_opts, oracle_max_features);
  } catch (const certree::InvariantError& e) {
    std::cerr << "internal invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
