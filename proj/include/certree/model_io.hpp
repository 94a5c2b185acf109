#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "certree/dataset.hpp"
#include "certree/errors.hpp"
#include "certree/rational.hpp"
#include "certree/search.hpp"
#include "certree/tree.hpp"

namespace certree {

struct ModelClause {
  std::string feature;
  bool value = false;
};

struct ModelLeaf {
  std::vector<ModelClause> clauses;
  bool prediction = false;
  std::size_t n_captured = 0;
  std::size_t n_correct = 0;
};

struct Model {
  ExactValue lambda;
  ExactValue objective;
  double training_accuracy = 0.0;
  bool certified = false;
  std::vector<ModelLeaf> leaves;
};

/// Finite decimal with trailing zeros removed (up to 15 places).
inline std::string compact_decimal(const ExactValue& v, int digits = 15) {
  std::string s = v.to_decimal(digits);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

inline Model make_model(const TreeState& tree, const Dataset& ds, const ExactValue& lambda, bool certified) {
  Model m;
  m.lambda = lambda;
  m.objective = objective(tree, lambda, ds.n_samples());
  m.certified = certified;
  std::size_t correct = 0;
  for (const auto& l : tree.leaves) {
    ModelLeaf ml;
    for (const auto& c : l->clauses) ml.clauses.push_back({ds.feature_names().at(c.feature), c.polarity});
    ml.prediction = l->prediction;
    ml.n_captured = l->n_captured;
    ml.n_correct = l->n_correct;
    correct += l->n_correct;
    m.leaves.push_back(std::move(ml));
  }
  m.training_accuracy = static_cast<double>(correct) / static_cast<double>(ds.n_samples());
  return m;
}

inline nlohmann::ordered_json to_json(const Model& m) {
  nlohmann::ordered_json j;
  j["lambda"] = compact_decimal(m.lambda);
  j["objective"] = m.objective.to_string();
  j["training_accuracy"] = m.training_accuracy;
  j["certified"] = m.certified;
  j["leaves"] = nlohmann::ordered_json::array();
  for (const auto& l : m.leaves) {
    nlohmann::ordered_json jl;
    jl["clauses"] = nlohmann::ordered_json::array();
    for (const auto& c : l.clauses) jl["clauses"].push_back({{"feature", c.feature}, {"value", c.value ? 1 : 0}});
    jl["prediction"] = l.prediction ? 1 : 0;
    jl["n_captured"] = l.n_captured;
    jl["n_correct"] = l.n_correct;
    j["leaves"].push_back(std::move(jl));
  }
  return j;
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    Model m;
    m.lambda = ExactValue::parse(j.at("lambda").get<std::string>());
    m.objective = ExactValue::parse(j.at("objective").get<std::string>());
    m.training_accuracy = j.at("training_accuracy").get<double>();
    m.certified = j.at("certified").get<bool>();
    for (const auto& jl : j.at("leaves")) {
      ModelLeaf l;
      for (const auto& jc : jl.at("clauses")) {
        const int v = jc.at("value").get<int>();
        if (v != 0 && v != 1) throw FormatError("clause value must be 0 or 1");
        l.clauses.push_back({jc.at("feature").get<std::string>(), v == 1});
      }
      l.prediction = jl.at("prediction").get<int>() != 0;
      l.n_captured = jl.at("n_captured").get<std::size_t>();
      l.n_correct = jl.at("n_correct").get<std::size_t>();
      m.leaves.push_back(std::move(l));
    }
    if (m.leaves.empty()) throw FormatError("model has no leaves");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model JSON: ") + e.what());
  }
}

struct PredictionSummary {
  std::size_t n_samples = 0;
  std::size_t correct = 0;
  std::size_t mistakes = 0;
  std::vector<bool> predictions;

  ExactValue accuracy() const {
    if (n_samples == 0) return ExactValue(0);
    return ExactValue(static_cast<std::int64_t>(correct), static_cast<std::int64_t>(n_samples));
  }
};

/// Routes each sample to the unique leaf whose clauses it satisfies.
inline PredictionSummary predict(const Model& m, const Dataset& ds) {
  struct Resolved {
    std::vector<std::pair<std::size_t, bool>> literals;
    bool prediction;
  };
  std::vector<Resolved> leaves;
  for (const auto& l : m.leaves) {
    Resolved r{{}, l.prediction};
    for (const auto& c : l.clauses) {
      const auto& names = ds.feature_names();
      std::size_t idx = names.size();
      for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == c.feature) idx = j;
      }
      if (idx == names.size()) throw FormatError("data has no column for model feature '" + c.feature + "'");
      r.literals.emplace_back(idx, c.value);
    }
    leaves.push_back(std::move(r));
  }
  PredictionSummary out;
  out.n_samples = ds.n_samples();
  out.predictions.reserve(ds.n_samples());
  for (std::size_t s = 0; s < ds.n_samples(); ++s) {
    const Resolved* hit = nullptr;
    for (const auto& r : leaves) {
      bool ok = true;
      for (const auto& [f, v] : r.literals) {
        if (ds.value(s, f) != v) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      if (hit) throw InvariantError("sample " + std::to_string(s) + " matches more than one leaf");
      hit = &r;
    }
    if (!hit) throw InvariantError("sample " + std::to_string(s) + " matches no leaf");
    out.predictions.push_back(hit->prediction);
    if (hit->prediction == ds.label(s)) {
      ++out.correct;
    } else {
      ++out.mistakes;
    }
  }
  return out;
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "elapsed_s,trees_evaluated,best_objective,min_queue_lower_bound,queue_size,log10_remaining_bound\n";
  for (const auto& r : trace) {
    out << r.elapsed_s << ',' << r.trees_evaluated << ',' << r.best_objective.to_decimal(9) << ',';
    if (r.min_queue_lower_bound) out << r.min_queue_lower_bound->to_decimal(9);
    out << ',' << r.queue_size << ',';
    if (r.log10_remaining) out << *r.log10_remaining;
    out << '\n';
  }
}

}  // namespace certree
