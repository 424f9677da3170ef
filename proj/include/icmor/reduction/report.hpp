#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "icmor/core/state_matrix.hpp"

namespace icmor {

enum class Method { BT, BT_aug, BT_BT, split_IRKA, split_ISRK, IRKA, ISRK };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::BT: return "BT";
    case Method::BT_aug: return "BT-aug";
    case Method::BT_BT: return "BT-BT";
    case Method::split_IRKA: return "split-IRKA";
    case Method::split_ISRK: return "split-ISRK";
    case Method::IRKA: return "IRKA";
    case Method::ISRK: return "ISRK";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  for (Method m : {Method::BT, Method::BT_aug, Method::BT_BT, Method::split_IRKA, Method::split_ISRK,
                   Method::IRKA, Method::ISRK})
    if (s == to_string(m)) return m;
  throw Error("reduction", "unknown reduction method '" + s + "'",
              "use one of BT, BT-aug, BT-BT, split-IRKA, split-ISRK, IRKA, ISRK");
}

struct ReductionReport {
  Method method = Method::BT;
  Index order = 0;
  Index order_controlled = 0;
  Index order_uncontrolled = 0;
  Vector hankel_values = Vector(0);               // descending (computed prefix)
  Vector uncontrolled_hankel_values = Vector(0);  // split methods: auxiliary system (A, X0, C)
  double alpha = 0.0;                             // 2 * sum of truncated Hankel values
  std::optional<double> aug_alpha;                // BT-aug
  Index iterations = 0;
  bool converged = true;
  bool stable = true;
  double constraint_residual_max = 0.0;  // ISRK: max over iterations of the W-constraint residual
  std::vector<Complex> initial_shifts;
  std::vector<Complex> final_shifts;
  std::uint64_t seed = 0;
  Index training_columns = 0;  // N0, columns of X0 when used
  std::vector<std::string> notes;
};

inline nlohmann::json to_json(const ReductionReport& r) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  auto shifts = [](const std::vector<Complex>& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : s) arr.push_back({c.real(), c.imag()});
    return arr;
  };
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["order"] = r.order;
  j["order_controlled"] = r.order_controlled;
  j["order_uncontrolled"] = r.order_uncontrolled;
  j["hankel_values"] = vec(r.hankel_values);
  j["uncontrolled_hankel_values"] = vec(r.uncontrolled_hankel_values);
  j["alpha"] = r.alpha;
  j["aug_alpha"] = r.aug_alpha ? nlohmann::json(*r.aug_alpha) : nlohmann::json(nullptr);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["stable"] = r.stable;
  j["constraint_residual_max"] = r.constraint_residual_max;
  j["initial_shifts"] = shifts(r.initial_shifts);
  j["final_shifts"] = shifts(r.final_shifts);
  j["seed"] = r.seed;
  j["training_columns"] = r.training_columns;
  j["notes"] = r.notes;
  return j;
}

}  // namespace icmor
