#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "nastab/certify.hpp"
#include "nastab/stability.hpp"

namespace nastab {

inline constexpr const char* kToolVersion = "0.3.0";

/// Everything needed to reproduce a report.
struct RunManifest {
  std::string command;
  std::string source;  // config path or `builtin:<name>`
  nlohmann::json knobs = nlohmann::json::object();
  double duration_s = 0.0;
};

nlohmann::json to_json(const RunManifest& m);
nlohmann::json to_json(const Witness& w);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const BudgetResult& r);
nlohmann::json to_json(const DefinitenessEstimate& e);
nlohmann::json to_json(const DwellResult& r);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const SettlingTable& t);
nlohmann::json to_json(const Example17Result& r);

/// One-paragraph human summary; names the violated inequality on failure.
void print_verdict(const Verdict& v, std::ostream& out);

/// `epsilon,t0,delta` rows.
void write_delta_csv(const StabilityReport& r, std::ostream& out);
/// `eta,c,t0,T` rows; T is `nan` when not attained.
void write_settling_csv(const SettlingTable& t, std::ostream& out);
/// Gnuplot blocks: one per t0 (`epsilon delta`), then the uniform curve.
void write_delta_plot(const StabilityReport& r, std::ostream& out);

}  // namespace nastab
