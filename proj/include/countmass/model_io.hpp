#pragma once

// File formats: JSON model specs in, token files in/out, reports out. All
// numeric output is printed with 17 significant digits so identical runs are
// byte-identical and golden files are exact.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "countmass/concentration.hpp"
#include "countmass/estimators.hpp"
#include "countmass/evaluation.hpp"
#include "countmass/processes.hpp"

namespace countmass {

// Bad input data: unreadable files, malformed or inconsistent model specs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model spec: {"kind":"iid|markov|hmm|duplication", "pi":[...], "P":[[...]],
// "emission":[[...]], "k":..., "alpha":..., "mu":..., "rho":...}. Fields not
// belonging to the kind, or unknown ones, are rejected by name. "mu"/"rho"
// come as a pair and attach a geometric dependence envelope to any kind.
ProcessModel parse_model_json(const std::string& text);
ProcessModel load_model_file(const std::string& path);

std::vector<std::string> read_token_lines(const std::string& path);  // skips empty lines

std::string format_sig17(double value);

std::string estimate_json(const HybridResult& result, std::uint64_t n, std::uint64_t tau,
                          std::uint64_t zeta_bar);

std::string risk_csv_header();
std::string risk_csv_row(const RiskReport& report);
std::string risk_json(const RiskReport& report);

std::string coverage_json(const CoverageReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace countmass
