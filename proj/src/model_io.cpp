#include "countmass/model_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace countmass {

namespace {

using nlohmann::json;

double number_field(const json& j, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_number()) throw DataError(std::string("model spec: field \"") + name + "\" must be a number");
  return v.get<double>();
}

std::vector<double> vector_field(const json& j, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_array() || v.empty())
    throw DataError(std::string("model spec: field \"") + name + "\" must be a nonempty array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw DataError(std::string("model spec: field \"") + name + "\" must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Matrix matrix_field(const json& j, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_array() || v.empty())
    throw DataError(std::string("model spec: field \"") + name + "\" must be a nonempty array of rows");
  Matrix out;
  out.reserve(v.size());
  for (const auto& row : v) {
    if (!row.is_array() || row.empty())
      throw DataError(std::string("model spec: field \"") + name + "\" rows must be nonempty arrays");
    std::vector<double> r;
    r.reserve(row.size());
    for (const auto& e : row) {
      if (!e.is_number()) throw DataError(std::string("model spec: field \"") + name + "\" must hold numbers");
      r.push_back(e.get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void require_fields(const json& j, const std::string& kind, const std::set<std::string>& allowed,
                    const std::set<std::string>& required) {
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end())
      throw DataError("model spec: unknown field \"" + item.key() + "\" for kind \"" + kind + "\"");
  }
  for (const auto& name : required) {
    if (!j.contains(name))
      throw DataError("model spec: kind \"" + kind + "\" requires field \"" + name + "\"");
  }
}

std::optional<MixingRate> rate_fields(const json& j) {
  const bool has_mu = j.contains("mu");
  const bool has_rho = j.contains("rho");
  if (has_mu != has_rho)
    throw DataError(std::string("model spec: field \"") + (has_mu ? "mu" : "rho") +
                    "\" requires its partner (\"mu\" and \"rho\" come as a pair)");
  if (!has_mu) return std::nullopt;
  return MixingRate{number_field(j, "mu"), number_field(j, "rho")};
}

// A user-supplied stationary law for a chain is cross-checked (pi P = pi to
// 1e-10 and a valid distribution); the solved law is what the model carries,
// so outputs do not depend on whether the field was present.
void check_supplied_stationary(const std::vector<double>& pi, const Matrix& transition) {
  const std::size_t m = transition.size();
  if (pi.size() != m) throw DataError("model spec: field \"pi\" must match the row count of \"P\"");
  double total = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0)) throw DataError("model spec: field \"pi\" must be nonnegative");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-10) throw DataError("model spec: field \"pi\" must sum to 1");
  for (std::size_t col = 0; col < m; ++col) {
    if (transition[0].size() != m) break;  // shape errors surface in the factory
    double image = 0.0;
    for (std::size_t row = 0; row < m; ++row) image += pi[row] * transition[row][col];
    if (std::fabs(image - pi[col]) > 1e-10)
      throw DataError("model spec: field \"pi\" is not stationary for \"P\"");
  }
}

void append_number(std::string& out, double value) { out += format_sig17(value); }

void append_vector(std::string& out, const std::vector<double>& values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ',';
    append_number(out, values[i]);
  }
  out += ']';
}

}  // namespace

ProcessModel parse_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("model spec: top level must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw DataError("model spec: field \"kind\" (string) is required");
  const std::string kind = j.at("kind").get<std::string>();

  try {
    if (kind == "iid") {
      require_fields(j, kind, {"kind", "pi", "mu", "rho"}, {"pi"});
      return ProcessModel::iid(vector_field(j, "pi"), rate_fields(j));
    }
    if (kind == "markov") {
      require_fields(j, kind, {"kind", "P", "pi", "mu", "rho"}, {"P"});
      Matrix transition = matrix_field(j, "P");
      if (j.contains("pi")) check_supplied_stationary(vector_field(j, "pi"), transition);
      return ProcessModel::markov(std::move(transition), rate_fields(j));
    }
    if (kind == "hmm") {
      require_fields(j, kind, {"kind", "P", "emission", "mu", "rho"}, {"P", "emission"});
      return ProcessModel::hmm(matrix_field(j, "P"), matrix_field(j, "emission"), rate_fields(j));
    }
    if (kind == "duplication") {
      require_fields(j, kind, {"kind", "pi", "k", "alpha", "mu", "rho"}, {"pi", "k", "alpha"});
      const auto& kv = j.at("k");
      if (!kv.is_number_integer() || kv.get<std::int64_t>() < 1)
        throw DataError("model spec: field \"k\" must be an integer >= 1");
      return ProcessModel::duplication(vector_field(j, "pi"),
                                       static_cast<std::uint32_t>(kv.get<std::int64_t>()),
                                       number_field(j, "alpha"), rate_fields(j));
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model spec: ") + e.what());
  }
  throw DataError("model spec: field \"kind\" must be one of iid|markov|hmm|duplication");
}

ProcessModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_json(buf.str());
}

std::vector<std::string> read_token_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open token file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return tokens;
}

std::string format_sig17(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string estimate_json(const HybridResult& result, std::uint64_t n, std::uint64_t tau,
                          std::uint64_t zeta_bar) {
  std::string out = "{\"n\":" + std::to_string(n);
  out += ",\"tau\":" + std::to_string(tau);
  out += ",\"zeta_bar\":" + std::to_string(zeta_bar);
  out += ",\"nu\":";
  append_number(out, result.nu);
  out += ",\"mass\":";
  append_vector(out, result.mass.mass);
  out += ",\"fallback\":";
  out += result.fallback ? "true" : "false";
  out += "}\n";
  return out;
}

std::string risk_csv_header() { return "n,tau,zeta_bar,reps,tv_mean,tv_se,l1_mean,theory_rate\n"; }

std::string risk_csv_row(const RiskReport& report) {
  std::string out = std::to_string(report.n);
  out += ',' + std::to_string(report.tau);
  out += ',' + std::to_string(report.zeta_bar);
  out += ',' + std::to_string(report.reps);
  out += ',';
  append_number(out, report.tv_mean);
  out += ',';
  append_number(out, report.tv_se);
  out += ',';
  append_number(out, report.l1_mean);
  out += ',';
  append_number(out, report.theory_rate);
  out += '\n';
  return out;
}

std::string risk_json(const RiskReport& report) {
  std::string out = "{\"n\":" + std::to_string(report.n);
  out += ",\"tau\":" + std::to_string(report.tau);
  out += ",\"zeta_bar\":" + std::to_string(report.zeta_bar);
  out += ",\"reps\":" + std::to_string(report.reps);
  out += ",\"tv_mean\":";
  append_number(out, report.tv_mean);
  out += ",\"tv_se\":";
  append_number(out, report.tv_se);
  out += ",\"l1_mean\":";
  append_number(out, report.l1_mean);
  out += ",\"theory_rate\":";
  append_number(out, report.theory_rate);
  if (!report.per_zeta_mae.empty()) {
    out += ",\"per_zeta_mae\":";
    append_vector(out, report.per_zeta_mae);
  }
  out += "}\n";
  return out;
}

std::string coverage_json(const CoverageReport& report) {
  std::string out = "{\"lemma\":\"";
  out += report.bound == CoverageBound::bernstein ? "2a" : "2b";
  out += "\",\"nominal\":";
  append_number(out, report.nominal);
  out += ",\"observed\":";
  append_number(out, report.observed);
  out += ",\"reps\":" + std::to_string(report.reps);
  out += ",\"gate_failures\":" + std::to_string(report.gate_failures);
  out += "}\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << content;
  if (!out) throw DataError("failed writing output file: " + path);
}

}  // namespace countmass
