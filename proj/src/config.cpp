#include "robust_smix/config.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "robust_smix/csv.hpp"
#include "robust_smix/errors.hpp"

namespace robust_smix {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_int(const KeyValue& kv, const std::string& key) {
  T out{};
  const char* b = kv.value.data();
  const char* e = b + kv.value.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) {
    throw ParseError(fmt::format("line {}: '{}' expects an integer, got '{}'", kv.line, key, kv.value), kv.line);
  }
  return out;
}

}  // namespace

std::map<std::string, KeyValue> parse_key_values(std::istream& in) {
  std::map<std::string, KeyValue> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("line {}: expected key = value", lineno), lineno);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(fmt::format("line {}: empty key", lineno), lineno);
    if (out.count(key)) throw ParseError(fmt::format("line {}: duplicate key '{}'", lineno, key), lineno);
    out[key] = KeyValue{trim(line.substr(eq + 1)), lineno};
  }
  return out;
}

double to_double(const KeyValue& kv, const std::string& key) {
  double v = 0.0;
  if (!parse_double(kv.value, v)) {
    throw ParseError(fmt::format("line {}: '{}' expects a number, got '{}'", kv.line, key, kv.value), kv.line);
  }
  return v;
}

long long to_integer(const KeyValue& kv, const std::string& key) { return parse_int<long long>(kv, key); }
unsigned long long to_unsigned(const KeyValue& kv, const std::string& key) {
  return parse_int<unsigned long long>(kv, key);
}

void PriorOverrides::apply(PriorSpec& priors) const {
  if (kappa0) priors.kappa0 = *kappa0;
  if (eta0) priors.eta0 = *eta0;
  if (gamma0) priors.gamma0 = *gamma0;
  if (p0) priors.p0 = *p0;
  if (q0) priors.q0 = *q0;
  if (s0) priors.s0 = *s0;
  if (r0) priors.r0 = *r0;
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig rc;
  for (const auto& [key, kv] : parse_key_values(in)) {
    try {
      if (key == "max_iterations") {
        rc.fit.max_iterations = static_cast<int>(to_integer(kv, key));
      } else if (key == "elbo_rel_tolerance") {
        rc.fit.elbo_rel_tolerance = to_double(kv, key);
      } else if (key == "seed") {
        rc.fit.seed = to_unsigned(kv, key);
      } else if (key == "init_method") {
        rc.fit.init_method = parse_init_method(kv.value);
      } else if (key == "marginal_mode") {
        rc.fit.marginal_mode = parse_marginal_mode(kv.value);
      } else if (key == "model_kind") {
        rc.fit.model_kind = parse_model_kind(kv.value);
      } else if (key == "min_responsibility_floor") {
        rc.fit.min_responsibility_floor = to_double(kv, key);
      } else if (key == "scatter_mode") {
        rc.fit.scatter_mode = parse_scatter_mode(kv.value);
      } else if (key == "threads") {
        rc.fit.threads = static_cast<int>(to_integer(kv, key));
      } else if (key == "kappa0") {
        rc.priors.kappa0 = to_double(kv, key);
      } else if (key == "eta0") {
        rc.priors.eta0 = to_double(kv, key);
      } else if (key == "gamma0") {
        rc.priors.gamma0 = to_double(kv, key);
      } else if (key == "p0") {
        rc.priors.p0 = to_double(kv, key);
      } else if (key == "q0") {
        rc.priors.q0 = to_double(kv, key);
      } else if (key == "s0") {
        rc.priors.s0 = to_double(kv, key);
      } else if (key == "r0") {
        rc.priors.r0 = to_double(kv, key);
      } else {
        throw ParseError(fmt::format("line {}: unknown key '{}'", kv.line, key), kv.line);
      }
    } catch (const ConfigError& e) {
      throw ParseError(fmt::format("line {}: {}", kv.line, e.what()), kv.line);
    }
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_run_config(in);
}

}  // namespace robust_smix
