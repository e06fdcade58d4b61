#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>

#include "robust_smix/model.hpp"

namespace robust_smix {

/// One `key = value` entry and the line it came from.
struct KeyValue {
  std::string value;
  std::size_t line = 0;
};

/// Flat key/value text: one `key = value` per line, `#` starts a comment,
/// blank lines ignored. Duplicate keys and lines without '=' are ParseErrors.
std::map<std::string, KeyValue> parse_key_values(std::istream& in);

/// Prior fields that a config file may override; the rest come from
/// default_priors.
struct PriorOverrides {
  std::optional<double> kappa0, eta0, gamma0, p0, q0, s0, r0;

  void apply(PriorSpec& priors) const;
};

struct RunConfig {
  FitConfig fit;
  PriorOverrides priors;
};

/// Keys: max_iterations, elbo_rel_tolerance, seed, init_method, marginal_mode,
/// model_kind, min_responsibility_floor, scatter_mode, threads, kappa0, eta0,
/// gamma0, p0, q0, s0, r0. Unknown keys are rejected.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

double to_double(const KeyValue& kv, const std::string& key);
long long to_integer(const KeyValue& kv, const std::string& key);
unsigned long long to_unsigned(const KeyValue& kv, const std::string& key);

}  // namespace robust_smix
