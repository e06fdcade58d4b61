#pragma once

#include <string>

#include "robust_smix/model.hpp"

namespace robust_smix {

/// JSON document with priors, config, every cluster field (cached
/// expectations included), the bound trace, convergence flag and
/// diagnostics. The latent posterior is not stored; predict recomputes it.
std::string serialize_model(const FitResult& model);
FitResult deserialize_model(const std::string& text);

void save_model(const std::string& path, const FitResult& model);
FitResult load_model(const std::string& path);

}  // namespace robust_smix
