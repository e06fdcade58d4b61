#pragma once

#include <cstdint>
#include <string>

namespace robust_smix::cli {

struct FitOptions {
  std::string input, config, out, trace;
  int k = 0;
};
struct PredictOptions {
  std::string model, input, out;
};
struct ImputeOptions {
  std::string model, input, out, stddev;
};
struct GenerateOptions {
  std::string spec, out, truth;
};
struct EvalOptions {
  std::string pred, truth, imputed, out;
};
struct CompareOptions {
  std::string input, truth, config, out;
  int k = 0;
  int seeds = 10;
};

int run_fit(const FitOptions& o);
int run_predict(const PredictOptions& o);
int run_impute(const ImputeOptions& o);
int run_generate(const GenerateOptions& o);
int run_eval(const EvalOptions& o);
int run_compare(const CompareOptions& o);

}  // namespace robust_smix::cli
