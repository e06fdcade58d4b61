#include "commands.hpp"

#include <iostream>

#include <fmt/format.h>

#include "robust_smix/baseline.hpp"
#include "robust_smix/config.hpp"
#include "robust_smix/csv.hpp"
#include "robust_smix/elbo.hpp"
#include "robust_smix/engine.hpp"
#include "robust_smix/errors.hpp"
#include "robust_smix/evaluate.hpp"
#include "robust_smix/persistence.hpp"
#include "robust_smix/synthetic.hpp"

namespace robust_smix::cli {
namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

const std::vector<std::string> kReportHeader = {"seed", "method", "ari", "accuracy", "imputation_rmse",
                                                "outlier_auroc"};

std::vector<std::string> report_row(const std::string& seed, const std::string& method, const EvalReport& r) {
  return {seed, method, format_double(r.ari), format_double(r.accuracy), opt(r.imputation_rmse),
          opt(r.outlier_auroc)};
}

RunConfig read_config(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

PriorSpec priors_for(const MaskedDataset& data, int k, const RunConfig& rc) {
  PriorSpec p = default_priors(data, k);
  rc.priors.apply(p);
  return p;
}

void report_diagnostics(const FitResult& r) {
  for (const auto& d : r.diagnostics) std::cerr << fmt::format("[{}] iteration {}: {}\n", d.kind, d.iteration, d.message);
}

Matrix completed_from(const MaskedDataset& imputed) {
  if (imputed.has_missing()) throw ConfigError("imputed file still has missing cells");
  return imputed.values();
}

}  // namespace

int run_fit(const FitOptions& o) {
  const MaskedDataset data = load_csv(o.input);
  const RunConfig rc = read_config(o.config);
  const FitResult r = fit(data, priors_for(data, o.k, rc), rc.fit);
  save_model(o.out, r);
  if (!o.trace.empty()) write_trace_csv(o.trace, r.elbo_trace);
  report_diagnostics(r);
  std::cout << fmt::format("iterations={} converged={} elbo={:.17g}\n", r.elbo_trace.size(), r.converged,
                           r.elbo_trace.back().elbo);
  return 0;
}

int run_predict(const PredictOptions& o) {
  const FitResult model = load_model(o.model);
  const MaskedDataset data = load_csv(o.input);
  const PredictionResult p = predict(model, data);
  Table t;
  t.header = {"label", "outlier_score"};
  for (Eigen::Index k = 0; k < p.responsibilities.cols(); ++k) t.header.push_back(fmt::format("r_{}", k));
  for (Eigen::Index j = 0; j < data.rows(); ++j) {
    std::vector<std::string> row{std::to_string(p.labels[static_cast<std::size_t>(j)]),
                                 format_double(p.outlier_score(j))};
    for (Eigen::Index k = 0; k < p.responsibilities.cols(); ++k) row.push_back(format_double(p.responsibilities(j, k)));
    t.rows.push_back(std::move(row));
  }
  write_table(o.out, t);
  return 0;
}

int run_impute(const ImputeOptions& o) {
  const FitResult model = load_model(o.model);
  const MaskedDataset data = load_csv(o.input);
  const ImputationResult r = impute(model, data);
  save_csv(o.out, MaskedDataset::fully_observed(r.completed, data.names()));
  if (!o.stddev.empty()) {
    Table t;
    t.header = data.names();
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
      std::vector<std::string> row;
      for (Eigen::Index c = 0; c < data.dim(); ++c) {
        row.push_back(std::isinf(r.stddev(j, c)) ? "inf" : format_double(r.stddev(j, c)));
      }
      t.rows.push_back(std::move(row));
    }
    write_table(o.stddev, t);
  }
  for (const auto& d : r.diagnostics) std::cerr << fmt::format("[{}] {}\n", d.kind, d.message);
  return 0;
}

int run_generate(const GenerateOptions& o) {
  const SyntheticData s = generate(load_synthetic_spec(o.spec));
  save_csv(o.out, s.data);
  if (!o.truth.empty()) save_truth(o.truth, s);
  return 0;
}

int run_eval(const EvalOptions& o) {
  const Table pred = read_table(o.pred);
  const Truth truth = load_truth(o.truth);
  const std::size_t lc = pred.column("label");
  std::optional<std::size_t> sc;
  for (std::size_t i = 0; i < pred.header.size(); ++i) {
    if (pred.header[i] == "outlier_score") sc = i;
  }
  std::vector<int> labels;
  std::vector<double> scores;
  for (std::size_t i = 0; i < pred.rows.size(); ++i) {
    double v = 0.0;
    if (!parse_double(pred.rows[i][lc], v)) throw ParseError(fmt::format("{} line {}: bad label", o.pred, i + 2), i + 2);
    labels.push_back(static_cast<int>(v));
    if (sc) {
      if (!parse_double(pred.rows[i][*sc], v)) {
        throw ParseError(fmt::format("{} line {}: bad outlier_score", o.pred, i + 2), i + 2);
      }
      scores.push_back(v);
    }
  }
  std::optional<Matrix> imputed;
  if (!o.imputed.empty()) imputed = completed_from(load_csv(o.imputed));
  const EvalReport r = evaluate(labels, truth.labels, imputed ? &*imputed : nullptr, &truth.values, &truth.missing,
                                sc ? &scores : nullptr);
  for (const auto& n : r.notes) std::cerr << n << '\n';
  Table t;
  t.header = kReportHeader;
  t.rows.push_back(report_row("", "model", r));
  write_table(o.out, t);
  return 0;
}

int run_compare(const CompareOptions& o) {
  const MaskedDataset data = load_csv(o.input);
  const Truth truth = load_truth(o.truth);
  if (static_cast<Eigen::Index>(truth.labels.size()) != data.rows()) {
    throw ConfigError("truth and data row counts differ");
  }
  const RunConfig rc = read_config(o.config);
  const PriorSpec priors = priors_for(data, o.k, rc);
  const Matrix mean_fill = mean_imputed(data);

  Table t;
  t.header = kReportHeader;
  for (int s = 0; s < o.seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    for (const ModelKind kind : {ModelKind::student, ModelKind::gaussian}) {
      FitConfig cfg = rc.fit;
      cfg.seed = seed;
      cfg.model_kind = kind;
      const FitResult r = fit(data, priors, cfg);
      const PredictionResult p = predict(r, data);
      const ImputationResult imp = impute(r, data);
      std::vector<double> scores(p.outlier_score.data(), p.outlier_score.data() + p.outlier_score.size());
      const bool student = kind == ModelKind::student;
      const EvalReport rep = evaluate(p.labels, truth.labels, &imp.completed, &truth.values, &truth.missing,
                                      student ? &scores : nullptr);
      t.rows.push_back(report_row(std::to_string(s), student ? "student_vb" : "gaussian_vb", rep));
    }
    const GmmEmResult g = gmm_em_baseline(data, o.k, seed, 200, true);
    const EvalReport rep = evaluate(g.labels, truth.labels, &mean_fill, &truth.values, &truth.missing);
    t.rows.push_back(report_row(std::to_string(s), "gmm_em", rep));
  }
  write_table(o.out, t);
  return 0;
}

}  // namespace robust_smix::cli
