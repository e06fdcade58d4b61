#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "robust_smix/errors.hpp"

namespace cli = robust_smix::cli;

int main(int argc, char** argv) {
  CLI::App app{"Robust variational Student-t mixture: fit, predict, impute, generate, eval, compare"};
  app.require_subcommand(1);

  cli::FitOptions fit;
  auto* f = app.add_subcommand("fit", "fit a model to a CSV dataset");
  f->add_option("--input", fit.input, "data CSV")->required();
  f->add_option("--k", fit.k, "number of clusters")->required()->check(CLI::PositiveNumber);
  f->add_option("--config", fit.config, "key/value config file");
  f->add_option("--out", fit.out, "model output (JSON)")->required();
  f->add_option("--trace", fit.trace, "bound trace CSV");

  cli::PredictOptions pred;
  auto* p = app.add_subcommand("predict", "cluster labels, responsibilities and outlier scores");
  p->add_option("--model", pred.model)->required();
  p->add_option("--input", pred.input)->required();
  p->add_option("--out", pred.out)->required();

  cli::ImputeOptions imp;
  auto* i = app.add_subcommand("impute", "fill missing cells with posterior means");
  i->add_option("--model", imp.model)->required();
  i->add_option("--input", imp.input)->required();
  i->add_option("--out", imp.out)->required();
  i->add_option("--stddev", imp.stddev, "per-cell posterior standard deviations CSV");

  cli::GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "synthetic benchmark data");
  g->add_option("--spec", gen.spec, "key/value synthetic spec")->required();
  g->add_option("--out", gen.out)->required();
  g->add_option("--truth", gen.truth);

  cli::EvalOptions ev;
  auto* e = app.add_subcommand("eval", "score predictions against ground truth");
  e->add_option("--pred", ev.pred)->required();
  e->add_option("--truth", ev.truth)->required();
  e->add_option("--imputed", ev.imputed);
  e->add_option("--out", ev.out)->required();

  cli::CompareOptions cmp;
  auto* c = app.add_subcommand("compare", "student VB vs gaussian VB vs GMM-EM over several seeds");
  c->add_option("--input", cmp.input)->required();
  c->add_option("--truth", cmp.truth)->required();
  c->add_option("--k", cmp.k)->required()->check(CLI::PositiveNumber);
  c->add_option("--seeds", cmp.seeds)->check(CLI::PositiveNumber);
  c->add_option("--config", cmp.config);
  c->add_option("--out", cmp.out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*f) return cli::run_fit(fit);
    if (*p) return cli::run_predict(pred);
    if (*i) return cli::run_impute(imp);
    if (*g) return cli::run_generate(gen);
    if (*e) return cli::run_eval(ev);
    if (*c) return cli::run_compare(cmp);
  } catch (const robust_smix::ParseError& ex) {
    std::cerr << "parse error: " << ex.what() << '\n';
    return 2;
  } catch (const robust_smix::ConfigError& ex) {
    std::cerr << "configuration error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
