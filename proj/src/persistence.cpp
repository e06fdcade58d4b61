#include "robust_smix/persistence.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "robust_smix/errors.hpp"

namespace robust_smix {
namespace {

using nlohmann::json;

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

Vector json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix json_mat(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index m = n ? static_cast<Eigen::Index>(rows.front().size()) : 0;
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != m) {
      throw ParseError("model: ragged matrix", 0);
    }
    for (Eigen::Index c = 0; c < m; ++c) out(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  }
  return out;
}

}  // namespace

std::string serialize_model(const FitResult& model) {
  json doc;
  doc["format"] = "robust-smix-model";
  doc["version"] = 1;

  const PriorSpec& p = model.priors;
  doc["priors"] = {{"K", p.K},          {"kappa0", p.kappa0}, {"eta0", p.eta0}, {"mu0", vec_json(p.mu0)},
                   {"gamma0", p.gamma0}, {"Sigma0", mat_json(p.Sigma0)},        {"p0", p.p0},
                   {"q0", p.q0},         {"s0", p.s0},         {"r0", p.r0}};

  const FitConfig& c = model.config;
  doc["config"] = {{"max_iterations", c.max_iterations},
                   {"elbo_rel_tolerance", c.elbo_rel_tolerance},
                   {"seed", c.seed},
                   {"init_method", to_string(c.init_method)},
                   {"marginal_mode", to_string(c.marginal_mode)},
                   {"model_kind", to_string(c.model_kind)},
                   {"min_responsibility_floor", c.min_responsibility_floor},
                   {"scatter_mode", to_string(c.scatter_mode)},
                   {"threads", c.threads}};

  json clusters = json::array();
  for (const auto& k : model.clusters) {
    clusters.push_back({{"kappa", k.kappa},
                        {"eta", k.eta},
                        {"mu", vec_json(k.mu)},
                        {"gamma", k.gamma},
                        {"Sigma", mat_json(k.Sigma.matrix())},
                        {"log_p", k.log_p},
                        {"q", k.q},
                        {"s", k.s},
                        {"r", k.r},
                        {"e_log_weight", k.e_log_weight},
                        {"e_logdet_cov", k.e_logdet_cov},
                        {"e_alpha", k.e_alpha},
                        {"e_log_gamma_alpha", k.e_log_gamma_alpha},
                        {"e_psi", k.e_psi},
                        {"e_beta", k.e_beta},
                        {"e_log_beta", k.e_log_beta},
                        {"log_normalizer", k.log_normalizer},
                        {"active", k.active}});
  }
  doc["clusters"] = clusters;

  json trace = json::array();
  for (const auto& t : model.elbo_trace) trace.push_back({{"iteration", t.iteration}, {"elbo", t.elbo}});
  doc["elbo_trace"] = trace;
  doc["converged"] = model.converged;
  json diags = json::array();
  for (const auto& d : model.diagnostics) {
    diags.push_back({{"kind", d.kind}, {"iteration", d.iteration}, {"message", d.message}});
  }
  doc["diagnostics"] = diags;
  return doc.dump(2) + "\n";
}

FitResult deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what(), 0);
  }
  try {
    if (doc.value("format", "") != "robust-smix-model") throw ParseError("model: unrecognized format", 0);
    FitResult m;
    const json& p = doc.at("priors");
    m.priors.K = p.at("K").get<int>();
    m.priors.kappa0 = p.at("kappa0").get<double>();
    m.priors.eta0 = p.at("eta0").get<double>();
    m.priors.mu0 = json_vec(p.at("mu0"));
    m.priors.gamma0 = p.at("gamma0").get<double>();
    m.priors.Sigma0 = json_mat(p.at("Sigma0"));
    m.priors.p0 = p.at("p0").get<double>();
    m.priors.q0 = p.at("q0").get<double>();
    m.priors.s0 = p.at("s0").get<double>();
    m.priors.r0 = p.at("r0").get<double>();

    const json& c = doc.at("config");
    m.config.max_iterations = c.at("max_iterations").get<int>();
    m.config.elbo_rel_tolerance = c.at("elbo_rel_tolerance").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.init_method = parse_init_method(c.at("init_method").get<std::string>());
    m.config.marginal_mode = parse_marginal_mode(c.at("marginal_mode").get<std::string>());
    m.config.model_kind = parse_model_kind(c.at("model_kind").get<std::string>());
    m.config.min_responsibility_floor = c.at("min_responsibility_floor").get<double>();
    m.config.scatter_mode = parse_scatter_mode(c.at("scatter_mode").get<std::string>());
    m.config.threads = c.at("threads").get<int>();

    for (const json& k : doc.at("clusters")) {
      ClusterPosterior cp;
      cp.kappa = k.at("kappa").get<double>();
      cp.eta = k.at("eta").get<double>();
      cp.mu = json_vec(k.at("mu"));
      cp.gamma = k.at("gamma").get<double>();
      cp.Sigma = SpdMatrix::from(json_mat(k.at("Sigma")));
      cp.log_p = k.at("log_p").get<double>();
      cp.q = k.at("q").get<double>();
      cp.s = k.at("s").get<double>();
      cp.r = k.at("r").get<double>();
      cp.e_log_weight = k.at("e_log_weight").get<double>();
      cp.e_logdet_cov = k.at("e_logdet_cov").get<double>();
      cp.e_alpha = k.at("e_alpha").get<double>();
      cp.e_log_gamma_alpha = k.at("e_log_gamma_alpha").get<double>();
      cp.e_psi = k.at("e_psi").get<double>();
      cp.e_beta = k.at("e_beta").get<double>();
      cp.e_log_beta = k.at("e_log_beta").get<double>();
      cp.log_normalizer = k.at("log_normalizer").get<double>();
      cp.active = k.at("active").get<bool>();
      m.clusters.push_back(std::move(cp));
    }
    if (static_cast<int>(m.clusters.size()) != m.priors.K) throw ParseError("model: cluster count differs from K", 0);
    for (const json& t : doc.at("elbo_trace")) {
      m.elbo_trace.push_back({t.at("iteration").get<int>(), t.at("elbo").get<double>()});
    }
    m.converged = doc.at("converged").get<bool>();
    for (const json& d : doc.at("diagnostics")) {
      m.diagnostics.push_back(
          {d.at("kind").get<std::string>(), d.at("iteration").get<int>(), d.at("message").get<std::string>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what(), 0);
  }
}

void save_model(const std::string& path, const FitResult& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << serialize_model(model);
  if (!out) throw std::runtime_error("write failed: " + path);
}

FitResult load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace robust_smix
