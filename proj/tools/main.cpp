// Command-line front end. Subcommands wrap the library one-to-one:
//   estimate    sample-based KSD from a CSV file
//   oracle      closed-form or quadrature reference value
//   rate-sweep  Monte Carlo error curve over a grid of sample sizes
//   lecam       two-point lower bound summary at one sample size
//   finite      perturbation lower bound table on a finite-domain model
// JSON goes to stdout; CSV goes to --out (or stdout with --out -).

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ksd/ksd.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSpecVersion = "1.0";

struct usage_error : ksd::error {
  using ksd::error::error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// "1.5" puts the shift on the first axis; "a,b,..." lists all d entries.
Eigen::VectorXd parse_mu(const std::string& spec, int dim) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
  if (spec.find(',') == std::string::npos) {
    mu[0] = ksd::detail::parse_double_token(spec, "--mu");
    return mu;
  }
  const std::vector<std::string> parts = split(spec, ',');
  if (static_cast<int>(parts.size()) != dim)
    throw ksd::input_error("--mu: expected " + std::to_string(dim) + " entries");
  for (int i = 0; i < dim; ++i) mu[i] = ksd::detail::parse_double_token(parts[i], "--mu");
  return mu;
}

// "identity", a single scale "s" for s*I, or "a,b,..." for a diagonal.
Eigen::MatrixXd parse_sigma(const std::string& spec, int dim) {
  if (spec == "identity") return Eigen::MatrixXd::Identity(dim, dim);
  if (spec.find(',') == std::string::npos) {
    const double s = ksd::detail::parse_double_token(spec, "--sigma");
    return s * Eigen::MatrixXd::Identity(dim, dim);
  }
  const std::vector<std::string> parts = split(spec, ',');
  if (static_cast<int>(parts.size()) != dim)
    throw ksd::input_error("--sigma: expected " + std::to_string(dim) + " entries");
  Eigen::VectorXd diag(dim);
  for (int i = 0; i < dim; ++i) diag[i] = ksd::detail::parse_double_token(parts[i], "--sigma");
  return diag.asDiagonal();
}

std::vector<std::int64_t> parse_n_grid(const std::string& spec) {
  std::vector<std::int64_t> grid;
  for (const std::string& part : split(spec, ','))
    grid.push_back(ksd::detail::parse_int_token(part, "--n-grid"));
  return grid;
}

ksd::EstimatorMethod parse_method(const std::string& name) {
  if (name == "v") return ksd::EstimatorMethod::v_statistic;
  if (name == "nystrom") return ksd::EstimatorMethod::nystrom;
  throw usage_error("--method must be 'v' or 'nystrom'");
}

std::uint64_t default_seed_from_env() {
  const char* env = std::getenv("KSD_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw usage_error("KSD_SEED must be an unsigned integer");
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }

struct EstimateArgs {
  std::string input;
  std::string method = "v";
  double gamma = 1.0;
  std::string mu = "0";
  std::string sigma = "identity";
  std::int64_t landmarks = 0;
  double rel_tol = 1e-10;
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_estimate(const EstimateArgs& a) {
  ksd::SampleSet samples;
  samples.data = ksd::read_samples_csv(a.input);
  samples.seed = a.seed;
  const int dim = static_cast<int>(samples.dim());
  const ksd::GaussianKernel kernel(a.gamma, dim);
  const ksd::GaussianMeasure target(parse_mu(a.mu, dim), parse_sigma(a.sigma, dim));
  const ksd::EstimatorMethod method = parse_method(a.method);

  ksd::EstimatorResult result;
  if (method == ksd::EstimatorMethod::v_statistic) {
    result = ksd::ksd_v_statistic(target, kernel, samples, a.threads);
  } else {
    const Eigen::Index m = a.landmarks > 0
                               ? a.landmarks
                               : static_cast<Eigen::Index>(
                                     std::ceil(std::sqrt(static_cast<double>(samples.n()))));
    ksd::Rng rng(a.seed);
    result = ksd::ksd_nystrom(target, kernel, samples, m, rng, a.rel_tol);
  }

  json doc;
  doc["spec_version"] = kSpecVersion;
  doc["command"] = "estimate";
  doc["input"] = a.input;
  doc["n"] = static_cast<std::int64_t>(samples.n());
  doc["dim"] = dim;
  doc["gamma"] = a.gamma;
  doc["mu"] = vector_to_json(target.mean());
  doc["sigma_diag"] = vector_to_json(target.covariance().diagonal());
  doc["method"] = ksd::method_name(method);
  doc["seed"] = a.seed;
  doc["threads"] = a.threads;
  if (method == ksd::EstimatorMethod::nystrom) {
    doc["landmarks_used"] = static_cast<std::int64_t>(result.landmarks_used);
    doc["dropped_eigenvalues"] = static_cast<std::int64_t>(result.dropped_eigenvalues);
    doc["rel_tol"] = a.rel_tol;
  }
  doc["ksd"] = result.ksd;
  doc["ksd_squared"] = result.ksd_squared;
  emit(doc);
  return 0;
}

struct OracleArgs {
  double gamma = 1.0;
  int dim = 1;
  std::string mu = "0";
  std::string sigma = "identity";
  bool quadrature = false;
  double abs_tol = 1e-9;
};

int run_oracle(const OracleArgs& a) {
  const Eigen::VectorXd mu = parse_mu(a.mu, a.dim);
  const Eigen::MatrixXd sigma = parse_sigma(a.sigma, a.dim);
  double value = 0.0;
  json doc;
  doc["spec_version"] = kSpecVersion;
  doc["command"] = "oracle";
  doc["gamma"] = a.gamma;
  doc["dim"] = a.dim;
  doc["mu"] = vector_to_json(mu);
  doc["sigma_diag"] = vector_to_json(Eigen::VectorXd(sigma.diagonal()));
  doc["method"] = a.quadrature ? "quadrature" : "closed_form";
  if (a.quadrature) {
    const ksd::QuadratureConfig cfg =
        ksd::default_quadrature_config(a.gamma, a.dim, mu, sigma, a.abs_tol);
    value = ksd::ksd_quadrature(a.gamma, a.dim, mu, sigma, cfg);
    doc["abs_tol"] = cfg.abs_tol;
    doc["truncation_radius"] = cfg.truncation_radius;
  } else {
    value = ksd::ksd_gaussian_closed_form(a.gamma, a.dim, mu, sigma);
  }
  doc["ksd"] = value;
  doc["ksd_squared"] = value * value;
  emit(doc);
  return 0;
}

struct SweepArgs {
  double gamma = 1.0;
  int dim = 1;
  std::string mu = "0.5";
  std::string sigma = "identity";
  std::string n_grid = "128,256,512,1024,2048,4096,8192";
  int reps = 200;
  std::string method = "v";
  std::int64_t landmarks = 0;
  double rel_tol = 1e-10;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "-";
};

int run_rate_sweep(const SweepArgs& a) {
  const ksd::GaussianKernel kernel(a.gamma, a.dim);
  const ksd::GaussianMeasure target = ksd::GaussianMeasure::standard(a.dim);
  const ksd::GaussianMeasure p_true(parse_mu(a.mu, a.dim), parse_sigma(a.sigma, a.dim));
  const std::vector<std::int64_t> grid = parse_n_grid(a.n_grid);
  ksd::SweepOptions opts;
  opts.landmarks = static_cast<int>(a.landmarks);
  opts.rel_tol = a.rel_tol;
  opts.threads = a.threads;
  const ksd::RiskCurve curve =
      ksd::risk_sweep(target, kernel, p_true, grid, a.reps, parse_method(a.method), a.seed, opts);

  if (a.out == "-") {
    ksd::write_risk_curve_csv(std::cout, curve);
    return 0;
  }
  ksd::write_risk_curve_csv(a.out, curve);
  const ksd::RateFit fit = ksd::rate_fit(curve);
  json doc;
  doc["spec_version"] = kSpecVersion;
  doc["command"] = "rate-sweep";
  doc["gamma"] = a.gamma;
  doc["dim"] = a.dim;
  doc["mu"] = vector_to_json(p_true.mean());
  doc["sigma_diag"] = vector_to_json(p_true.covariance().diagonal());
  doc["n_grid"] = json::parse("[" + a.n_grid + "]");
  doc["reps"] = a.reps;
  doc["method"] = a.method;
  doc["landmarks"] = a.landmarks;
  doc["rel_tol"] = a.rel_tol;
  doc["seed"] = a.seed;
  doc["threads"] = a.threads;
  doc["out"] = a.out;
  doc["oracle_ksd"] =
      ksd::ksd_gaussian_closed_form(a.gamma, a.dim, p_true.mean(), p_true.covariance());
  doc["slope"] = fit.slope;
  doc["intercept"] = fit.intercept;
  emit(doc);
  return 0;
}

struct LeCamArgs {
  std::int64_t n = 100;
  double gamma = 1.0;
  int dim = 1;
  int axis = 1;
};

int run_lecam(const LeCamArgs& a) {
  const ksd::AdversarialPair pair = ksd::adversarial_pair(a.n, a.dim, a.axis);
  const double s_n = ksd::minimax_separation(a.n, a.gamma, a.dim);
  const double kl = ksd::kl_gaussians(pair.p1.mean(), pair.p1.covariance(), pair.p0.mean(),
                                      pair.p0.covariance());
  const double n_kl = ksd::kl_product(a.n, kl);
  const double pair_ksd =
      ksd::ksd_gaussian_closed_form(a.gamma, a.dim, pair.p1.mean(), pair.p1.covariance());
  json doc;
  doc["spec_version"] = kSpecVersion;
  doc["command"] = "lecam";
  doc["n"] = a.n;
  doc["gamma"] = a.gamma;
  doc["dim"] = a.dim;
  doc["axis"] = a.axis;
  doc["rho"] = pair.rho;
  doc["s_n"] = s_n;
  doc["pair_ksd"] = pair_ksd;
  doc["n_times_kl"] = n_kl;
  doc["le_cam_prob"] = ksd::le_cam_bound(n_kl);
  emit(doc);
  return 0;
}

struct FiniteArgs {
  std::string model;
  std::string n_grid = "10,100,1000,10000";
  std::string out = "-";
};

int run_finite(const FiniteArgs& a) {
  const ksd::FiniteModelFile file = ksd::read_finite_model(a.model);
  const Eigen::VectorXd phi = ksd::center_phi(file.phi, file.model.p0);
  const ksd::LowerBoundTable table =
      ksd::lower_bound_demo(file.model, phi, parse_n_grid(a.n_grid));

  if (a.out == "-") {
    ksd::write_lower_bound_csv(std::cout, table);
    return 0;
  }
  ksd::write_lower_bound_csv(a.out, table);
  json doc;
  doc["spec_version"] = kSpecVersion;
  doc["command"] = "finite";
  doc["model"] = a.model;
  doc["n_grid"] = json::parse("[" + a.n_grid + "]");
  doc["out"] = a.out;
  doc["states"] = static_cast<std::int64_t>(file.model.states());
  doc["feature_dim"] = static_cast<std::int64_t>(file.model.feature_dim());
  doc["m2"] = table.m2;
  doc["c"] = table.c;
  doc["c_phi"] = table.c_phi;
  doc["le_cam_prob"] = table.rows.empty() ? 0.0 : table.rows.front().le_cam;
  emit(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel Stein discrepancy estimators, reference values, and lower-bound demos"};
  app.require_subcommand(1);

  EstimateArgs est;
  SweepArgs sweep;
  try {
    est.seed = default_seed_from_env();
    sweep.seed = est.seed;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App* c_est = app.add_subcommand("estimate", "Estimate KSD from a CSV sample file");
  c_est->add_option("--input", est.input, "Sample CSV, one observation per row")->required();
  c_est->add_option("--gamma", est.gamma, "Kernel bandwidth")->required();
  c_est->add_option("--method", est.method, "Estimator: v or nystrom");
  c_est->add_option("--mu", est.mu, "Target mean: scalar (first axis) or comma list");
  c_est->add_option("--sigma", est.sigma, "Target covariance: identity, scalar, or diagonal list");
  c_est->add_option("--landmarks", est.landmarks, "Landmark count, 0 = ceil(sqrt(n))");
  c_est->add_option("--rel-tol", est.rel_tol, "Pseudo-inverse eigenvalue cutoff");
  c_est->add_option("--seed", est.seed, "Landmark sampling seed");
  c_est->add_option("--threads", est.threads, "Worker threads, 0 = all cores");

  OracleArgs orc;
  CLI::App* c_orc = app.add_subcommand("oracle", "Reference KSD for a Gaussian pair");
  c_orc->add_option("--gamma", orc.gamma, "Kernel bandwidth")->required();
  c_orc->add_option("--dim", orc.dim, "Dimension")->required();
  c_orc->add_option("--mu", orc.mu, "Sample mean: scalar (first axis) or comma list");
  c_orc->add_option("--sigma", orc.sigma, "Sample covariance: identity, scalar, or diagonal list");
  c_orc->add_flag("--quadrature", orc.quadrature, "Integrate the spectral form instead");
  c_orc->add_option("--abs-tol", orc.abs_tol, "Quadrature tolerance on squared KSD");

  CLI::App* c_sweep = app.add_subcommand("rate-sweep", "Monte Carlo error curve vs sample size");
  c_sweep->add_option("--gamma", sweep.gamma, "Kernel bandwidth")->required();
  c_sweep->add_option("--dim", sweep.dim, "Dimension");
  c_sweep->add_option("--mu", sweep.mu, "Sampled mean: scalar (first axis) or comma list");
  c_sweep->add_option("--sigma", sweep.sigma,
                      "Sampled covariance: identity, scalar, or diagonal list");
  c_sweep->add_option("--n-grid", sweep.n_grid, "Comma list of sample sizes, increasing");
  c_sweep->add_option("--reps", sweep.reps, "Replications per sample size");
  c_sweep->add_option("--method", sweep.method, "Estimator: v or nystrom");
  c_sweep->add_option("--landmarks", sweep.landmarks, "Landmark count, 0 = ceil(sqrt(n))");
  c_sweep->add_option("--rel-tol", sweep.rel_tol, "Pseudo-inverse eigenvalue cutoff");
  c_sweep->add_option("--seed", sweep.seed, "Base seed for replication streams");
  c_sweep->add_option("--threads", sweep.threads, "Worker threads, 0 = all cores");
  c_sweep->add_option("--out", sweep.out, "Curve CSV path, - for stdout");

  LeCamArgs lecam;
  CLI::App* c_lecam = app.add_subcommand("lecam", "Two-point lower bound at one sample size");
  c_lecam->add_option("--n", lecam.n, "Sample size")->required();
  c_lecam->add_option("--gamma", lecam.gamma, "Kernel bandwidth")->required();
  c_lecam->add_option("--dim", lecam.dim, "Dimension")->required();
  c_lecam->add_option("--axis", lecam.axis, "Shift axis, 1-based");

  FiniteArgs fin;
  CLI::App* c_fin = app.add_subcommand("finite", "Perturbation lower bound on a finite model");
  c_fin->add_option("--model", fin.model, "Model file (key-value document)")->required();
  c_fin->add_option("--n-grid", fin.n_grid, "Comma list of sample sizes, increasing");
  c_fin->add_option("--out", fin.out, "Table CSV path, - for stdout");

  try {
    app.parse(argc, argv);
    if (c_est->parsed()) return run_estimate(est);
    if (c_orc->parsed()) return run_oracle(orc);
    if (c_sweep->parsed()) return run_rate_sweep(sweep);
    if (c_lecam->parsed()) return run_lecam(lecam);
    if (c_fin->parsed()) return run_finite(fin);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ksd::negativity_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 8;
  } catch (const ksd::degeneracy_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 7;
  } catch (const ksd::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ksd::model_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ksd::convergence_error& e) {
    std::cerr << "error: " << e.what() << " (estimate " << ksd::format_double(e.estimate)
              << ", error bound " << ksd::format_double(e.error_bound) << ")\n";
    return 5;
  } catch (const ksd::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
