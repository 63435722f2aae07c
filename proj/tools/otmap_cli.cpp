// otmap: fit, apply and inspect polynomial transport maps from the shell.
//
// Every subcommand accepts --config FILE, a JSON object whose keys are long
// option names without the leading dashes.  Options given on the command line
// override the file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otmap/admm_dense.hpp"
#include "otmap/composer.hpp"
#include "otmap/csv.hpp"
#include "otmap/errors.hpp"
#include "otmap/gibbs.hpp"
#include "otmap/lasso_pipeline.hpp"
#include "otmap/regression.hpp"
#include "otmap/sampling.hpp"
#include "otmap/serialize.hpp"
#include "otmap/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace otmap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

// Turns {"order": 2, "no-early-stop": true} into "--order 2 --no-early-stop".
std::vector<std::string> config_to_args(const std::string& path) {
  json doc;
  try {
    doc = json::parse(load_text(path));
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("config '" + path + "' must be a JSON object");
  std::vector<std::string> args;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    if (value.is_string()) {
      args.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      args.push_back(joined);
    } else {
      args.push_back(value.dump());
    }
  }
  return args;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto& field : split_csv_line(text)) {
    const auto v = parse_double(field);
    if (!v) throw InvalidArgument(std::string(what) + ": '" + field + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd vector_option(const std::string& text, Eigen::Index dim, double fill, const char* what) {
  const auto v = parse_list(text, what);
  if (v.empty()) return Eigen::VectorXd::Constant(dim, fill);
  if (static_cast<Eigen::Index>(v.size()) != dim) {
    throw InvalidArgument(std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(dim));
  }
  return to_vector(v);
}

// ---------------------------------------------------------------------------
// Shared option groups

struct SolverOptions {
  double rho = 1.0;
  int max_iters = 5000;
  double tol = 1e-5;
  int workers = 0;
  std::string reduction = "sharded";

  void add(CLI::App* app) {
    app->add_option("--rho", rho, "ADMM penalty parameter")->capture_default_str();
    app->add_option("--max-iters", max_iters, "ADMM iteration cap per fit")->capture_default_str();
    app->add_option("--tol", tol, "primal and dual residual tolerance")->capture_default_str();
    app->add_option("--workers", workers, "worker threads (0: OTMAP_WORKERS or all cores)")->capture_default_str();
    app->add_option("--reduction", reduction, "sharded|strict (strict: identical results for any worker count)")
        ->capture_default_str();
  }

  SolverConfig build() const {
    SolverConfig c;
    c.rho = rho;
    c.max_iters = max_iters;
    c.tol_primal = tol;
    c.tol_dual = tol;
    c.workers = workers;
    c.reduction = parse_reduction_mode(reduction);
    c.validate();
    return c;
  }

  json to_json() const {
    return {{"rho", rho}, {"max-iters", max_iters}, {"tol", tol}, {"reduction", reduction}};
  }
};

struct TargetOptions {
  std::string kind = "gaussian-std";
  std::string mean;
  std::string cov_diag;
  double rate = 1.0;
  std::string data;
  std::string response;
  double lambda = 1.0;
  double sigma2 = 0.0;

  void add(CLI::App* app) {
    app->add_option("--target", kind, "gaussian-std|gaussian|laplace|lasso")->capture_default_str();
    app->add_option("--target-mean", mean, "gaussian target mean, comma separated (default 0)");
    app->add_option("--target-cov-diag", cov_diag, "gaussian target covariance diagonal (default 1)");
    app->add_option("--target-rate", rate, "laplace target rate")->capture_default_str();
    app->add_option("--target-data", data, "lasso target: regression CSV");
    app->add_option("--target-response", response, "lasso target: response column (default: last column)");
    app->add_option("--target-lambda", lambda, "lasso target: Laplace prior rate")->capture_default_str();
    app->add_option("--target-sigma2", sigma2, "lasso target: noise variance (0: least-squares residual variance)")
        ->capture_default_str();
  }

  std::unique_ptr<TargetDensity> build(Eigen::Index dim) const {
    if (kind == "gaussian-std") return std::make_unique<GaussianTarget>(standard_gaussian_target(dim));
    if (kind == "gaussian") {
      const Eigen::VectorXd mu = vector_option(mean, dim, 0.0, "--target-mean");
      const Eigen::VectorXd var = vector_option(cov_diag, dim, 1.0, "--target-cov-diag");
      return std::make_unique<GaussianTarget>(mu, Eigen::MatrixXd(var.asDiagonal()));
    }
    if (kind == "laplace") return std::make_unique<LaplacePrior>(rate, dim);
    if (kind == "lasso") {
      if (data.empty()) throw InvalidArgument("--target lasso needs --target-data");
      const RegressionDataset ds = load_regression_csv(data, response_or_last(data, response));
      if (ds.d() != dim) {
        throw InvalidArgument("lasso target has " + std::to_string(ds.d()) + " predictors but samples have " +
                              std::to_string(dim) + " columns");
      }
      const double s2 = sigma2 > 0 ? sigma2 : least_squares_residual_variance(ds.X, ds.y);
      return std::make_unique<BayesPosterior>(bayes_lasso_posterior(ds.y, ds.X, lambda, s2));
    }
    throw InvalidArgument("unknown target '" + kind + "' (expected gaussian-std|gaussian|laplace|lasso)");
  }

  static std::string response_or_last(const std::string& path, const std::string& response) {
    if (!response.empty()) return response;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      return split_csv_line(line).back();
    }
    throw InvalidArgument(path + ": no header line");
  }

  json to_json() const {
    json j{{"target", kind}};
    if (kind == "gaussian") j.update({{"target-mean", mean}, {"target-cov-diag", cov_diag}});
    if (kind == "laplace") j["target-rate"] = rate;
    if (kind == "lasso") {
      j.update({{"target-data", data}, {"target-response", response}, {"target-lambda", lambda},
                {"target-sigma2", sigma2}});
    }
    return j;
  }
};

void write_text_file(const std::string& path, const std::string& text) { save_text(path, text); }

// ---------------------------------------------------------------------------
// fit

struct FitCommand {
  std::string source;
  std::string out = "map.json";
  std::string diagnostics;
  std::string progress;
  std::string structure = "krsv";
  std::string family = "hermite";
  int order = 2;
  int stages = 1;
  int dim = 0;
  std::size_t term_cap = kDefaultTermCap;
  double theta = 1.0;
  double theta_ratio = 1.0;
  double holdout = 0.2;
  double stop_tol = 1e-4;
  bool no_early_stop = false;
  bool no_projection = false;
  std::uint64_t seed = 0;
  SolverOptions solver;
  TargetOptions target;

  void add(CLI::App* app) {
    app->add_option("--source", source, "source samples CSV (one sample per row)")->required();
    app->add_option("--out", out, "output map document")->capture_default_str();
    app->add_option("--diagnostics", diagnostics, "per-iteration CSV: iter,objective,primal_res,dual_res");
    app->add_option("--progress", progress, "per-stage CSV: stage,theta,objective_train,objective_holdout,admm_iters");
    app->add_option("--structure", structure, "dense|kr|krsv")->capture_default_str();
    app->add_option("--family", family, "hermite|monomial")->capture_default_str();
    app->add_option("--order", order, "maximum total polynomial order")->capture_default_str();
    app->add_option("--stages", stages, "number of composed stages (kr/krsv only)")->capture_default_str();
    app->add_option("--dim", dim, "expected sample dimension; checked against the term cap before any input is read");
    app->add_option("--term-cap", term_cap, "largest admissible number of basis terms")->capture_default_str();
    app->add_option("--theta", theta, "transport-cost weight of the first stage")->capture_default_str();
    app->add_option("--theta-ratio", theta_ratio, "theta_t = theta * ratio^t")->capture_default_str();
    app->add_option("--holdout", holdout, "fraction of samples held out for stopping")->capture_default_str();
    app->add_option("--stop-tol", stop_tol, "stop after 2 stages improving the objective by less than this")
        ->capture_default_str();
    app->add_flag("--no-early-stop", no_early_stop, "always fit every stage");
    app->add_flag("--no-projection", no_projection, "fail instead of projecting non-monotone stages");
    app->add_option("--seed", seed, "holdout split seed")->capture_default_str();
    solver.add(app);
    target.add(app);
  }

  json effective_config() const {
    json j{{"command", "fit"},       {"source", source},     {"out", out},
           {"structure", structure}, {"family", family},     {"order", order},
           {"stages", stages},       {"term-cap", term_cap}, {"theta", theta},
           {"theta-ratio", theta_ratio}, {"holdout", holdout}, {"stop-tol", stop_tol},
           {"no-early-stop", no_early_stop}, {"no-projection", no_projection}, {"seed", seed}};
    j.update(solver.to_json());
    j.update(target.to_json());
    return j;
  }

  int run() {
    const Structure st = parse_structure(structure);
    const Family fam = parse_family(family);
    if (dim > 0) build_multi_index_set(st, dim, order, term_cap);  // refuse oversized bases up front
    if (!fs::exists(source)) throw IoError("source file '" + source + "' does not exist");
    const CsvMatrix src = read_csv_matrix(source);
    if (src.data.rows() == 0) throw InvalidArgument("source file '" + source + "' has no samples");
    const Eigen::Index D = src.data.cols();
    if (dim > 0 && dim != D) {
      throw InvalidArgument("--dim is " + std::to_string(dim) + " but '" + source + "' has " + std::to_string(D) +
                            " columns");
    }
    build_multi_index_set(st, static_cast<int>(D), order, term_cap);
    const auto tgt = target.build(D);

    std::ofstream diag;
    if (!diagnostics.empty()) {
      diag.open(diagnostics, std::ios::binary);
      if (!diag) throw IoError("cannot open '" + diagnostics + "' for writing");
      diag << "# " << effective_config().dump() << "\niter,objective,primal_res,dual_res\n";
    }
    SolverConfig scfg = solver.build();
    scfg.record_history = false;
    int iter_offset = 0, last_iter = 0;
    if (diag.is_open()) {
      scfg.on_iteration = [&](int k, double obj, double pr, double du) {
        last_iter = k;
        diag << iter_offset + k << ',' << format_double(obj) << ',' << format_double(pr) << ',' << format_double(du)
             << '\n';
      };
    }

    if (st == Structure::Dense) {
      if (stages != 1) throw InvalidArgument("dense maps are fitted in one stage; use --structure kr|krsv for --stages");
      const FitResult fit = fit_dense(src.data, *tgt, {st, order, fam, term_cap}, scfg);
      TransportMap map = fit.map;
      map.set_monotone_validated(check_monotonicity(map, src.data).ok);
      if (!map.monotone_validated()) {
        std::cerr << "warning: fitted dense map is not monotone at every training sample\n";
      }
      save_text(out, serialize(map));
      if (!fit.diagnostics.converged) {
        std::cerr << "warning: ADMM did not converge in " << fit.diagnostics.iterations
                  << " iterations (primal " << fit.diagnostics.primal_res << ", dual " << fit.diagnostics.dual_res
                  << "); wrote the best iterate\n";
        return kExitNotConverged;
      }
      return kExitOk;
    }

    ComposerConfig ccfg;
    ccfg.stages = stages;
    ccfg.theta = {theta, theta_ratio};
    ccfg.basis = {st, order, fam, term_cap};
    ccfg.solver = scfg;
    ccfg.holdout_fraction = holdout;
    ccfg.stop_tol = stop_tol;
    ccfg.early_stop = !no_early_stop;
    ccfg.project_on_violation = !no_projection;
    ccfg.seed = seed;
    std::ofstream prog;
    if (!progress.empty()) {
      prog.open(progress, std::ios::binary);
      if (!prog) throw IoError("cannot open '" + progress + "' for writing");
      prog << "stage,theta,objective_train,objective_holdout,admm_iters\n";
    }
    ccfg.on_stage = [&](std::size_t t, const StageInfo& info) {
      iter_offset += last_iter;
      last_iter = 0;
      if (prog.is_open()) {
        prog << t + 1 << ',' << format_double(info.theta) << ',' << format_double(info.objective_train) << ','
             << format_double(info.objective_holdout) << ',' << info.admm_iters << '\n';
      }
    };
    SequentialMap seq;
    try {
      seq = fit_sequential(src.data, *tgt, ccfg);
    } catch (const SequentialFitError& e) {
      if (!e.partial().empty()) {
        save_text(out, serialize(e.partial()));
        std::cerr << "note: wrote the " << e.partial().size() << " completed stage(s) to " << out << "\n";
      }
      throw;
    }
    save_text(out, serialize(seq));
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (!seq.info()[t].converged) {
        std::cerr << "warning: stage " << t + 1 << " did not converge; wrote the best iterate\n";
        return kExitNotConverged;
      }
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// push / invert

struct ApplyCommand {
  bool inverse;
  std::string map_path;
  std::string input;
  std::string out;
  double tol = 1e-10;
  double max_bracket = 1e6;
  int max_iters = 200;

  explicit ApplyCommand(bool inv) : inverse(inv) {}

  void add(CLI::App* app) {
    app->add_option("--map", map_path, "map document")->required();
    app->add_option("--input", input, "samples CSV (one sample per row)")->required();
    app->add_option("--out", out, "output CSV")->required();
    if (inverse) {
      app->add_option("--inv-tol", tol, "per-coordinate residual tolerance")->capture_default_str();
      app->add_option("--max-bracket", max_bracket, "largest |x_d| searched")->capture_default_str();
      app->add_option("--inv-max-iters", max_iters, "root-finding iterations per coordinate")->capture_default_str();
    }
  }

  int run() {
    const SequentialMap seq = deserialize_sequence(load_text(map_path));
    const CsvMatrix in = read_csv_matrix(input);
    if (in.data.cols() != seq.dim()) {
      throw InvalidArgument("map dimension is " + std::to_string(seq.dim()) + " but '" + input + "' has " +
                            std::to_string(in.data.cols()) + " columns");
    }
    Eigen::MatrixXd result;
    if (inverse) {
      for (std::size_t t = 0; t < seq.size(); ++t) {
        if (!is_triangular(seq.stage(t).structure())) {
          throw UnsupportedOperation("stage " + std::to_string(t + 1) +
                                     " is a dense map; inversion needs kr or krsv stages");
        }
      }
      result = compose_inverse(seq, in.data, {tol, max_bracket, max_iters});
    } else {
      result = compose_forward(seq, in.data);
    }
    write_csv_matrix(out, result, in.header);
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// sample

struct SampleCommand {
  std::string kind = "gaussian";
  long n = 1000;
  std::uint64_t seed = 0;
  int dim = 1;
  double rate = 1.0;
  std::string mean, cov_diag, mean2, cov2_diag;
  double weight = 0.5;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "laplace|gaussian|mixture")->capture_default_str();
    app->add_option("-n,--n", n, "number of samples")->capture_default_str();
    app->add_option("--seed", seed, "random seed")->capture_default_str();
    app->add_option("--dim", dim, "dimension (when no mean is given)")->capture_default_str();
    app->add_option("--rate", rate, "laplace rate")->capture_default_str();
    app->add_option("--mean", mean, "gaussian mean / first mixture mean, comma separated (default 0)");
    app->add_option("--cov-diag", cov_diag, "gaussian / first mixture covariance diagonal (default 1)");
    app->add_option("--mean2", mean2, "second mixture mean");
    app->add_option("--cov2-diag", cov2_diag, "second mixture covariance diagonal (default 1)");
    app->add_option("--weight", weight, "probability of the first mixture component")->capture_default_str();
    app->add_option("--out", out, "output CSV")->required();
  }

  int run() {
    const auto mu = parse_list(mean, "--mean");
    const Eigen::Index D = mu.empty() ? dim : static_cast<Eigen::Index>(mu.size());
    if (D < 1) throw InvalidArgument("--dim must be >= 1");
    SourceSpec spec;
    if (kind == "laplace") {
      spec = SourceSpec::laplace(rate, D);
    } else if (kind == "gaussian") {
      spec = SourceSpec::gaussian(vector_option(mean, D, 0.0, "--mean"),
                                  vector_option(cov_diag, D, 1.0, "--cov-diag").asDiagonal());
    } else if (kind == "mixture") {
      if (mean2.empty()) throw InvalidArgument("--kind mixture needs --mean2");
      spec = SourceSpec::two_gaussian_mixture(
          weight, vector_option(mean, D, 0.0, "--mean"), vector_option(cov_diag, D, 1.0, "--cov-diag").asDiagonal(),
          vector_option(mean2, D, 0.0, "--mean2"), vector_option(cov2_diag, D, 1.0, "--cov2-diag").asDiagonal());
    } else {
      throw InvalidArgument("unknown sample kind '" + kind + "' (expected laplace|gaussian|mixture)");
    }
    write_csv_matrix(out, sample_source(spec, n, seed));
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// lasso

struct LassoCommand {
  std::string data;
  std::string response;
  double lambda = 0.0;
  double sigma2 = 0.0;
  std::string method = "both";
  std::string out_dir = ".";
  std::string structure = "dense";
  int order = 4;
  int stages = 10;
  long n_prior = 2000;
  int burn_in = 3000;
  int draws = 10000;
  std::uint64_t seed = 0;
  bool fixed_rho = false;
  SolverOptions solver;

  void add(CLI::App* app) {
    app->add_option("--data", data, "regression CSV with a header line")->required();
    app->add_option("--response", response, "response column (default: last column)");
    app->add_option("--lambda", lambda, "Laplace prior rate")->required();
    app->add_option("--sigma2", sigma2, "noise variance (0: least-squares residual variance)")->capture_default_str();
    app->add_option("--method", method, "transport|gibbs|both")->capture_default_str();
    app->add_option("--out-dir", out_dir, "directory for summaries, samples and per-coordinate dumps")
        ->capture_default_str();
    app->add_option("--structure", structure, "dense|kr|krsv")->capture_default_str();
    app->add_option("--order", order, "map order")->capture_default_str();
    app->add_option("--stages", stages, "stages for kr/krsv maps")->capture_default_str();
    app->add_option("--n-prior", n_prior, "prior samples pushed through the map")->capture_default_str();
    app->add_option("--burn-in", burn_in, "Gibbs burn-in sweeps")->capture_default_str();
    app->add_option("--draws", draws, "Gibbs draws kept")->capture_default_str();
    app->add_option("--seed", seed, "seed for prior draws and the Gibbs chain")->capture_default_str();
    app->add_flag("--fixed-rho", fixed_rho, "use --rho as given instead of the likelihood curvature");
    solver.add(app);
  }

  void dump(const std::string& tag, const Eigen::MatrixXd& samples, const RegressionDataset& ds) const {
    write_summary_csv((fs::path(out_dir) / ("summary_" + tag + ".csv")).string(),
                      summarize_posterior(samples, ds.names, tag));
    write_csv_matrix((fs::path(out_dir) / ("samples_" + tag + ".csv")).string(), samples, ds.names);
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      const std::string& name = ds.names[static_cast<std::size_t>(j)];
      write_csv_matrix((fs::path(out_dir) / ("kde_" + tag + "_" + name + ".csv")).string(), samples.col(j), {name});
    }
  }

  int run() {
    if (method != "transport" && method != "gibbs" && method != "both") {
      throw InvalidArgument("unknown method '" + method + "' (expected transport|gibbs|both)");
    }
    const RegressionDataset ds = load_regression_csv(data, TargetOptions::response_or_last(data, response));
    const double s2 = sigma2 > 0 ? sigma2 : least_squares_residual_variance(ds.X, ds.y);
    fs::create_directories(out_dir);
    int code = kExitOk;
    if (method != "gibbs") {
      LassoTransportConfig cfg;
      cfg.n_prior = n_prior;
      cfg.basis = {parse_structure(structure), order, Family::HermiteProbabilist, kDefaultTermCap};
      cfg.solver = solver.build();
      cfg.solver.record_history = false;
      cfg.auto_rho = !fixed_rho;
      cfg.sequential.stages = stages;
      cfg.sequential.seed = seed;
      cfg.seed = seed;
      const LassoTransportResult res = bayes_lasso_transport(ds, lambda, s2, cfg);
      dump("transport", res.samples, ds);
      const std::string map_path = (fs::path(out_dir) / "map.json").string();
      if (res.map) save_text(map_path, serialize(*res.map));
      if (res.sequence) save_text(map_path, serialize(*res.sequence));
      if (!res.converged) {
        std::cerr << "warning: transport fit did not converge; samples come from the best iterate\n";
        code = kExitNotConverged;
      }
    }
    if (method != "transport") {
      GibbsConfig g;
      g.burn_in = burn_in;
      g.draws = draws;
      g.seed = seed;
      dump("gibbs", gibbs_lasso(ds.X, ds.y, lambda, s2, g), ds);
    }
    return code;
  }
};

// ---------------------------------------------------------------------------
// index-set

struct IndexSetCommand {
  std::string structure = "kr";
  int dim = 2;
  int order = 2;

  void add(CLI::App* app) {
    app->add_option("--structure", structure, "dense|kr|krsv")->capture_default_str();
    app->add_option("--dim", dim, "dimension D")->capture_default_str();
    app->add_option("--order", order, "maximum total order O")->capture_default_str();
  }

  int run() {
    const MultiIndexSet set = build_multi_index_set(parse_structure(structure), dim, order);
    std::cout << "structure " << to_string(set.structure()) << "\nD " << set.dim() << "\nO " << set.order() << "\nK "
              << set.size() << "\nrow_sizes";
    for (auto k : set.row_sizes()) std::cout << ' ' << k;
    std::cout << '\n';
    for (Eigen::Index k = 0; k < set.size(); ++k) {
      std::cout << k << ":";
      for (int e : set.index(k)) std::cout << ' ' << e;
      std::cout << '\n';
    }
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport maps between sampled sources and log-concave targets via consensus ADMM"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  FitCommand fit;
  ApplyCommand push(false), invert(true);
  SampleCommand sample;
  LassoCommand lasso;
  IndexSetCommand index_set;

  std::string config_path;
  auto add_sub = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON file of option values; command-line flags take precedence");
    cmd.add(sub);
    return sub;
  };
  CLI::App* fit_app = add_sub("fit", "fit a map (dense) or a sequence of triangular stages", fit);
  CLI::App* push_app = add_sub("push", "push samples through a map or sequence", push);
  CLI::App* invert_app = add_sub("invert", "invert a triangular map or sequence", invert);
  CLI::App* sample_app = add_sub("sample", "draw source samples", sample);
  CLI::App* lasso_app = add_sub("lasso", "Bayesian LASSO posterior by transport and/or Gibbs", lasso);
  CLI::App* index_app = add_sub("index-set", "print a multi-index set", index_set);

  // Splice config-file values in front of the command-line arguments so that
  // explicit flags, parsed later, win.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        const auto extra = config_to_args(args[i + 1]);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
        break;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());

  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (fit_app->parsed()) return fit.run();
    if (push_app->parsed()) return push.run();
    if (invert_app->parsed()) return invert.run();
    if (sample_app->parsed()) return sample.run();
    if (lasso_app->parsed()) return lasso.run();
    if (index_app->parsed()) return index_set.run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
