#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "CLI11.hpp"

#include "maxdissim/dissimilarity.hpp"
#include "maxdissim/inference.hpp"
#include "maxdissim/io.hpp"
#include "maxdissim/metrics.hpp"
#include "maxdissim/parallel.hpp"
#include "maxdissim/rng.hpp"
#include "maxdissim/simulate.hpp"

using namespace maxdissim;

namespace {

struct Options {
  // shared
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
  // simulate
  std::string scenario;
  int n = 10, grid = 10;
  double sigma = 1, nu = 1, ell = 1, nugget = 0;
  double gamma = 25, delta = 2;
  // fit
  std::string data, likelihood = "gaussian";
  std::vector<double> lower, upper;
  std::vector<int> basis_sizes;
  int degree = 3, bins = 0, dic_draws = 500;
  GaussianPrior prior;
  // solvers
  std::string truth, post_x, post_y;
  std::vector<std::string> truths, posts;
  double p = 2, c = -1;
  std::vector<double> c_grid, weights;
  int m = 0, nodes = 0;
  std::string draws_csv;
  OptimizerConfig optimizer;
  // youden
  std::string x_values, y_values;
  std::vector<double> x_normal, y_normal;
  // mc-study
  int mc_scenario = 1, replicates = 50, mc_draws = 200;
};

GroundSet bounding_box(const std::vector<Point>& pts) {
  require(!pts.empty(), "cannot infer a ground set from empty data");
  Eigen::VectorXd lo = pts.front(), hi = pts.front();
  for (const auto& t : pts) {
    lo = lo.cwiseMin(t);
    hi = hi.cwiseMax(t);
  }
  for (Eigen::Index k = 0; k < lo.size(); ++k)
    require(hi[k] > lo[k], "data bounding box is degenerate; pass --lower/--upper");
  return GroundSet(lo, hi);
}

GroundSet resolve_ground(const Options& o, const std::vector<Point>& pts) {
  if (o.lower.empty() && o.upper.empty()) return bounding_box(pts);
  require(o.lower.size() == o.upper.size() && !o.lower.empty(), "--lower and --upper need matching lengths");
  return GroundSet(Eigen::Map<const Eigen::VectorXd>(o.lower.data(), o.lower.size()),
                   Eigen::Map<const Eigen::VectorXd>(o.upper.data(), o.upper.size()));
}

AnalyticParameter zero_parameter() {
  return {[](const Point&) { return 0.0; }, "zero"};
}

AnalyticParameter bump(double at) {
  return {[at](const Point& t) { return std::exp(-std::pow((t[0] - at) / 0.05, 2)); }, "bump"};
}

DissimilarityObjective truth_objective(const std::string& name, const Options& o, ObjectiveMode mode) {
  if (name == "scenario1") {
    auto [x, y] = scenario1_parameters();
    return DissimilarityObjective(x, y, o.p, GroundSet::interval(0, 1), mode, o.nodes);
  }
  if (name == "scenario2") {
    Scenario2Config cfg{o.gamma, o.delta};
    auto [x, y] = scenario2_intensity(cfg);
    return DissimilarityObjective(x, y, o.p, cfg.ground(), mode, o.nodes);
  }
  if (name == "bump1" || name == "bump2")
    return DissimilarityObjective(bump(name == "bump1" ? 0.25 : 0.75), zero_parameter(), o.p,
                                  GroundSet::interval(0, 1), mode, o.nodes);
  throw InputError("unknown truth '" + name + "' (expected scenario1, scenario2, bump1, bump2)");
}

CoefficientPosterior load_posterior(const std::string& path) { return posterior_from_json(read_json_file(path)); }

DissimilarityObjective mean_objective(const std::string& px, const std::string& py, const Options& o,
                                      ObjectiveMode mode) {
  auto a = load_posterior(px);
  auto b = load_posterior(py);
  require(a.basis.ground() == b.basis.ground(), "posteriors live on different ground sets");
  return DissimilarityObjective(a.mean_parameter(), b.mean_parameter(), o.p, a.basis.ground(), mode, o.nodes);
}

void emit(const Options& o, const Json& j) {
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) std::cout << text;
  else write_text_file(o.out, text);
}

int workers(const Options& o) { return o.threads > 0 ? o.threads : worker_count(); }

// --- commands --------------------------------------------------------------

void cmd_simulate(const Options& o) {
  const std::string prefix = o.out.empty() ? "sim" : o.out;
  Json prov;
  prov["scenario"] = o.scenario;
  prov["seed"] = o.seed;
  if (o.scenario == "gp") {
    MaternParams mp{o.sigma, o.nu, o.ell};
    auto [mx, my] = scenario1_parameters();
    const auto grid = scenario1_grid(o.grid);
    auto dx = sample_gp(mx, mp, grid, o.n, derive_seed(o.seed, 1), o.nugget);
    auto dy = sample_gp(my, mp, grid, o.n, derive_seed(o.seed, 2), o.nugget);
    std::ostringstream sx, sy;
    write_gaussian_csv(sx, dx);
    write_gaussian_csv(sy, dy);
    write_text_file(prefix + "_x.csv", sx.str());
    write_text_file(prefix + "_y.csv", sy.str());
    prov["n"] = o.n;
    prov["J"] = o.grid;
    prov["matern"] = {{"sigma", o.sigma}, {"nu", o.nu}, {"ell", o.ell}};
    prov["nugget"] = o.nugget;
    prov["ground"] = to_json(GroundSet::interval(0, 1));
  } else if (o.scenario == "pp") {
    Scenario2Config cfg{o.gamma, o.delta};
    cfg.validate();
    auto [lx, ly] = scenario2_intensity(cfg);
    auto px = sample_poisson_process(lx, cfg.ground(), derive_seed(o.seed, 1));
    auto py = sample_poisson_process(ly, cfg.ground(), derive_seed(o.seed, 2));
    std::ostringstream sx, sy;
    write_points_csv(sx, px, 2);
    write_points_csv(sy, py, 2);
    write_text_file(prefix + "_x.csv", sx.str());
    write_text_file(prefix + "_y.csv", sy.str());
    prov["gamma"] = o.gamma;
    prov["delta"] = o.delta;
    prov["counts"] = Json::array({px.count(), py.count()});
    prov["ground"] = to_json(cfg.ground());
  } else {
    throw InputError("simulate: scenario must be gp or pp");
  }
  prov["files"] = Json::array({prefix + "_x.csv", prefix + "_y.csv"});
  write_text_file(prefix + ".json", prov.dump(2) + "\n");
}

void cmd_fit(const Options& o) {
  require(!o.data.empty(), "fit: --data is required");
  o.prior.validate();
  const Likelihood lik = likelihood_from_string(o.likelihood);
  std::vector<int> sizes = o.basis_sizes.empty() ? std::vector<int>{10} : o.basis_sizes;
  DicSelection sel;
  if (lik == Likelihood::GaussianConjugate) {
    auto data = read_gaussian_csv(o.data);
    GroundSet ground = resolve_ground(o, data.points);
    sel = select_basis_by_dic(data, ground, sizes, o.prior, o.degree, o.dic_draws, o.seed);
  } else {
    auto pattern = read_points_csv(o.data);
    GroundSet ground = resolve_ground(o, pattern.points);
    sel = select_basis_by_dic(pattern, ground, sizes, o.prior, o.degree, o.bins, o.dic_draws, o.seed);
  }
  if (o.basis_sizes.size() > 1) {
    for (const auto& cand : sel.candidates) {
      if (cand.ok) std::cout << "size=" << cand.size << " dic=" << format_double(cand.dic) << "\n";
      else std::cout << "size=" << cand.size << " failed: " << cand.error << "\n";
    }
    std::cout << "selected size=" << sel.size << "\n";
  }
  Json j = to_json(sel.fit);
  if (o.basis_sizes.size() > 1) j["dic"] = to_json(sel);
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) {
    if (o.basis_sizes.size() <= 1) std::cout << text;
  } else {
    write_text_file(o.out, text);
  }
}

void write_draws(const Options& o, const std::vector<BmdSolution>& draws) {
  if (o.draws_csv.empty()) return;
  std::ostringstream s;
  write_draws_csv(s, draws);
  write_text_file(o.draws_csv, s.str());
}

void check_budget(double c) {
  require(c >= 0 && std::isfinite(c), "--c must be a nonnegative budget");
}

void cmd_solve(const Options& o, ObjectiveMode mode) {
  check_budget(o.c);
  const bool from_truth = !o.truth.empty();
  require(from_truth != (!o.post_x.empty() || !o.post_y.empty()),
          "give either --truth or both --post-x and --post-y");
  auto solve = [&](const DissimilarityObjective& obj) {
    return mode == ObjectiveMode::Averaged ? solve_hl_bmd(obj, o.c, o.optimizer) : solve_bmd(obj, o.c, o.optimizer);
  };
  if (o.m > 0) {
    require(!from_truth, "--m needs fitted posteriors (--post-x, --post-y)");
    auto a = load_posterior(o.post_x);
    auto b = load_posterior(o.post_y);
    ObjectiveSpec spec{o.p, mode, o.nodes};
    auto res = solve_bmd_posterior(a, b, o.c, o.m, o.seed, spec, o.optimizer, workers(o));
    Json j = to_json(res);
    j["p"] = o.p;
    j["mode"] = mode == ObjectiveMode::Averaged ? "averaged" : "subnorm";
    write_draws(o, res.draws);
    emit(o, j);
    return;
  }
  require(o.post_x.empty() || !o.post_y.empty(), "--post-x needs --post-y");
  DissimilarityObjective obj =
      from_truth ? truth_objective(o.truth, o, mode) : mean_objective(o.post_x, o.post_y, o, mode);
  emit(o, to_json(solve(obj)));
}

void cmd_curve(const Options& o) {
  require(!o.c_grid.empty(), "curve: --c-grid is required");
  for (double c : o.c_grid) check_budget(c);
  DissimilarityObjective obj = !o.truth.empty() ? truth_objective(o.truth, o, ObjectiveMode::Subnorm)
                                                 : mean_objective(o.post_x, o.post_y, o, ObjectiveMode::Subnorm);
  Json arr = Json::array();
  for (const auto& s : dissimilarity_curve(obj, o.c_grid, o.optimizer)) arr.push_back(to_json(s));
  emit(o, arr);
}

void cmd_bmmd(const Options& o) {
  check_budget(o.c);
  std::vector<DissimilarityObjective> objs;
  for (const auto& t : o.truths) objs.push_back(truth_objective(t, o, ObjectiveMode::Subnorm));
  for (const auto& pair : o.posts) {
    auto colon = pair.find(':');
    require(colon != std::string::npos, "--posts entries must be X.json:Y.json");
    objs.push_back(mean_objective(pair.substr(0, colon), pair.substr(colon + 1), o, ObjectiveMode::Subnorm));
  }
  require(!objs.empty(), "bmmd: give objectives via --truths and/or --posts");
  std::vector<double> w = o.weights.empty() ? std::vector<double>(objs.size(), 1.0) : o.weights;
  require(w.size() == objs.size(), "bmmd: need one weight per objective");
  std::vector<DissimilarityObjective> kept;
  std::vector<double> kept_w;
  for (std::size_t k = 0; k < w.size(); ++k) {
    require(w[k] >= 0 && std::isfinite(w[k]), "bmmd: weights must be nonnegative");
    if (w[k] > 0) {
      kept.push_back(objs[k]);
      kept_w.push_back(w[k]);
    }
  }
  require(!kept.empty(), "bmmd: at least one weight must be positive");
  ScalarizedObjective scal(std::move(kept), std::move(kept_w));
  BmdSolution sol = solve_bmmd(scal, o.c, o.optimizer);
  Json j = to_json(sol);
  j["components"] = scal.components(sol.center, sol.radius);
  emit(o, j);
}

void cmd_youden(const Options& o) {
  YoudenResult r;
  if (!o.x_values.empty() || !o.y_values.empty()) {
    require(!o.x_values.empty() && !o.y_values.empty(), "youden: need both --x and --y");
    r = youden(EmpiricalCdf(read_values_csv(o.x_values)), EmpiricalCdf(read_values_csv(o.y_values)));
  } else {
    require(o.x_normal.size() == 2 && o.y_normal.size() == 2,
            "youden: give --x/--y sample files or --x-normal/--y-normal mu,sigma");
    require(o.x_normal[1] > 0 && o.y_normal[1] > 0, "youden: normal sigma must be positive");
    boost::math::normal_distribution<double> nx(o.x_normal[0], o.x_normal[1]), ny(o.y_normal[0], o.y_normal[1]);
    const double lo = std::min(o.x_normal[0] - 10 * o.x_normal[1], o.y_normal[0] - 10 * o.y_normal[1]);
    const double hi = std::max(o.x_normal[0] + 10 * o.x_normal[1], o.y_normal[0] + 10 * o.y_normal[1]);
    r = youden([&](double t) { return boost::math::cdf(nx, t); }, [&](double t) { return boost::math::cdf(ny, t); },
               lo, hi);
  }
  emit(o, Json{{"t", r.t}, {"j", r.j}});
}

void cmd_mc_study(const Options& o) {
  MonteCarloConfig cfg;
  cfg.scenario = o.mc_scenario;
  cfg.n = o.n;
  cfg.j = o.grid;
  cfg.gamma = o.gamma;
  cfg.delta = o.delta;
  cfg.replicates = o.replicates;
  cfg.draws = o.mc_draws;
  cfg.c_grid = o.c_grid;
  cfg.seed = o.seed;
  cfg.matern = {o.sigma, o.nu, o.ell};
  cfg.nugget = o.nugget;
  cfg.basis_sizes = o.basis_sizes;
  cfg.degree = o.degree;
  cfg.prior = o.prior;
  cfg.bins_per_dim = o.bins;
  cfg.dic_draws = o.dic_draws;
  cfg.optimizer = o.optimizer;
  cfg.workers = workers(o);
  GheResult res = run_mc_study(cfg);
  std::ostringstream csv;
  write_ghe_csv(csv, cfg, res);
  if (o.out.empty()) std::cout << csv.str();
  else write_text_file(o.out, csv.str());
  std::ostream& summary = o.out.empty() ? std::cerr : std::cout;
  char line[256];
  std::snprintf(line, sizeof line, "replicates %zu ok, %d failed\nmin %.6g  q25 %.6g  median %.6g  q75 %.6g  max %.6g\n",
                res.ghe.size(), res.failures, res.quantile(0), res.quantile(0.25), res.median(), res.quantile(0.75),
                res.quantile(1));
  summary << line;
  for (const auto& e : res.errors) summary << e << "\n";
}

// --- config files ----------------------------------------------------------

std::string json_scalar(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_double(v.get<double>());
  throw InputError("config: unsupported value " + v.dump());
}

// Expands `--config file.json` into flags placed before the command-line
// arguments, so explicit flags take precedence.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      require(k + 1 < args.size(), "--config needs a file");
      config_path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      config_path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  if (config_path.empty() || rest.empty()) return rest;
  CLI::App* sub = app.get_subcommand_no_throw(rest.front());
  require(sub != nullptr, "--config must follow a subcommand name");
  Json cfg = read_json_file(config_path);
  require(cfg.is_object(), "config: top level must be an object");
  std::vector<std::string> out{rest.front()};
  for (const auto& [key, value] : cfg.items()) {
    std::string name = key;
    for (char& ch : name)
      if (ch == '_') ch = '-';
    const CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr) throw InputError("config: unknown key '" + key + "' for " + rest.front());
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + name);
    } else if (value.is_array()) {
      std::string joined;
      for (std::size_t k = 0; k < value.size(); ++k) joined += (k ? "," : "") + json_scalar(value[k]);
      out.push_back("--" + name);
      out.push_back(joined);
    } else {
      out.push_back("--" + name);
      out.push_back(json_scalar(value));
    }
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

void add_optimizer(CLI::App* s, Options& o) {
  s->add_option("--starts-per-dim", o.optimizer.starts_per_dim, "Multistart grid per axis");
  s->add_option("--tolerance", o.optimizer.tolerance, "Simplex diameter tolerance relative to diam(T)");
  s->add_option("--max-evaluations", o.optimizer.max_evaluations, "Objective evaluations per start");
  s->add_option("--nodes", o.nodes, "Quadrature nodes per axis (0: default)");
}

void add_prior(CLI::App* s, Options& o) {
  s->add_option("--intercept-variance", o.prior.intercept_variance);
  s->add_option("--slope-variance", o.prior.slope_variance);
  s->add_option("--noise-shape", o.prior.noise_shape);
  s->add_option("--noise-rate", o.prior.noise_rate);
}

void add_sources(CLI::App* s, Options& o) {
  s->add_option("--truth", o.truth, "Analytic pair: scenario1, scenario2, bump1, bump2");
  s->add_option("--post-x", o.post_x, "Posterior JSON for X");
  s->add_option("--post-y", o.post_y, "Posterior JSON for Y");
  s->add_option("--gamma", o.gamma, "scenario2 scale");
  s->add_option("--delta", o.delta, "scenario2 ratio");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balls of maximum dissimilarity between two processes"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "Random seed");
    s->add_option("--out", o.out, "Output path (stdout when omitted)");
    s->add_option("--threads", o.threads, "Worker threads (default: MAXDISSIM_THREADS or all cores)");
    s->add_option("--config", "JSON file of option values");
  };

  auto* sim = app.add_subcommand("simulate", "Simulate scenario data (gp or pp)");
  common(sim);
  sim->add_option("scenario", o.scenario, "gp or pp")->required();
  sim->add_option("--n", o.n, "Replicates per process");
  sim->add_option("--grid", o.grid, "Grid size J");
  sim->add_option("--sigma", o.sigma);
  sim->add_option("--nu", o.nu);
  sim->add_option("--ell", o.ell);
  sim->add_option("--nugget", o.nugget, "White-noise variance added to each observation");
  sim->add_option("--gamma", o.gamma);
  sim->add_option("--delta", o.delta);

  auto* fit = app.add_subcommand("fit", "Fit a posterior to CSV data");
  common(fit);
  fit->add_option("--data", o.data, "Input CSV")->required();
  fit->add_option("--likelihood", o.likelihood, "gaussian or poisson");
  fit->add_option("--lower", o.lower, "Ground-set lower corner")->delimiter(',');
  fit->add_option("--upper", o.upper, "Ground-set upper corner")->delimiter(',');
  fit->add_option("--basis-sizes", o.basis_sizes, "Candidate basis sizes per axis")->delimiter(',');
  fit->add_option("--degree", o.degree, "Spline degree");
  fit->add_option("--bins", o.bins, "Poisson bins per axis (0: default)");
  fit->add_option("--dic-draws", o.dic_draws, "Posterior draws for DIC");
  add_prior(fit, o);

  auto solver = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    common(s);
    add_sources(s, o);
    add_optimizer(s, o);
    s->add_option("--p", o.p, "L^p exponent");
    return s;
  };

  auto* bmd = solver("bmd", "Ball of maximum dissimilarity");
  bmd->add_option("--c", o.c, "Volume budget")->required();
  bmd->add_option("--m", o.m, "Posterior draws (enables the posterior pipeline)");
  bmd->add_option("--draws-csv", o.draws_csv, "Per-draw CSV in posterior mode");

  auto* hl = solver("hl", "Hardy-Littlewood (ball-averaged) BMD, p = 1");
  hl->add_option("--c", o.c, "Volume budget")->required();
  hl->add_option("--m", o.m, "Posterior draws (enables the posterior pipeline)");
  hl->add_option("--draws-csv", o.draws_csv, "Per-draw CSV in posterior mode");

  auto* curve = solver("curve", "Dissimilarity index over a budget grid");
  curve->add_option("--c-grid", o.c_grid, "Increasing budgets")->delimiter(',')->required();

  auto* bmmd = app.add_subcommand("bmmd", "Scalarized multi-objective BMD");
  common(bmmd);
  add_optimizer(bmmd, o);
  bmmd->add_option("--truths", o.truths, "Analytic pairs")->delimiter(',');
  bmmd->add_option("--posts", o.posts, "Posterior pairs X.json:Y.json")->delimiter(',');
  bmmd->add_option("--w", o.weights, "Weights; zero drops an objective")->delimiter(',');
  bmmd->add_option("--c", o.c, "Volume budget")->required();
  bmmd->add_option("--p", o.p, "L^p exponent");
  bmmd->add_option("--gamma", o.gamma);
  bmmd->add_option("--delta", o.delta);

  auto* yi = app.add_subcommand("youden", "Youden index of two samples or two normal laws");
  common(yi);
  yi->add_option("--x", o.x_values, "Sample CSV for X");
  yi->add_option("--y", o.y_values, "Sample CSV for Y");
  yi->add_option("--x-normal", o.x_normal, "mu,sigma")->delimiter(',');
  yi->add_option("--y-normal", o.y_normal, "mu,sigma")->delimiter(',');

  auto* mc = app.add_subcommand("mc-study", "Monte Carlo GHE study");
  common(mc);
  add_optimizer(mc, o);
  add_prior(mc, o);
  mc->add_option("--scenario", o.mc_scenario, "1 or 2");
  mc->add_option("--n", o.n);
  mc->add_option("--grid", o.grid, "Grid size J");
  mc->add_option("--gamma", o.gamma);
  mc->add_option("--delta", o.delta);
  mc->add_option("--M", o.replicates, "Replicates");
  mc->add_option("--m", o.mc_draws, "Posterior draws per replicate");
  mc->add_option("--c-grid", o.c_grid, "Budgets")->delimiter(',');
  mc->add_option("--basis-sizes", o.basis_sizes)->delimiter(',');
  mc->add_option("--degree", o.degree);
  mc->add_option("--bins", o.bins);
  mc->add_option("--dic-draws", o.dic_draws);
  mc->add_option("--sigma", o.sigma);
  mc->add_option("--nu", o.nu);
  mc->add_option("--ell", o.ell);
  mc->add_option("--nugget", o.nugget);
  o.dic_draws = 500;

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (mc->parsed() && mc->count("--dic-draws") == 0) o.dic_draws = 200;

    if (sim->parsed()) cmd_simulate(o);
    else if (fit->parsed()) cmd_fit(o);
    else if (bmd->parsed()) cmd_solve(o, ObjectiveMode::Subnorm);
    else if (hl->parsed()) {
      if (hl->count("--p") == 0) o.p = 1;
      cmd_solve(o, ObjectiveMode::Averaged);
    } else if (curve->parsed()) cmd_curve(o);
    else if (bmmd->parsed()) cmd_bmmd(o);
    else if (yi->parsed()) cmd_youden(o);
    else if (mc->parsed()) cmd_mc_study(o);
    return 0;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
