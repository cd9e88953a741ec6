#include "maxdissim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "maxdissim/parallel.hpp"
#include "maxdissim/rng.hpp"

namespace maxdissim {

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  require(!x.empty() && x.size() == y.size(), "trapezoid: need matching nonempty grids");
  if (x.size() == 1) return y[0];
  double acc = 0;
  for (std::size_t k = 1; k < x.size(); ++k) acc += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
  return acc;
}

double ghe_replicate(const std::vector<BmdSolution>& truth, const std::vector<std::vector<BmdSolution>>& draws,
                     const std::vector<double>& c_grid, const GroundSet& ground) {
  require(!c_grid.empty(), "ghe_replicate: empty c grid");
  require(truth.size() == c_grid.size() && draws.size() == c_grid.size(),
          "ghe_replicate: truth and draws must be given on the c grid");
  const std::size_t m = draws.front().size();
  require(m >= 1, "ghe_replicate: no posterior draws");
  std::vector<double> mean_distance(c_grid.size());
  for (std::size_t k = 0; k < c_grid.size(); ++k) {
    require(draws[k].size() == m, "ghe_replicate: draw count differs across c");
    double acc = 0;
    for (const auto& b : draws[k]) acc += hausdorff(truth[k].ball(), b.ball(), ground);
    mean_distance[k] = acc / m;
  }
  return trapezoid(c_grid, mean_distance);
}

std::vector<BmdSolution> truth_bmds(const DissimilarityObjective& truth, const std::vector<double>& c_grid, int t_grid,
                                    int r_grid, const OptimizerConfig& cfg) {
  std::vector<BmdSolution> out;
  for (double c : c_grid) {
    BmdSolution coarse = brute_force_bmd(truth, c, t_grid, r_grid);
    BmdSolution refined = solve_bmd(truth, c, cfg, {coarse.center});
    out.push_back(refined.index >= coarse.index ? refined : coarse);
  }
  return out;
}

void MonteCarloConfig::validate() const {
  require(scenario == 1 || scenario == 2, "MonteCarloConfig: scenario must be 1 or 2");
  require(replicates >= 1 && draws >= 1, "MonteCarloConfig: M and m must be >= 1");
  if (scenario == 1) require(n >= 1 && j >= 2, "MonteCarloConfig: need n >= 1 and J >= 2");
  else require(gamma > 0 && delta > 0, "MonteCarloConfig: gamma and delta must be positive");
  const auto grid = resolved_c_grid();
  const double vol = ground().volume();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    require(grid[k] > 0 && grid[k] <= vol, "MonteCarloConfig: c grid must lie in (0, |T|]");
    require(k == 0 || grid[k] > grid[k - 1], "MonteCarloConfig: c grid must be strictly increasing");
  }
}

GroundSet MonteCarloConfig::ground() const {
  return scenario == 1 ? GroundSet::interval(0, 1) : Scenario2Config{gamma, delta}.ground();
}

std::vector<double> MonteCarloConfig::resolved_c_grid() const {
  if (!c_grid.empty()) return c_grid;
  const double vol = ground().volume();
  std::vector<double> g(10);
  for (int k = 0; k < 10; ++k) g[k] = vol * (0.05 + 0.05 * k);
  return g;
}

std::vector<int> MonteCarloConfig::resolved_basis_sizes() const {
  if (!basis_sizes.empty()) return basis_sizes;
  if (scenario == 2) return {3, 4, 5};
  std::vector<int> sizes;
  for (int s : {4, 6, 8, 10, 12, 15, 20})
    if (s <= j) sizes.push_back(s);
  return sizes;
}

double GheResult::quantile(double q) const {
  require(!ghe.empty(), "GheResult: no values");
  std::vector<double> v = ghe;
  std::sort(v.begin(), v.end());
  double pos = q * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

namespace {

DissimilarityObjective truth_objective(const MonteCarloConfig& cfg) {
  if (cfg.scenario == 1) {
    auto [x, y] = scenario1_parameters();
    return DissimilarityObjective(x, y, cfg.p(), cfg.ground());
  }
  auto [x, y] = scenario2_intensity({cfg.gamma, cfg.delta});
  return DissimilarityObjective(x, y, cfg.p(), cfg.ground());
}

}  // namespace

double run_mc_replicate(const MonteCarloConfig& cfg, const std::vector<BmdSolution>& truth, int replicate) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(replicate);
  const GroundSet ground = cfg.ground();
  const auto sizes = cfg.resolved_basis_sizes();
  const auto c_grid = cfg.resolved_c_grid();

  std::optional<CoefficientPosterior> post_x, post_y;
  if (cfg.scenario == 1) {
    auto [mx, my] = scenario1_parameters();
    const auto grid = scenario1_grid(cfg.j);
    auto dx = sample_gp(mx, cfg.matern, grid, cfg.n, derive_seed(seed, 1), cfg.nugget);
    auto dy = sample_gp(my, cfg.matern, grid, cfg.n, derive_seed(seed, 2), cfg.nugget);
    post_x = select_basis_by_dic(dx, ground, sizes, cfg.prior, cfg.degree, cfg.dic_draws, derive_seed(seed, 3)).fit;
    post_y = select_basis_by_dic(dy, ground, sizes, cfg.prior, cfg.degree, cfg.dic_draws, derive_seed(seed, 4)).fit;
  } else {
    auto [lx, ly] = scenario2_intensity({cfg.gamma, cfg.delta});
    auto px = sample_poisson_process(lx, ground, derive_seed(seed, 1));
    auto py = sample_poisson_process(ly, ground, derive_seed(seed, 2));
    post_x = select_basis_by_dic(px, ground, sizes, cfg.prior, cfg.degree, cfg.bins_per_dim, cfg.dic_draws,
                                 derive_seed(seed, 3)).fit;
    post_y = select_basis_by_dic(py, ground, sizes, cfg.prior, cfg.degree, cfg.bins_per_dim, cfg.dic_draws,
                                 derive_seed(seed, 4)).fit;
  }

  const auto trajectories = posterior_trajectories(*post_x, *post_y, cfg.draws, derive_seed(seed, 5));
  std::vector<std::vector<BmdSolution>> draws(c_grid.size(), std::vector<BmdSolution>(cfg.draws));
  for (int i = 0; i < cfg.draws; ++i) {
    DissimilarityObjective obj(trajectories[i].first, trajectories[i].second, cfg.p(), ground);
    auto curve = dissimilarity_curve(obj, c_grid, cfg.optimizer);
    for (std::size_t k = 0; k < c_grid.size(); ++k) draws[k][i] = std::move(curve[k]);
  }
  return ghe_replicate(truth, draws, c_grid, ground);
}

GheResult run_mc_study(const MonteCarloConfig& cfg) {
  cfg.validate();
  const auto c_grid = cfg.resolved_c_grid();
  const int d = cfg.ground().dim();
  const int t_grid = cfg.truth_t_grid > 0 ? cfg.truth_t_grid : (d == 1 ? 201 : 41);
  const auto truth = truth_bmds(truth_objective(cfg), c_grid, t_grid, cfg.truth_r_grid, cfg.optimizer);

  std::vector<double> values(cfg.replicates, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(cfg.replicates);
  parallel_for(
      cfg.replicates,
      [&](std::size_t j) {
        try {
          values[j] = run_mc_replicate(cfg, truth, static_cast<int>(j));
        } catch (const std::exception& e) {
          errors[j] = e.what();
        }
      },
      cfg.workers > 0 ? cfg.workers : worker_count());

  GheResult result;
  for (int j = 0; j < cfg.replicates; ++j) {
    if (std::isfinite(values[j])) {
      result.replicate.push_back(j);
      result.ghe.push_back(values[j]);
    } else {
      ++result.failures;
      result.errors.push_back("replicate " + std::to_string(j) + ": " + (errors[j].empty() ? "non-finite GHE" : errors[j]));
    }
  }
  if (result.failures * 10 > cfg.replicates) {
    std::string msg = "run_mc_study: " + std::to_string(result.failures) + " of " + std::to_string(cfg.replicates) +
                      " replicates failed";
    if (!result.errors.empty()) msg += "; first: " + result.errors.front();
    throw NumericalError(msg);
  }
  return result;
}

}  // namespace maxdissim
