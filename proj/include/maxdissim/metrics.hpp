#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maxdissim/dissimilarity.hpp"
#include "maxdissim/inference.hpp"
#include "maxdissim/simulate.hpp"

namespace maxdissim {

/// Trapezoid rule; a single abscissa returns its ordinate.
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

/// (1/m) sum_i integral over c of D_H(B*_c, B_c^[i]), trapezoid on c_grid.
/// draws[k][i] is the i-th posterior BMD at c_grid[k].
double ghe_replicate(const std::vector<BmdSolution>& truth, const std::vector<std::vector<BmdSolution>>& draws,
                     const std::vector<double>& c_grid, const GroundSet& ground);

/// Truth BMDs per budget: brute-force grid argmax refined by the solver.
std::vector<BmdSolution> truth_bmds(const DissimilarityObjective& truth, const std::vector<double>& c_grid,
                                    int t_grid, int r_grid, const OptimizerConfig& cfg = {});

struct MonteCarloConfig {
  int scenario = 1;
  int n = 10;            ///< scenario 1 replicates per process
  int j = 10;            ///< scenario 1 grid size
  double gamma = 25;     ///< scenario 2
  double delta = 2;      ///< scenario 2
  int replicates = 50;   ///< M
  int draws = 200;       ///< m
  std::vector<double> c_grid;  ///< empty: 10 points on [0.05, 0.5] |T|
  std::uint64_t seed = 1;
  MaternParams matern;
  double nugget = 0;
  std::vector<int> basis_sizes;  ///< empty: scenario default
  int degree = 3;
  GaussianPrior prior;
  int bins_per_dim = 0;
  int dic_draws = 200;
  OptimizerConfig optimizer;
  int truth_t_grid = 0;  ///< 0: 201 (d=1) / 41 (d=2)
  int truth_r_grid = 11;
  int workers = 0;       ///< 0: worker_count()

  void validate() const;
  GroundSet ground() const;
  double p() const { return scenario == 1 ? 1.0 : 2.0; }
  std::vector<double> resolved_c_grid() const;
  std::vector<int> resolved_basis_sizes() const;
};

struct GheResult {
  std::vector<int> replicate;
  std::vector<double> ghe;
  int failures = 0;
  std::vector<std::string> errors;

  double quantile(double q) const;
  double median() const { return quantile(0.5); }
};

/// One replicate of the study; exposed for tests and the CLI.
double run_mc_replicate(const MonteCarloConfig& cfg, const std::vector<BmdSolution>& truth, int replicate);

GheResult run_mc_study(const MonteCarloConfig& cfg);

}  // namespace maxdissim
