#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "maxdissim/dissimilarity.hpp"
#include "maxdissim/inference.hpp"
#include "maxdissim/metrics.hpp"

namespace maxdissim {

using Json = nlohmann::ordered_json;

// CSV layouts. A leading non-numeric line is treated as a header; parse
// errors name the source and the 1-based line number.

/// `replicate,t1[,t2],value`; every replicate must cover the same points in the same order.
GaussianObservations read_gaussian_csv(std::istream& in, const std::string& source = "<input>");
GaussianObservations read_gaussian_csv(const std::string& path);
void write_gaussian_csv(std::ostream& out, const GaussianObservations& data);

/// `t1[,t2]`.
PointPattern read_points_csv(std::istream& in, const std::string& source = "<input>");
PointPattern read_points_csv(const std::string& path);
void write_points_csv(std::ostream& out, const PointPattern& pattern, int dim);

/// `value`.
std::vector<double> read_values_csv(std::istream& in, const std::string& source = "<input>");
std::vector<double> read_values_csv(const std::string& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

Json to_json(const GroundSet& ground);
GroundSet ground_from_json(const Json& j);
Json to_json(const BasisSet& basis);
BasisSet basis_from_json(const Json& j);
Json to_json(const CoefficientPosterior& post);
CoefficientPosterior posterior_from_json(const Json& j);
Json to_json(const BmdSolution& sol);
Json to_json(const PosteriorBmd& post);
Json to_json(const DicSelection& sel);

/// `draw,center1[,center2],radius,index`.
void write_draws_csv(std::ostream& out, const std::vector<BmdSolution>& draws);

/// `scenario,n,J,gamma,delta,replicate,ghe`.
void write_ghe_csv(std::ostream& out, const MonteCarloConfig& cfg, const GheResult& result);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace maxdissim
