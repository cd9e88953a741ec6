#include "maxdissim/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace maxdissim {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& field, double& out) {
  std::string f = trim(field);
  if (f.empty()) return false;
  const char* first = f.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, f.data() + f.size(), out);
  return ec == std::errc() && ptr == f.data() + f.size();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Rows of numbers, header and blank lines skipped, with their line numbers.
struct NumericRows {
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;
};

NumericRows read_rows(std::istream& in, const std::string& source, std::size_t min_fields, std::size_t max_fields) {
  NumericRows out;
  std::string line;
  int lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size() && numeric; ++k) numeric = parse_number(fields[k], row[k]);
    if (!numeric) {
      if (!seen_content) {
        seen_content = true;
        continue;
      }
      throw InputError(source + ":" + std::to_string(lineno) + ": malformed row '" + trim(line) + "'");
    }
    seen_content = true;
    if (fields.size() < min_fields || fields.size() > max_fields)
      throw InputError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(min_fields) +
                       (max_fields > min_fields ? "-" + std::to_string(max_fields) : "") + " fields, got " +
                       std::to_string(fields.size()));
    if (!out.rows.empty() && row.size() != out.rows.front().size())
      throw InputError(source + ":" + std::to_string(lineno) + ": inconsistent field count");
    for (double v : row)
      if (!std::isfinite(v)) throw InputError(source + ":" + std::to_string(lineno) + ": non-finite value");
    out.rows.push_back(std::move(row));
    out.lines.push_back(lineno);
  }
  return out;
}

std::string point_header(int dim, const std::string& prefix) {
  std::string h;
  for (int k = 0; k < dim; ++k) h += (k ? "," : "") + prefix + std::to_string(k + 1);
  return h;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw InputError(what + " must be an array of numbers");
    v[k] = j[k].get<double>();
  }
  return v;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing JSON field '") + key + "'");
  return j.at(key);
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

GaussianObservations read_gaussian_csv(std::istream& in, const std::string& source) {
  auto rows = read_rows(in, source, 3, 4);
  if (rows.rows.empty()) throw InputError(source + ": no observations");
  const int dim = static_cast<int>(rows.rows.front().size()) - 2;

  std::vector<double> ids;
  std::map<double, std::vector<std::size_t>> by_replicate;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    double id = rows.rows[i][0];
    if (!by_replicate.count(id)) ids.push_back(id);
    by_replicate[id].push_back(i);
  }

  GaussianObservations data;
  const auto& first = by_replicate[ids.front()];
  for (std::size_t i : first) {
    Point t(dim);
    for (int k = 0; k < dim; ++k) t[k] = rows.rows[i][1 + k];
    data.points.push_back(t);
  }
  data.values.resize(ids.size(), first.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto& idx = by_replicate[ids[r]];
    if (idx.size() != first.size())
      throw InputError(source + ":" + std::to_string(rows.lines[idx.back()]) + ": replicate " +
                       format_double(ids[r]) + " has " + std::to_string(idx.size()) + " points, expected " +
                       std::to_string(first.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
      const auto& row = rows.rows[idx[c]];
      for (int k = 0; k < dim; ++k)
        if (row[1 + k] != data.points[c][k])
          throw InputError(source + ":" + std::to_string(rows.lines[idx[c]]) +
                           ": observation points differ between replicates");
      data.values(r, c) = row[1 + dim];
    }
  }
  return data;
}

GaussianObservations read_gaussian_csv(const std::string& path) {
  auto in = open_input(path);
  return read_gaussian_csv(in, path);
}

void write_gaussian_csv(std::ostream& out, const GaussianObservations& data) {
  const int dim = data.points.empty() ? 1 : static_cast<int>(data.points.front().size());
  out << "replicate," << point_header(dim, "t") << ",value\n";
  for (int r = 0; r < data.replicates(); ++r)
    for (std::size_t c = 0; c < data.points.size(); ++c) {
      out << r + 1;
      for (int k = 0; k < dim; ++k) out << ',' << format_double(data.points[c][k]);
      out << ',' << format_double(data.values(r, c)) << '\n';
    }
}

PointPattern read_points_csv(std::istream& in, const std::string& source) {
  auto rows = read_rows(in, source, 1, 2);
  PointPattern p;
  for (const auto& row : rows.rows) p.points.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), row.size()));
  return p;
}

PointPattern read_points_csv(const std::string& path) {
  auto in = open_input(path);
  return read_points_csv(in, path);
}

void write_points_csv(std::ostream& out, const PointPattern& pattern, int dim) {
  out << point_header(dim, "t") << '\n';
  for (const auto& t : pattern.points) {
    for (int k = 0; k < dim; ++k) out << (k ? "," : "") << format_double(t[k]);
    out << '\n';
  }
}

std::vector<double> read_values_csv(std::istream& in, const std::string& source) {
  auto rows = read_rows(in, source, 1, 1);
  std::vector<double> v;
  for (const auto& row : rows.rows) v.push_back(row[0]);
  if (v.empty()) throw InputError(source + ": no values");
  return v;
}

std::vector<double> read_values_csv(const std::string& path) {
  auto in = open_input(path);
  return read_values_csv(in, path);
}

Json to_json(const GroundSet& ground) {
  Json lo = Json::array(), hi = Json::array();
  for (int k = 0; k < ground.dim(); ++k) {
    lo.push_back(ground.lower(k));
    hi.push_back(ground.upper(k));
  }
  return {{"lower", lo}, {"upper", hi}};
}

GroundSet ground_from_json(const Json& j) {
  Eigen::VectorXd lo = vector_from_json(field(j, "lower"), "ground.lower");
  Eigen::VectorXd hi = vector_from_json(field(j, "upper"), "ground.upper");
  return GroundSet(lo, hi);
}

Json to_json(const BasisSet& basis) {
  static const char* kinds[] = {"constant", "bspline-1d", "tensor-bspline-2d"};
  Json j = {{"kind", kinds[static_cast<int>(basis.kind())]}, {"degree", basis.degree()}};
  j["interior_knots"] = basis.interior_knots();
  j["ground"] = to_json(basis.ground());
  return j;
}

BasisSet basis_from_json(const Json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  GroundSet ground = ground_from_json(field(j, "ground"));
  if (kind == "constant") return BasisSet::constant(ground);
  const int degree = field(j, "degree").get<int>();
  auto knots = field(j, "interior_knots").get<std::vector<std::vector<double>>>();
  if (kind == "bspline-1d") {
    require(knots.size() == 1, "basis: bspline-1d needs one knot vector");
    return BasisSet::bspline(ground, degree, knots[0]);
  }
  if (kind == "tensor-bspline-2d") {
    require(knots.size() == 2, "basis: tensor-bspline-2d needs two knot vectors");
    return BasisSet::tensor_bspline(ground, degree, {knots[0], knots[1]});
  }
  throw InputError("unknown basis kind '" + kind + "'");
}

Json to_json(const CoefficientPosterior& post) {
  Json j;
  j["likelihood"] = to_string(post.likelihood);
  j["link"] = to_string(post.link);
  j["basis"] = to_json(post.basis);
  j["mean"] = vector_json(post.mean);
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < post.covariance_factor.rows(); ++r)
    rows.push_back(vector_json(post.covariance_factor.row(r).head(r + 1).transpose()));
  j["covariance_factor"] = rows;
  if (post.noise) j["noise"] = {{"shape", post.noise->shape}, {"rate", post.noise->rate}};
  if (post.bins_per_dim > 0) j["bins_per_dim"] = post.bins_per_dim;
  if (post.newton_iterations > 0) j["newton_iterations"] = post.newton_iterations;
  return j;
}

CoefficientPosterior posterior_from_json(const Json& j) {
  try {
    CoefficientPosterior post;
    post.likelihood = likelihood_from_string(field(j, "likelihood").get<std::string>());
    post.link = link_from_string(field(j, "link").get<std::string>());
    post.basis = basis_from_json(field(j, "basis"));
    post.mean = vector_from_json(field(j, "mean"), "posterior.mean");
    const int dim = static_cast<int>(post.mean.size());
    require(dim == post.basis.size() + 1, "posterior: mean length must be B + 1");
    const Json& rows = field(j, "covariance_factor");
    require(rows.is_array() && static_cast<int>(rows.size()) == dim, "posterior: covariance_factor must have B + 1 rows");
    post.covariance_factor = Eigen::MatrixXd::Zero(dim, dim);
    for (int r = 0; r < dim; ++r) {
      Eigen::VectorXd row = vector_from_json(rows[r], "posterior.covariance_factor");
      require(row.size() == r + 1, "posterior: covariance_factor must be lower triangular rows");
      post.covariance_factor.row(r).head(r + 1) = row.transpose();
    }
    if (j.contains("noise"))
      post.noise = NoisePosterior{field(j["noise"], "shape").get<double>(), field(j["noise"], "rate").get<double>()};
    require(post.likelihood != Likelihood::GaussianConjugate || post.noise.has_value(),
            "posterior: gaussian posterior needs a noise block");
    post.bins_per_dim = j.value("bins_per_dim", 0);
    post.newton_iterations = j.value("newton_iterations", 0);
    return post;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("posterior JSON: ") + e.what());
  }
}

Json to_json(const BmdSolution& sol) {
  Json j;
  j["c"] = sol.budget;
  j["p"] = sol.p;
  j["center"] = vector_json(sol.center);
  j["radius"] = sol.radius;
  j["index"] = sol.index;
  const auto& d = sol.diagnostics;
  j["diagnostics"] = {{"starts", d.starts},           {"evaluations", d.evaluations},
                      {"joint_search", d.joint_search}, {"non_unique", d.non_unique},
                      {"runner_up_value", d.runner_up_value}, {"runner_up_distance", d.runner_up_distance}};
  return j;
}

Json to_json(const PosteriorBmd& post) {
  const auto& s = post.summary;
  Json j;
  j["c"] = post.budget;
  j["m"] = post.draws.size();
  j["mean_center"] = vector_json(s.mean_center);
  j["median_center"] = vector_json(s.median_center);
  j["mean_radius"] = s.mean_radius;
  j["median_radius"] = s.median_radius;
  j["mean_index"] = s.mean_index;
  j["median_index"] = s.median_index;
  j["non_unique_draws"] = s.non_unique_draws;
  return j;
}

Json to_json(const DicSelection& sel) {
  Json cands = Json::array();
  for (const auto& c : sel.candidates) {
    Json e = {{"size", c.size}, {"ok", c.ok}};
    if (c.ok) e["dic"] = c.dic;
    else e["error"] = c.error;
    cands.push_back(e);
  }
  return {{"selected_size", sel.size}, {"candidates", cands}};
}

void write_draws_csv(std::ostream& out, const std::vector<BmdSolution>& draws) {
  const int dim = draws.empty() ? 1 : static_cast<int>(draws.front().center.size());
  out << "draw," << point_header(dim, "center") << ",radius,index\n";
  for (std::size_t i = 0; i < draws.size(); ++i) {
    out << i + 1;
    for (int k = 0; k < dim; ++k) out << ',' << format_double(draws[i].center[k]);
    out << ',' << format_double(draws[i].radius) << ',' << format_double(draws[i].index) << '\n';
  }
}

void write_ghe_csv(std::ostream& out, const MonteCarloConfig& cfg, const GheResult& result) {
  out << "scenario,n,J,gamma,delta,replicate,ghe\n";
  for (std::size_t k = 0; k < result.ghe.size(); ++k) {
    out << cfg.scenario << ',';
    if (cfg.scenario == 1) out << cfg.n << ',' << cfg.j << ",,";
    else out << ",," << format_double(cfg.gamma) << ',' << format_double(cfg.delta);
    out << ',' << result.replicate[k] + 1 << ',' << format_double(result.ghe[k]) << '\n';
  }
}

Json read_json_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace maxdissim
