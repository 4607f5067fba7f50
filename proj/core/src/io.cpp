#include "pathlift/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <set>

#include "pathlift/error.hpp"

namespace pathlift::io {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_record(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty() || was_quoted) throw InvalidInput("stray quote inside CSV field");
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      if (was_quoted) throw InvalidInput("text after closing quote in CSV field");
      field += c;
    }
  }
  if (quoted) throw InvalidInput("unterminated quoted CSV field");
  out.push_back(std::move(field));
  return out;
}

double parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v))
    throw InvalidInput("not a finite number: '" + std::string(field) + "'");
  return v;
}

namespace {

std::vector<std::vector<std::string>> read_records(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_record(line));
  }
  return rows;
}

int depth_for_points(std::size_t points) {
  if (points < 2) throw InvalidInput("a dyadic path needs at least 2 points");
  const std::size_t intervals = points - 1;
  if ((intervals & (intervals - 1)) != 0) throw InvalidInput("point count must be 2^depth + 1");
  int depth = 0;
  while ((std::size_t{1} << depth) < intervals) ++depth;
  return depth;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw InvalidInput(std::string(what) + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) throw InvalidInput(std::string("unknown key '") + key + "' in " + what);
}

const json& require(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(std::string("missing key '") + key + "' in " + what);
  return *it;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + " must be a number");
  return j.get<double>();
}

std::size_t count(const json& j, const char* what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw InvalidInput(std::string(what) + " must be a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<double> number_array(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(number(x, what));
  return v;
}

json points_json(const DyadicPath& p) {
  json pts = json::array();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto x = p.point(k);
    pts.push_back(std::vector<double>(x.begin(), x.end()));
  }
  return pts;
}

std::vector<double> flat_points(const json& j, std::size_t dim, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of points");
  std::vector<double> v;
  v.reserve(j.size() * dim);
  for (const auto& pt : j) {
    const auto x = number_array(pt, what);
    if (x.size() != dim) throw InvalidInput(std::string(what) + ": point has the wrong dimension");
    v.insert(v.end(), x.begin(), x.end());
  }
  return v;
}

}  // namespace

DyadicPath path_from_csv(std::istream& in) {
  const auto rows = read_records(in);
  if (rows.empty()) throw InvalidInput("empty path CSV");
  const auto& header = rows.front();
  if (header.size() < 2 || header[0] != "t") throw InvalidInput("path CSV header must be t,x_1,...");
  const std::size_t dim = header.size() - 1;
  const std::size_t points = rows.size() - 1;
  const int depth = depth_for_points(points);
  std::vector<double> times(points), values;
  values.reserve(points * dim);
  for (std::size_t k = 0; k < points; ++k) {
    const auto& r = rows[k + 1];
    if (r.size() != header.size())
      throw InvalidInput("path CSV row " + std::to_string(k + 2) + " has " + std::to_string(r.size()) +
                         " fields, expected " + std::to_string(header.size()));
    times[k] = parse_double(r[0]);
    for (std::size_t c = 0; c < dim; ++c) values.push_back(parse_double(r[c + 1]));
  }
  const double horizon = times.back();
  if (times.front() != 0.0 || !(horizon > 0.0)) throw InvalidInput("path times must run from 0 to a positive horizon");
  for (std::size_t k = 0; k < points; ++k) {
    const double expected = horizon * static_cast<double>(k) / static_cast<double>(points - 1);
    if (std::abs(times[k] - expected) > 1e-9 * horizon)
      throw InvalidInput("path times are not a uniform dyadic grid");
  }
  return DyadicPath(depth, dim, std::move(values), horizon);
}

void path_to_csv(const DyadicPath& path, std::ostream& out) {
  out << 't';
  for (std::size_t c = 0; c < path.dim(); ++c) out << ",x_" << c + 1;
  out << '\n';
  for (std::size_t k = 0; k < path.size(); ++k) {
    out << format_double(path.time(k));
    for (double v : path.point(k)) out << ',' << format_double(v);
    out << '\n';
  }
}

json to_json(const DyadicPath& path) {
  return json{{"depth", path.depth()}, {"horizon", path.horizon()}, {"dim", path.dim()}, {"values", points_json(path)}};
}

DyadicPath path_from_json(const json& j) {
  reject_unknown_keys(j, {"depth", "horizon", "dim", "values"}, "path");
  const double depth = number(require(j, "depth", "path"), "depth");
  if (depth != std::floor(depth)) throw InvalidInput("depth must be an integer");
  const std::size_t dim = j.contains("dim") ? count(j["dim"], "dim") : 1;
  const double horizon = j.contains("horizon") ? number(j["horizon"], "horizon") : 1.0;
  auto values = flat_points(require(j, "values", "path"), dim, "values");
  return DyadicPath(static_cast<int>(depth), dim, std::move(values), horizon);
}

json to_json(const QuantileMeasure& m) {
  return json{{"n", m.size()}, {"quantiles", std::vector<double>(m.quantiles().begin(), m.quantiles().end())}};
}

QuantileMeasure quantile_measure_from_json(const json& j) {
  reject_unknown_keys(j, {"n", "quantiles"}, "quantile measure");
  auto q = number_array(require(j, "quantiles", "quantile measure"), "quantiles");
  if (j.contains("n") && count(j["n"], "n") != q.size()) throw InvalidInput("n does not match the quantile count");
  return QuantileMeasure(std::move(q));
}

QuantileMeasure quantile_measure_from_csv(std::istream& in) {
  std::vector<double> q;
  for (const auto& r : read_records(in)) {
    if (r.size() != 1) throw InvalidInput("quantile CSV needs one value per line");
    q.push_back(parse_double(r[0]));
  }
  return QuantileMeasure(std::move(q));
}

void quantile_measure_to_csv(const QuantileMeasure& m, std::ostream& out) {
  for (double v : m.quantiles()) out << format_double(v) << '\n';
}

json to_json(const ParticleEnsemble& e) {
  const auto l = e.labels().values();
  const auto p = e.positions();
  return json{{"dim", e.dim()},
              {"labels", std::vector<double>(l.begin(), l.end())},
              {"positions", std::vector<double>(p.begin(), p.end())}};
}

ParticleEnsemble ensemble_from_json(const json& j) {
  reject_unknown_keys(j, {"dim", "labels", "positions"}, "ensemble");
  const std::size_t dim = count(require(j, "dim", "ensemble"), "dim");
  auto labels = std::make_shared<const LabelSet>(dim, number_array(require(j, "labels", "ensemble"), "labels"));
  return ParticleEnsemble(std::move(labels), number_array(require(j, "positions", "ensemble"), "positions"));
}

void ensemble_to_csv(const ParticleEnsemble& e, std::ostream& out) {
  for (std::size_t c = 0; c < e.dim(); ++c) out << (c ? "," : "") << "label_" << c + 1;
  for (std::size_t c = 0; c < e.dim(); ++c) out << ",pos_" << c + 1;
  out << '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    bool first = true;
    for (double v : e.labels().label(i)) {
      out << (first ? "" : ",") << format_double(v);
      first = false;
    }
    for (double v : e.position(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

ParticleEnsemble ensemble_from_csv(std::istream& in, std::size_t dim) {
  if (dim == 0) throw InvalidInput("ensemble dimension must be positive");
  const auto rows = read_records(in);
  if (rows.size() < 2) throw InvalidInput("ensemble CSV needs a header and at least one row");
  if (rows.front().size() != 2 * dim) throw InvalidInput("ensemble CSV header must have 2*dim columns");
  std::vector<double> labels, positions;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 2 * dim) throw InvalidInput("ensemble CSV row " + std::to_string(i + 1) + " has the wrong width");
    for (std::size_t c = 0; c < dim; ++c) labels.push_back(parse_double(r[c]));
    for (std::size_t c = 0; c < dim; ++c) positions.push_back(parse_double(r[dim + c]));
  }
  return ParticleEnsemble(std::make_shared<const LabelSet>(dim, std::move(labels)), std::move(positions));
}

json to_json(const PathMeasure& pi) {
  json paths = json::array();
  for (const auto& p : pi.paths()) paths.push_back(points_json(p));
  return json{{"depth", pi.depth()}, {"dim", pi.dim()}, {"weights", pi.weights()}, {"paths", std::move(paths)}};
}

PathMeasure path_measure_from_json(const json& j) {
  reject_unknown_keys(j, {"depth", "dim", "weights", "paths"}, "path measure");
  const double depth = number(require(j, "depth", "path measure"), "depth");
  if (depth != std::floor(depth)) throw InvalidInput("depth must be an integer");
  const std::size_t dim = count(require(j, "dim", "path measure"), "dim");
  auto weights = number_array(require(j, "weights", "path measure"), "weights");
  const auto& pj = require(j, "paths", "path measure");
  if (!pj.is_array()) throw InvalidInput("paths must be an array");
  std::vector<DyadicPath> paths;
  for (const auto& p : pj) paths.emplace_back(static_cast<int>(depth), dim, flat_points(p, dim, "paths"));
  return PathMeasure(std::move(paths), std::move(weights));
}

void path_measure_to_csv(const PathMeasure& pi, std::ostream& out) {
  out << "path_id,t";
  for (std::size_t c = 0; c < pi.dim(); ++c) out << ",x_" << c + 1;
  out << '\n';
  for (std::size_t j = 0; j < pi.size(); ++j) {
    const auto& p = pi.paths()[j];
    for (std::size_t k = 0; k < p.size(); ++k) {
      out << j << ',' << format_double(p.time(k));
      for (double v : p.point(k)) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

json to_json(const QuantileMeasurePath& mp) {
  json ms = json::array();
  for (const auto& m : mp.measures) ms.push_back(to_json(m));
  return json{{"depth", mp.depth}, {"measures", std::move(ms)}};
}

QuantileMeasurePath measure_path_from_json(const json& j) {
  reject_unknown_keys(j, {"depth", "measures"}, "measure path");
  const double depth = number(require(j, "depth", "measure path"), "depth");
  if (depth != std::floor(depth)) throw InvalidInput("depth must be an integer");
  const auto& ms = require(j, "measures", "measure path");
  if (!ms.is_array()) throw InvalidInput("measures must be an array");
  QuantileMeasurePath mp{static_cast<int>(depth), {}};
  for (const auto& m : ms) mp.measures.push_back(quantile_measure_from_json(m));
  mp.validate();
  return mp;
}

json to_json(const EnsemblePath& ep) {
  ep.validate();
  const auto& first = ep.ensembles.front();
  const auto l = first.labels().values();
  json pos = json::array();
  for (const auto& e : ep.ensembles) pos.push_back(std::vector<double>(e.positions().begin(), e.positions().end()));
  return json{{"depth", ep.depth},
              {"dim", first.dim()},
              {"labels", std::vector<double>(l.begin(), l.end())},
              {"positions", std::move(pos)}};
}

EnsemblePath ensemble_path_from_json(const json& j) {
  reject_unknown_keys(j, {"depth", "dim", "labels", "positions"}, "ensemble path");
  const double depth = number(require(j, "depth", "ensemble path"), "depth");
  if (depth != std::floor(depth)) throw InvalidInput("depth must be an integer");
  const std::size_t dim = count(require(j, "dim", "ensemble path"), "dim");
  auto labels = std::make_shared<const LabelSet>(dim, number_array(require(j, "labels", "ensemble path"), "labels"));
  const auto& pos = require(j, "positions", "ensemble path");
  if (!pos.is_array()) throw InvalidInput("positions must be an array");
  EnsemblePath ep{static_cast<int>(depth), {}};
  for (const auto& p : pos) ep.ensembles.emplace_back(labels, number_array(p, "positions"));
  ep.validate();
  return ep;
}

json to_json(const ScenarioSample& s) {
  json marginals = json::array();
  for (const auto& m : s.measures.measures)
    marginals.push_back(std::vector<double>(m.quantiles().begin(), m.quantiles().end()));
  const auto w = s.common.path().values();
  json j{{"seed", s.seed},
         {"depth", s.measures.depth},
         {"W", std::vector<double>(w.begin(), w.end())},
         {"marginals", std::move(marginals)}};
  if (s.lift) j["lift"] = to_json(*s.lift);
  return j;
}

}  // namespace pathlift::io
