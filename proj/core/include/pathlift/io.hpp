#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathlift/dyadic_path.hpp"
#include "pathlift/lift_builder.hpp"
#include "pathlift/nu_transport.hpp"
#include "pathlift/processes.hpp"
#include "pathlift/quantile_transport.hpp"

namespace pathlift::io {

inline constexpr int kSpecVersion = 1;

/// Shortest decimal text that round-trips the double.
std::string format_double(double x);

/// One CSV record (RFC 4180: quoted fields, doubled quotes).
std::vector<std::string> split_csv_record(std::string_view line);
/// Strict numeric parse of a whole field; throws InvalidInput otherwise.
double parse_double(std::string_view field);

// Paths: CSV columns t, x_1..x_d with a header row; JSON {depth, horizon, dim, values}
// where values is an array of points (each an array of dim numbers).
DyadicPath path_from_csv(std::istream& in);
void path_to_csv(const DyadicPath& path, std::ostream& out);
nlohmann::json to_json(const DyadicPath& path);
DyadicPath path_from_json(const nlohmann::json& j);

// Quantile measures: JSON {n, quantiles}; CSV one value per line.
nlohmann::json to_json(const QuantileMeasure& m);
QuantileMeasure quantile_measure_from_json(const nlohmann::json& j);
QuantileMeasure quantile_measure_from_csv(std::istream& in);
void quantile_measure_to_csv(const QuantileMeasure& m, std::ostream& out);

// Ensembles: JSON {dim, labels, positions} (flat arrays); CSV with 2d columns
// per row: label_1..label_d, pos_1..pos_d.
nlohmann::json to_json(const ParticleEnsemble& e);
ParticleEnsemble ensemble_from_json(const nlohmann::json& j);
void ensemble_to_csv(const ParticleEnsemble& e, std::ostream& out);
ParticleEnsemble ensemble_from_csv(std::istream& in, std::size_t dim);

// Path measures: JSON {depth, dim, weights, paths: [[point...]...]}; CSV long
// format path_id, t, x_1..x_d (weights only in JSON).
nlohmann::json to_json(const PathMeasure& pi);
PathMeasure path_measure_from_json(const nlohmann::json& j);
void path_measure_to_csv(const PathMeasure& pi, std::ostream& out);

// Measure paths: JSON {depth, measures: [{n, quantiles}...]}; ensemble paths:
// JSON {depth, dim, labels, positions: [[flat positions]...]} over one label set.
nlohmann::json to_json(const QuantileMeasurePath& mp);
QuantileMeasurePath measure_path_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnsemblePath& ep);
EnsemblePath ensemble_path_from_json(const nlohmann::json& j);

/// Scenario dump {seed, depth, W, marginals}.
nlohmann::json to_json(const ScenarioSample& s);

}  // namespace pathlift::io
