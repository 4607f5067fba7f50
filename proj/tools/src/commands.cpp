#include "pathlift_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathlift/error.hpp"
#include "pathlift/io.hpp"
#include "pathlift/lift_builder.hpp"
#include "pathlift/mc_estimator.hpp"
#include "pathlift/nu_transport.hpp"
#include "pathlift/path_norms.hpp"
#include "pathlift/processes.hpp"
#include "pathlift/quantile_transport.hpp"
#include "pathlift/rng.hpp"

namespace pathlift::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config

class Config {
public:
  Config(const std::optional<std::string>& path, std::set<std::string> allowed, std::string what)
      : what_(std::move(what)) {
    allowed.insert("spec_version");
    allowed.insert("seed");
    if (!path) {
      j_ = json::object();
      base_ = fs::current_path();
      return;
    }
    std::ifstream in(*path);
    if (!in) throw InvalidInput("cannot open config '" + *path + "'");
    try {
      j_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InvalidInput("config '" + *path + "' is not valid JSON: " + e.what());
    }
    if (!j_.is_object()) throw InvalidInput("config must be a JSON object");
    base_ = fs::absolute(fs::path(*path)).parent_path();
    if (!j_.contains("spec_version")) throw InvalidInput("config lacks \"spec_version\"");
    if (!j_["spec_version"].is_number_integer() || j_["spec_version"].get<long long>() != io::kSpecVersion)
      throw InvalidInput("unsupported spec_version (expected " + std::to_string(io::kSpecVersion) + ")");
    for (const auto& [key, value] : j_.items())
      if (!allowed.contains(key)) throw InvalidInput("unknown key '" + key + "' in " + what_ + " config");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw InvalidInput(std::string("config key '") + key + "' must be a number");
    return v.get<double>();
  }

  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw InvalidInput(std::string("config key '") + key + "' must be an integer");
    return v.get<long long>();
  }

  std::size_t count(const char* key, std::size_t fallback, std::size_t min = 1) const {
    const long long v = integer(key, static_cast<long long>(fallback));
    if (v < static_cast<long long>(min))
      throw InvalidInput(std::string("config key '") + key + "' must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }

  std::uint64_t seed(std::uint64_t fallback) const {
    if (!has("seed")) return fallback;
    const auto& v = j_.at("seed");
    if (!v.is_number_unsigned()) throw InvalidInput("config key 'seed' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw InvalidInput(std::string("config key '") + key + "' must be true or false");
    return v.get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw InvalidInput(std::string("config key '") + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw InvalidInput(std::string("config key '") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw InvalidInput(std::string("config key '") + key + "' must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  /// File names are resolved against the config file's directory.
  fs::path file(const std::string& name) const {
    const fs::path p(name);
    return p.is_absolute() ? p : base_ / p;
  }

private:
  json j_;
  fs::path base_;
  std::string what_;
};

// ---------------------------------------------------------------- output

class Sink {
public:
  explicit Sink(const std::optional<std::string>& dir) : dir_(dir) {}

  void add(std::string name, std::string content, bool primary = false) {
    if (primary) primary_ = files_.size();
    files_.emplace_back(std::move(name), std::move(content));
  }

  void finish(std::ostream& out) const {
    if (!dir_) {
      if (primary_ < files_.size()) out << files_[primary_].second;
      return;
    }
    std::error_code ec;
    fs::create_directories(*dir_, ec);
    if (ec) throw InvalidInput("cannot create output directory '" + *dir_ + "': " + ec.message());
    for (const auto& [name, content] : files_) {
      const fs::path p = fs::path(*dir_) / name;
      std::ofstream f(p, std::ios::binary);
      if (!f) throw InvalidInput("cannot write '" + p.string() + "'");
      f << content;
      out << "wrote " << p.string() << '\n';
    }
  }

private:
  std::optional<std::string> dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::size_t primary_ = static_cast<std::size_t>(-1);
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string fmt(double x) { return io::format_double(x); }

json spec_json(const NormSpec& s) {
  json j{{"kind", to_string(s.kind)}, {"p", s.p}};
  if (s.kind == NormKind::holder) j["gamma"] = s.gamma;
  if (s.kind == NormKind::frac_sobolev || s.kind == NormKind::besov) j["alpha"] = s.alpha;
  return j;
}

NormSpec spec_from_json(const json& j, NormSpec fallback) {
  if (!j.is_object()) throw InvalidInput("norm entries must be objects");
  for (const auto& [key, value] : j.items())
    if (key != "kind" && key != "alpha" && key != "p" && key != "gamma")
      throw InvalidInput("unknown key '" + key + "' in norm entry");
  NormSpec s = fallback;
  auto num = [&](const char* k, double& dst) {
    if (!j.contains(k)) return;
    if (!j[k].is_number()) throw InvalidInput(std::string("norm key '") + k + "' must be a number");
    dst = j[k].get<double>();
  };
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw InvalidInput("norm kind must be a string");
    s.kind = parse_norm_kind(j["kind"].get<std::string>());
  }
  num("alpha", s.alpha);
  num("p", s.p);
  num("gamma", s.gamma);
  s.validate();
  return s;
}

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidInput("cannot open '" + p.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

bool is_json_file(const fs::path& p) { return p.extension() == ".json"; }

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidInput("cannot open '" + p.string() + "'");
  return in;
}

std::uint64_t base_seed(const Request& r, const Config& c) { return r.seed ? *r.seed : c.seed(0); }

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

// ---------------------------------------------------------------- processes

struct Process {
  std::string name;  // "heat" or "she"
  int depth = 8;
  std::size_t grid_n = 64;
  std::size_t particles = 64;
  std::shared_ptr<const QuantileMeasurePath> heat;

  QuantileMeasurePath measures(std::uint64_t seed) const {
    if (name == "heat") return *heat;
    return stochastic_heat_scenario(seed, depth, grid_n).measures;
  }
};

Process make_process(const std::string& name, int depth, std::size_t grid_n, std::size_t particles) {
  if (name != "heat" && name != "she") throw InvalidInput("process must be 'heat' or 'she', got '" + name + "'");
  if (depth < 0 || depth > 20) throw InvalidInput("depth must lie in [0, 20]");
  Process p{name, depth, grid_n, particles, nullptr};
  if (name == "heat") p.heat = std::make_shared<const QuantileMeasurePath>(heat_flow_path(depth, grid_n));
  return p;
}

PathMeasure brownian_lift(std::uint64_t seed, int depth, std::size_t count) {
  std::vector<DyadicPath> paths;
  paths.reserve(count);
  for (std::size_t j = 0; j < count; ++j) paths.push_back(BrownianPath(seed, j + 1, depth).path());
  return PathMeasure::uniform(std::move(paths));
}

LiftCandidate make_lift(const Process& proc, const std::string& kind) {
  if (kind == "quantile") {
    if (proc.name == "heat")
      return {kind, [proc](std::uint64_t) { return build_dyadic_lift(*proc.heat, Coupler::quantile, proc.depth); },
              true};
    return {kind,
            [proc](std::uint64_t seed) {
              return quantile_particle_paths(stochastic_heat_scenario(seed, proc.depth, proc.grid_n), proc.grid_n);
            },
            true};
  }
  if (kind == "independent") {
    if (proc.name == "heat")
      return {kind,
              [proc](std::uint64_t seed) { return brownian_lift(derive_seed(seed, 1), proc.depth, proc.particles); },
              false};
    return {kind,
            [proc](std::uint64_t seed) {
              return independent_particle_paths(stochastic_heat_scenario(seed, proc.depth, proc.grid_n),
                                                derive_seed(seed, 1), proc.particles);
            },
            false};
  }
  if (kind == "shuffled")
    return {kind, [proc](std::uint64_t seed) { return build_shuffled_lift(proc.measures(seed), derive_seed(seed, 2)); },
            true};
  throw InvalidInput("lift must be 'quantile', 'independent' or 'shuffled', got '" + kind + "'");
}

EnsemblePath as_ensembles(const QuantileMeasurePath& mp) {
  const std::size_t n = mp.measures.front().size();
  std::vector<double> labels(n);
  for (std::size_t j = 0; j < n; ++j) labels[j] = QuantileMeasure::level(j, n);
  auto set = std::make_shared<const LabelSet>(1, std::move(labels));
  EnsemblePath ep{mp.depth, {}};
  for (const auto& m : mp.measures)
    ep.ensembles.emplace_back(set, std::vector<double>(m.quantiles().begin(), m.quantiles().end()));
  return ep;
}

// ---------------------------------------------------------------- norms

int cmd_norms(const Request& req, std::ostream& out, std::ostream&) {
  const Config cfg(req.config_path, {"input", "inputs", "norms"}, "norms");
  std::vector<std::string> inputs;
  if (cfg.has("input")) inputs.push_back(cfg.text("input", ""));
  if (cfg.has("inputs")) {
    const auto& arr = cfg.raw("inputs");
    if (!arr.is_array()) throw InvalidInput("'inputs' must be an array of file names");
    for (const auto& v : arr) {
      if (!v.is_string()) throw InvalidInput("'inputs' must be an array of file names");
      inputs.push_back(v.get<std::string>());
    }
  }
  if (inputs.empty()) throw InvalidInput("norms needs 'input' or 'inputs' in the config");

  std::vector<NormSpec> specs;
  if (cfg.has("norms")) {
    const auto& arr = cfg.raw("norms");
    if (!arr.is_array()) throw InvalidInput("'norms' must be an array");
    for (const auto& v : arr) specs.push_back(spec_from_json(v, NormSpec{}));
  } else {
    specs = {NormSpec{NormKind::holder, 0.5, 2.0, 0.5}, NormSpec{NormKind::pvar, 0.5, 2.0, 0.5},
             NormSpec{NormKind::frac_sobolev, 0.75, 2.0, 0.5}, NormSpec{NormKind::besov, 0.75, 2.0, 0.5}};
  }

  std::ostringstream csv;
  csv << "path,norm,alpha,p,gamma,value\n";
  for (const auto& name : inputs) {
    const fs::path file = cfg.file(name);
    DyadicPath path;
    if (is_json_file(file)) {
      try {
        path = io::path_from_json(read_json_file(file));
      } catch (const json::exception& e) {
        throw InvalidInput("'" + file.string() + "': " + e.what());
      }
    } else {
      auto in = open_input(file);
      path = io::path_from_csv(in);
    }
    for (const auto& s : specs) {
      const double v = seminorm(path, s);
      csv << csv_field(name) << ',' << to_string(s.kind) << ',' << fmt(s.alpha) << ',' << fmt(s.p) << ','
          << fmt(s.gamma) << ',' << fmt(v) << '\n';
    }
  }
  Sink sink(req.out_dir);
  sink.add("norms.csv", csv.str(), true);
  sink.finish(out);
  return kOk;
}

// ---------------------------------------------------------------- ot

QuantileMeasure load_quantiles(const fs::path& p) {
  if (is_json_file(p)) return io::quantile_measure_from_json(read_json_file(p));
  auto in = open_input(p);
  return io::quantile_measure_from_csv(in);
}

ParticleEnsemble load_ensemble(const fs::path& p, std::size_t dim) {
  if (is_json_file(p)) return io::ensemble_from_json(read_json_file(p));
  auto in = open_input(p);
  return io::ensemble_from_csv(in, dim);
}

int cmd_ot(const Request& req, std::ostream& out, std::ostream&) {
  const Config cfg(req.config_path, {"mode", "mu", "nu", "p", "dim", "coupling", "geodesic_t"}, "ot");
  if (!cfg.has("mu") || !cfg.has("nu")) throw InvalidInput("ot needs 'mu' and 'nu' files in the config");
  const std::string mode = cfg.text("mode", "quantile");
  const double p = cfg.number("p", 2.0);
  json result{{"spec_version", io::kSpecVersion}, {"mode", mode}, {"p", p}};

  if (mode == "quantile") {
    QuantileMeasure mu = load_quantiles(cfg.file(cfg.text("mu", "")));
    QuantileMeasure nu = load_quantiles(cfg.file(cfg.text("nu", "")));
    if (mu.size() != nu.size()) {
      // both quantile functions are step functions on the common refinement
      const std::size_t l = std::lcm(mu.size(), nu.size());
      if (l > 10'000'000) throw InvalidInput("measure sizes have no common grid below 1e7 atoms");
      mu = mu.regrid(l);
      nu = nu.regrid(l);
    }
    const double pp = wasserstein_pp(mu, nu, p);
    result["n"] = mu.size();
    result["distance_pp"] = pp;
    result["distance"] = std::pow(pp, 1.0 / p);
    if (cfg.flag("coupling", false)) {
      json pairs = json::array();
      for (const auto& [x, y] : monotone_coupling(mu, nu).pairs) pairs.push_back({x, y});
      result["coupling"] = std::move(pairs);
    }
  } else if (mode == "nu") {
    const std::size_t dim = cfg.count("dim", 1);
    const ParticleEnsemble a = load_ensemble(cfg.file(cfg.text("mu", "")), dim);
    const ParticleEnsemble b0 = load_ensemble(cfg.file(cfg.text("nu", "")), dim);
    if (!a.shares_labels_with(b0)) throw InvalidInput("the two ensembles use different label sets");
    const ParticleEnsemble b(a.label_ptr(), std::vector<double>(b0.positions().begin(), b0.positions().end()));
    const double pp = w_p_nu_pp(a, b, p);
    result["n"] = a.size();
    result["dim"] = a.dim();
    result["distance_pp"] = pp;
    result["distance"] = std::pow(pp, 1.0 / p);
    if (cfg.has("geodesic_t")) {
      json geo = json::array();
      for (double t : cfg.numbers("geodesic_t", {})) {
        const auto g = generalized_geodesic(a, b, t);
        geo.push_back({{"t", t}, {"positions", std::vector<double>(g.positions().begin(), g.positions().end())}});
      }
      result["geodesic"] = std::move(geo);
    }
  } else {
    throw InvalidInput("ot mode must be 'quantile' or 'nu'");
  }
  Sink sink(req.out_dir);
  sink.add("ot.json", dump(result), true);
  sink.finish(out);
  return kOk;
}

// ---------------------------------------------------------------- lift

Coupler parse_coupler(const std::string& s) {
  if (s == "quantile") return Coupler::quantile;
  if (s == "nu" || s == "nu_based") return Coupler::nu_based;
  throw InvalidInput("coupler must be 'quantile' or 'nu', got '" + s + "'");
}

double marginal_curve_value(const MeasurePathSample& mp, const NormSpec& s) {
  auto eval = [&](const auto& curve) -> double {
    switch (s.kind) {
      case NormKind::holder: return holder_seminorm(curve, s.gamma);
      case NormKind::pvar: return p_variation(curve, s.p);
      case NormKind::besov: return besov_seminorm(curve, s.alpha, s.p);
      case NormKind::frac_sobolev: break;
    }
    return std::nan("");
  };
  if (const auto* q = std::get_if<QuantileMeasurePath>(&mp)) return eval(WassersteinCurve(*q, s.p));
  return eval(NuWassersteinCurve(std::get<EnsemblePath>(mp), s.p));
}

int cmd_lift(const Request& req, std::ostream& out, std::ostream&) {
  const Config cfg(req.config_path, {"source", "input", "level", "grid_n", "coupler", "norm", "track", "emit_paths"},
                   "lift");
  const std::string source = cfg.text("source", "heat");
  const int level = req.level ? *req.level : static_cast<int>(cfg.integer("level", 4));
  if (level < 0 || level > 20) throw InvalidInput("level must lie in [0, 20]");
  const std::size_t grid_n = cfg.count("grid_n", 64);
  const Coupler coupler = parse_coupler(req.coupler ? *req.coupler : cfg.text("coupler", "quantile"));
  NormSpec spec{NormKind::besov, 0.6, 2.0, 0.5};
  if (cfg.has("norm")) spec = spec_from_json(cfg.raw("norm"), spec);
  if (req.norm) spec.kind = parse_norm_kind(*req.norm);
  if (req.alpha) spec.alpha = *req.alpha;
  if (req.p) spec.p = *req.p;
  spec.validate();
  const std::uint64_t seed = base_seed(req, cfg);

  // provider of the measure family at any level up to `level`
  LevelProvider provider;
  if (source == "heat") {
    provider = [grid_n](int n) -> MeasurePathSample { return heat_flow_path(n, grid_n); };
  } else if (source == "she") {
    provider = [seed, grid_n](int n) -> MeasurePathSample { return stochastic_heat_scenario(seed, n, grid_n).measures; };
  } else if (source == "file") {
    if (!cfg.has("input")) throw InvalidInput("source 'file' needs 'input'");
    const json j = read_json_file(cfg.file(cfg.text("input", "")));
    MeasurePathSample full;
    try {
      if (j.is_object() && j.contains("measures"))
        full = io::measure_path_from_json(j);
      else
        full = io::ensemble_path_from_json(j);
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("measure file: ") + e.what());
    }
    if (depth_of(full) < level)
      throw InvalidInput("measure file has depth " + std::to_string(depth_of(full)) + " < level " +
                         std::to_string(level));
    auto shared = std::make_shared<const MeasurePathSample>(std::move(full));
    provider = [shared](int n) -> MeasurePathSample {
      return std::visit([n](const auto& m) -> MeasurePathSample { return m.restricted(n); }, *shared);
    };
  } else {
    throw InvalidInput("source must be 'heat', 'she' or 'file'");
  }
  LevelProvider typed = provider;
  if (coupler == Coupler::nu_based) {
    typed = [provider](int n) -> MeasurePathSample {
      MeasurePathSample s = provider(n);
      if (const auto* q = std::get_if<QuantileMeasurePath>(&s)) return as_ensembles(*q);
      return s;
    };
  } else {
    typed = [provider](int n) -> MeasurePathSample {
      MeasurePathSample s = provider(n);
      if (!std::holds_alternative<QuantileMeasurePath>(s))
        throw InvalidInput("the quantile coupler needs quantile measures; use --coupler nu for ensembles");
      return s;
    };
  }

  const MeasurePathSample mp = typed(level);
  const PathMeasure pi = build_dyadic_lift(mp, coupler, level);
  json summary{{"spec_version", io::kSpecVersion},
               {"source", source},
               {"level", level},
               {"coupler", coupler == Coupler::quantile ? "quantile" : "nu"},
               {"norm", spec_json(spec)},
               {"paths", pi.size()},
               {"dim", pi.dim()},
               {"lift_energy", lift_energy(pi, spec)}};
  if (source == "she") summary["seed"] = seed;
  if (spec.kind != NormKind::frac_sobolev) {
    const double v = marginal_curve_value(mp, spec);
    summary["marginal_energy"] = v > 0.0 ? std::pow(v, spec.p) : 0.0;
  }
  if (pi.dim() == 1 && level > 0) {
    double worst = 0.0;
    const double step = std::exp2(-level);
    for (std::size_t k = 0; k + 1 < pi.grid_size(); ++k)
      worst = std::max(worst, pairwise_optimality_gap(pi, k * step, (k + 1) * step, spec.p).gap);
    summary["max_neighbour_optimality_gap"] = worst;
  }
  if (cfg.flag("track", false)) {
    if (spec.kind != NormKind::besov) throw InvalidInput("track needs the besov norm");
    const TrackResult tr = refine_and_track(typed, coupler, spec, level);
    json rows = json::array();
    for (const auto& r : tr.rows)
      rows.push_back({{"level", r.level},
                      {"energy", r.energy},
                      {"geodesic_energy", r.geodesic_energy},
                      {"within_bound", r.within_bound}});
    summary["track"] = {{"rows", std::move(rows)},
                        {"bound_factor", tr.bound_factor},
                        {"marginal_energy", tr.marginal_energy},
                        {"bound", tr.bound},
                        {"nondecreasing", tr.nondecreasing},
                        {"all_within_bound", tr.all_within_bound},
                        {"max_marginal_drift", tr.max_marginal_drift}};
  }

  Sink sink(req.out_dir);
  sink.add("summary.json", dump(summary), true);
  if (cfg.flag("emit_paths", true)) {
    sink.add("lift.json", dump(io::to_json(pi)));
    std::ostringstream csv;
    io::path_measure_to_csv(pi, csv);
    sink.add("lift.csv", csv.str());
  }
  sink.finish(out);
  return kOk;
}

// ---------------------------------------------------------------- demo

PathMeasure pick_paths(const PathMeasure& pi, std::size_t count) {
  count = std::min(count, pi.size());
  std::vector<DyadicPath> paths;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = (2 * i + 1) * pi.size() / (2 * count);
    paths.push_back(pi.paths()[j]);
  }
  return PathMeasure::uniform(std::move(paths));
}

std::string csv_of(const PathMeasure& pi) {
  std::ostringstream os;
  io::path_measure_to_csv(pi, os);
  return os.str();
}

int cmd_demo(const Request& req, std::ostream& out, std::ostream& err) {
  const Config cfg(req.config_path,
                   {"preset", "depth", "grid_n", "n_mc", "p", "alpha", "particles", "plot_paths", "holder_p", "threads"},
                   "demo");
  const std::string preset = req.preset ? *req.preset : cfg.text("preset", "");
  if (preset != "heat" && preset != "she") throw InvalidInput("demo needs --preset heat or --preset she");
  const bool she = preset == "she";
  const int depth = static_cast<int>(cfg.integer("depth", 8));
  if (depth < 2 || depth > 16) throw InvalidInput("demo depth must lie in [2, 16]");
  const std::size_t grid_n = cfg.count("grid_n", 64);
  const double p = cfg.number("p", she ? 4.0 : 2.0);
  const double alpha = cfg.number("alpha", she ? 0.3 : 0.6);
  if (she) {
    if (!(p > 2.0)) throw PreconditionFailure("α window empty for p ≤ 2 in S-HE demo");
    if (!(alpha > 1.0 / p && alpha < 0.5))
      throw PreconditionFailure("S-HE demo needs 1/p < alpha < 1/2, got alpha = " + fmt(alpha));
  }
  NormSpec spec{NormKind::besov, alpha, p, 0.5};
  spec.validate();

  McConfig mc;
  mc.n_mc = cfg.count("n_mc", 200);
  mc.base_seed = base_seed(req, cfg);
  mc.depth = depth;
  mc.grid_n = grid_n;
  mc.threads = cfg.count("threads", 0, 0);
  mc.validate();
  err << "seed derivation: " << mc.seed_derivation() << '\n';

  const Process proc = make_process(preset, depth, grid_n, cfg.count("particles", grid_n));
  const LiftCandidate quantile = make_lift(proc, "quantile");
  const LiftCandidate independent = make_lift(proc, "independent");
  const std::size_t plot = cfg.count("plot_paths", 8);

  Sink sink(req.out_dir);
  const std::uint64_t seed0 = mc.scenario_seed(0);
  sink.add("quantile_paths.csv", csv_of(pick_paths(quantile.sampler(seed0), plot)));
  sink.add("independent_paths.csv", csv_of(pick_paths(independent.sampler(seed0), plot)));
  if (she) {
    std::ostringstream w;
    io::path_to_csv(stochastic_heat_scenario(seed0, depth, grid_n).common.path(), w);
    sink.add("W.csv", w.str());
  }

  const LiftComparison cmp =
      compare_lifts(quantile, independent, [&proc](std::uint64_t s) { return proc.measures(s); }, spec, mc);
  std::ostringstream table;
  table << "lift,energy,std_error,marginal_energy,marginal_std_error,attains,exact_marginals,marginal_mismatch\n";
  auto row = [&](const std::string& name, const EnergyEstimate& e, bool exact, double mismatch) {
    const bool attains =
        std::abs(e.mean - cmp.marginal_energy.mean) <= attainment_tolerance(e, cmp.marginal_energy);
    table << name << ',' << fmt(e.mean) << ',' << fmt(e.std_error) << ',' << fmt(cmp.marginal_energy.mean) << ','
          << fmt(cmp.marginal_energy.std_error) << ',' << (attains ? "true" : "false") << ','
          << (exact ? "true" : "false") << ',' << fmt(mismatch) << '\n';
    return attains;
  };
  const bool q_attains = row("quantile", cmp.energy_a, true, cmp.marginal_mismatch_a);
  const bool i_attains = row("independent", cmp.energy_b, false, cmp.marginal_mismatch_b);
  sink.add("comparison.csv", table.str());

  // Hoelder regression of log W_p(mu_s, mu_{s+h}) on log h at s = 1/4
  const double holder_p = cfg.number("holder_p", 4.0);
  const std::size_t last = std::size_t{1} << depth;
  const std::size_t ks = last / 4;
  std::vector<double> lx, ly;
  std::ostringstream holder;
  holder << "h,wp,std_error\n";
  for (int k = 2; k <= std::min(8, depth); ++k) {
    const std::size_t kh = last >> k;
    const WpEstimate e = expected_wp(
        [&](std::uint64_t s) {
          const auto mp = proc.measures(s);
          return std::make_pair(mp.measures[ks], mp.measures[ks + kh]);
        },
        holder_p, mc);
    const double h = std::exp2(-k);
    holder << fmt(h) << ',' << fmt(e.value) << ',' << fmt(e.std_error) << '\n';
    if (e.value > 0.0) {
      lx.push_back(std::log(h));
      ly.push_back(std::log(e.value));
    }
  }
  sink.add("holder.csv", holder.str());

  json summary{{"spec_version", io::kSpecVersion},
               {"preset", preset},
               {"seed", mc.base_seed},
               {"seed_derivation", mc.seed_derivation()},
               {"depth", depth},
               {"grid_n", grid_n},
               {"n_mc", mc.n_mc},
               {"norm", spec_json(spec)},
               {"comparison",
                {{"quantile", {{"energy", cmp.energy_a.mean}, {"std_error", cmp.energy_a.std_error}, {"attains", q_attains}}},
                 {"independent",
                  {{"energy", cmp.energy_b.mean}, {"std_error", cmp.energy_b.std_error}, {"attains", i_attains}}},
                 {"marginal_energy", cmp.marginal_energy.mean},
                 {"marginal_std_error", cmp.marginal_energy.std_error},
                 {"smaller", cmp.smaller == 'a' ? "quantile" : cmp.smaller == 'b' ? "independent" : "tie"},
                 {"smaller_attains", cmp.smaller_attains},
                 {"both_above_marginal", cmp.both_above_marginal}}},
               {"holder_p", holder_p},
               {"holder_slope", lx.size() >= 2 ? ls_slope(lx, ly) : 0.0}};
  sink.add("summary.json", dump(summary), true);
  sink.finish(out);
  return kOk;
}

// ---------------------------------------------------------------- sde

int cmd_sde(const Request& req, std::ostream& out, std::ostream& err) {
  const Config cfg(req.config_path,
                   {"preset", "depth", "substeps", "t_start", "x0", "quantiles", "paths", "a", "sigma",
                    "zero_individual_noise", "threshold"},
                   "sde");
  const std::string preset = req.preset ? *req.preset : cfg.text("preset", "she-form1");
  std::optional<double> a_override, sigma_override;
  if (cfg.has("a")) a_override = cfg.number("a", 0.0);
  if (cfg.has("sigma")) sigma_override = cfg.number("sigma", 0.0);
  const SdeCoefficients coeffs = sde_preset(preset, a_override, sigma_override);
  const bool form2 = preset == "she-form2";

  const int depth = static_cast<int>(cfg.integer("depth", 8));
  if (depth < 0 || depth > 20) throw InvalidInput("depth must lie in [0, 20]");
  EulerOptions opt;
  opt.substeps = cfg.count("substeps", 4096);
  opt.t_start = cfg.number("t_start", form2 ? std::exp2(-10) : 0.0);
  opt.zero_individual_noise = cfg.flag("zero_individual_noise", false);
  const double threshold = cfg.number("threshold", 0.05);

  // parabolicity precheck at t = 0, x = 0, W = 0
  {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    const Parabolicity par = parabolicity_and_alpha(coeffs.diffusion_a(0.0, zero, zero),
                                                    coeffs.common_sigma(0.0, zero, zero));
    if (!par.ok)
      throw PreconditionFailure("parabolicity fails at (t=0, x=0): smallest eigenvalue of 2a - sigma sigma^T is " +
                                fmt(par.min_eigenvalue));
  }

  const std::uint64_t seed = base_seed(req, cfg);
  err << "seed derivation: W = Brownian(seed " << seed << ", stream 0); B for path j uses seed derive_seed(" << seed
      << ", j + 1)\n";
  const BrownianPath w(seed, 0, depth);

  std::ostringstream paths;
  paths << "path_id,label,t,x\n";
  json summary{{"spec_version", io::kSpecVersion},
               {"preset", preset},
               {"seed", seed},
               {"depth", depth},
               {"substeps", opt.substeps},
               {"t_start", opt.t_start}};
  auto emit = [&](std::size_t id, double label, const DyadicPath& p) {
    for (std::size_t k = 0; k < p.size(); ++k)
      paths << id << ',' << fmt(label) << ',' << fmt(p.time(k)) << ',' << fmt(p[k]) << '\n';
  };

  Sink sink(req.out_dir);
  if (form2) {
    const auto qs = cfg.numbers("quantiles", {0.1, 0.5, 0.9});
    std::size_t fine_depth = 0;
    while ((std::size_t{1} << fine_depth) < opt.substeps) ++fine_depth;
    const BrownianPath fine = w.refined(static_cast<int>(fine_depth));
    const double start_scaled = opt.t_start * static_cast<double>(opt.substeps);
    if (!(opt.t_start > 0.0 && opt.t_start < 1.0) || start_scaled != std::floor(start_scaled))
      throw InvalidInput("she-form2 needs t_start > 0 on the substep grid");
    const double w0 = fine.path()[static_cast<std::size_t>(start_scaled)];
    std::ostringstream dev;
    dev << "q,max_deviation\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const double c = gaussian_label_offset(qs[i]);
      Eigen::VectorXd x0(1);
      x0[0] = c * std::sqrt(opt.t_start) + w0;
      EulerOptions o = opt;
      o.zero_individual_noise = true;
      const SdeTrajectory tr = euler_maruyama(coeffs, w, derive_seed(seed, i + 1), x0, o);
      double d = 0.0;
      for (std::size_t k = 0; k < tr.path.size(); ++k) {
        const double t = tr.path.time(k);
        if (t < opt.t_start) continue;
        d = std::max(d, std::abs(tr.path[k] - (c * std::sqrt(t) + w.path()[k])));
      }
      worst = std::max(worst, d);
      dev << fmt(qs[i]) << ',' << fmt(d) << '\n';
      emit(i, qs[i], tr.path);
    }
    summary["max_deviation"] = worst;
    summary["threshold"] = threshold;
    summary["within_threshold"] = worst < threshold;
    sink.add("deviation.csv", dev.str());
  } else {
    const std::size_t count = cfg.count("paths", 4);
    Eigen::VectorXd x0(1);
    x0[0] = cfg.number("x0", 0.0);
    for (std::size_t j = 0; j < count; ++j) {
      const SdeTrajectory tr = euler_maruyama(coeffs, w, derive_seed(seed, j + 1), x0, opt);
      emit(j, static_cast<double>(j), tr.path);
    }
    summary["paths"] = count;
  }
  {
    std::ostringstream wcsv;
    io::path_to_csv(w.path(), wcsv);
    sink.add("W.csv", wcsv.str());
  }
  sink.add("paths.csv", paths.str());
  sink.add("summary.json", dump(summary), true);
  sink.finish(out);
  return kOk;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const Request& req, std::ostream& out, std::ostream& err) {
  const Config cfg(req.config_path,
                   {"quantity", "process", "n_mc", "depth", "grid_n", "p", "alpha", "s", "t", "lift", "lift_b",
                    "particles", "threads", "norm", "report_confidence"},
                   "estimate");
  const std::string quantity = cfg.text("quantity", "wp");
  const std::string process = req.preset ? *req.preset : cfg.text("process", "she");
  McConfig mc;
  mc.n_mc = cfg.count("n_mc", 1000);
  mc.base_seed = base_seed(req, cfg);
  mc.depth = static_cast<int>(cfg.integer("depth", 8));
  mc.grid_n = cfg.count("grid_n", 256);
  mc.threads = cfg.count("threads", 0, 0);
  mc.report_confidence = cfg.flag("report_confidence", true);
  mc.validate();
  const Process proc = make_process(process, mc.depth, mc.grid_n, cfg.count("particles", mc.grid_n));
  const double p = cfg.number("p", 2.0);
  const double alpha = cfg.number("alpha", 0.6);
  err << "seed derivation: " << mc.seed_derivation() << '\n';

  json config{{"quantity", quantity}, {"process", process},   {"n_mc", mc.n_mc},   {"base_seed", mc.base_seed},
              {"depth", mc.depth},    {"grid_n", mc.grid_n}, {"p", p}};
  json result{{"spec_version", io::kSpecVersion}};
  std::ostringstream csv;
  csv << "quantity,estimate,std_error,n\n";
  auto finish_estimate = [&](double est, double se, std::size_t n) {
    result["estimate"] = est;
    if (mc.report_confidence) {
      result["std_error"] = se;
      result["confidence_95"] = {est - 1.96 * se, est + 1.96 * se};
    }
    result["n"] = n;
    csv << quantity << ',' << fmt(est) << ',' << fmt(se) << ',' << n << '\n';
  };

  if (quantity == "wp") {
    const double s = cfg.number("s", 0.0), t = cfg.number("t", 1.0);
    const double scale = static_cast<double>(std::size_t{1} << mc.depth);
    auto index = [&](double x) {
      const double k = x * scale;
      if (!(x >= 0.0 && x <= 1.0) || k != std::floor(k)) throw InvalidInput("s and t must be dyadic grid times");
      return static_cast<std::size_t>(k);
    };
    const std::size_t ks = index(s), kt = index(t);
    config["s"] = s;
    config["t"] = t;
    const WpEstimate e = expected_wp(
        [&](std::uint64_t seed) {
          const auto mp = proc.measures(seed);
          return std::make_pair(mp.measures[ks], mp.measures[kt]);
        },
        p, mc);
    result["mean_pp"] = e.mean_pp;
    result["std_error_pp"] = e.std_error_pp;
    finish_estimate(e.value, e.std_error, e.n);
  } else if (quantity == "besov_energy") {
    config["alpha"] = alpha;
    const EnergyEstimate e =
        process_besov_energy([&](std::uint64_t seed) { return proc.measures(seed); }, alpha, p, mc);
    finish_estimate(e.mean, e.std_error, e.n);
  } else if (quantity == "lift_energy") {
    NormSpec spec{NormKind::besov, alpha, p, 0.5};
    if (cfg.has("norm")) spec = spec_from_json(cfg.raw("norm"), spec);
    spec.validate();
    const std::string lift = cfg.text("lift", "quantile");
    config["lift"] = lift;
    config["norm"] = spec_json(spec);
    const EnergyEstimate e = expected_lift_energy(make_lift(proc, lift).sampler, spec, mc);
    finish_estimate(e.mean, e.std_error, e.n);
  } else if (quantity == "compare") {
    NormSpec spec{NormKind::besov, alpha, p, 0.5};
    spec.validate();
    const std::string la = cfg.text("lift", "quantile"), lb = cfg.text("lift_b", "independent");
    config["lift"] = la;
    config["lift_b"] = lb;
    config["alpha"] = alpha;
    const LiftComparison c = compare_lifts(make_lift(proc, la), make_lift(proc, lb),
                                           [&](std::uint64_t seed) { return proc.measures(seed); }, spec, mc);
    result["energy_a"] = {{"mean", c.energy_a.mean}, {"std_error", c.energy_a.std_error}};
    result["energy_b"] = {{"mean", c.energy_b.mean}, {"std_error", c.energy_b.std_error}};
    result["marginal_energy"] = {{"mean", c.marginal_energy.mean}, {"std_error", c.marginal_energy.std_error}};
    result["both_above_marginal"] = c.both_above_marginal;
    result["smaller"] = std::string(1, c.smaller);
    result["smaller_attains"] = c.smaller_attains;
    result["marginal_mismatch_a"] = c.marginal_mismatch_a;
    result["marginal_mismatch_b"] = c.marginal_mismatch_b;
    csv.str("");
    csv << "lift,estimate,std_error,n\n";
    csv << la << ',' << fmt(c.energy_a.mean) << ',' << fmt(c.energy_a.std_error) << ',' << c.energy_a.n << '\n';
    csv << lb << ',' << fmt(c.energy_b.mean) << ',' << fmt(c.energy_b.std_error) << ',' << c.energy_b.n << '\n';
    csv << "marginal," << fmt(c.marginal_energy.mean) << ',' << fmt(c.marginal_energy.std_error) << ','
        << c.marginal_energy.n << '\n';
  } else {
    throw InvalidInput("quantity must be 'wp', 'besov_energy', 'lift_energy' or 'compare'");
  }
  result["config"] = std::move(config);
  result["seed_derivation"] = mc.seed_derivation();

  Sink sink(req.out_dir);
  sink.add("estimate.json", dump(result), true);
  sink.add("estimate.csv", csv.str());
  sink.finish(out);
  return kOk;
}

}  // namespace

int run(const Request& request, std::ostream& out, std::ostream& err) {
  try {
    if (request.command == "norms") return cmd_norms(request, out, err);
    if (request.command == "ot") return cmd_ot(request, out, err);
    if (request.command == "lift") return cmd_lift(request, out, err);
    if (request.command == "demo") return cmd_demo(request, out, err);
    if (request.command == "sde") return cmd_sde(request, out, err);
    if (request.command == "estimate") return cmd_estimate(request, out, err);
    err << "error: unknown command '" << request.command << "'\n";
    return kBadInput;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const PreconditionFailure& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace pathlift::cli
