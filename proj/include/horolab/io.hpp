#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "horolab/experiments.hpp"

namespace horolab {

using nlohmann::json;

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_decimal(const json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

}  // namespace detail

struct ObservableConfig {
  std::string id = "f";
  bool k_invariant = true;
  std::vector<std::string> center;  // 4 decimal strings, row-major; identity if empty
  double radius = 0.6;
  int smoothness = 6;
  double amplitude = 1.0;
  long centering_samples = 2000000;

  bool operator==(const ObservableConfig&) const = default;
};

struct ExperimentConfig {
  std::string command = "verify";
  std::string lattice_name = "bolza";                 // or "custom"
  std::string lattice_file;                           // optional external JSON
  std::vector<std::vector<std::string>> generators;   // inline custom lattice
  std::vector<double> center{0.0, 1.0};
  UpperHalfBox bbox;
  std::vector<ObservableConfig> observables;
  std::vector<std::string> directions{"X", "V"};      // named or "v,x,u" triple
  double arc_length = 1.0;  // S
  double sigma = 1.0;
  std::vector<double> t_grid{2, 4, 8, 16, 32, 64, 128, 256, 512};
  double kappa = 20.0;
  std::uint64_t master_seed = 20240817;
  int n_base = 8;
  long n_mc = 30000;
  std::string precision = "double";
  int workers = 1;
  std::string out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  Precision precision_mode() const {
    if (precision == "double") return Precision::Double;
    if (precision == "dd") return Precision::DoubleDouble;
    throw std::invalid_argument("config: precision must be 'double' or 'dd'");
  }
};

inline AlgebraVector parse_direction(const std::string& text) {
  if (text == "V") return kGenV;
  if (text == "X") return kGenX;
  if (text == "U") return kGenU;
  AlgebraVector w;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &w.v, &w.x, &w.u) != 3) {
    throw std::invalid_argument("config: direction must be V|X|U or 'v,x,u'");
  }
  return w;
}

inline void to_json(json& j, const ObservableConfig& o) {
  j = json{{"id", o.id},
           {"k_invariant", o.k_invariant},
           {"center", o.center},
           {"radius", o.radius},
           {"smoothness", o.smoothness},
           {"amplitude", o.amplitude},
           {"centering_samples", o.centering_samples}};
}

inline void from_json(const json& j, ObservableConfig& o) {
  o = ObservableConfig{};
  if (j.contains("id")) j.at("id").get_to(o.id);
  if (j.contains("k_invariant")) j.at("k_invariant").get_to(o.k_invariant);
  if (j.contains("center")) j.at("center").get_to(o.center);
  if (j.contains("radius")) j.at("radius").get_to(o.radius);
  if (j.contains("smoothness")) j.at("smoothness").get_to(o.smoothness);
  if (j.contains("amplitude")) j.at("amplitude").get_to(o.amplitude);
  if (j.contains("centering_samples")) j.at("centering_samples").get_to(o.centering_samples);
}

inline void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"command", c.command},
           {"lattice",
            json{{"name", c.lattice_name},
                 {"file", c.lattice_file},
                 {"generators", c.generators},
                 {"center", c.center},
                 {"bbox", json{{"x_min", c.bbox.x_min},
                               {"x_max", c.bbox.x_max},
                               {"y_min", c.bbox.y_min},
                               {"y_max", c.bbox.y_max}}}}},
           {"observables", c.observables},
           {"directions", c.directions},
           {"S", c.arc_length},
           {"sigma", c.sigma},
           {"t_grid", c.t_grid},
           {"kappa", c.kappa},
           {"seeds", json{{"master", c.master_seed}}},
           {"n_base", c.n_base},
           {"n_mc", c.n_mc},
           {"precision", c.precision},
           {"workers", c.workers},
           {"out", c.out_dir}};
}

inline void from_json(const json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  if (j.contains("command")) j.at("command").get_to(c.command);
  if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    if (l.contains("name")) l.at("name").get_to(c.lattice_name);
    if (l.contains("file")) l.at("file").get_to(c.lattice_file);
    if (l.contains("generators")) l.at("generators").get_to(c.generators);
    if (l.contains("center")) l.at("center").get_to(c.center);
    if (l.contains("bbox")) {
      const auto& b = l.at("bbox");
      b.at("x_min").get_to(c.bbox.x_min);
      b.at("x_max").get_to(c.bbox.x_max);
      b.at("y_min").get_to(c.bbox.y_min);
      b.at("y_max").get_to(c.bbox.y_max);
    }
  }
  if (j.contains("observables")) j.at("observables").get_to(c.observables);
  if (j.contains("directions")) j.at("directions").get_to(c.directions);
  if (j.contains("S")) j.at("S").get_to(c.arc_length);
  if (j.contains("sigma")) j.at("sigma").get_to(c.sigma);
  if (j.contains("t_grid")) j.at("t_grid").get_to(c.t_grid);
  if (j.contains("kappa")) j.at("kappa").get_to(c.kappa);
  if (j.contains("seeds")) j.at("seeds").at("master").get_to(c.master_seed);
  if (j.contains("n_base")) j.at("n_base").get_to(c.n_base);
  if (j.contains("n_mc")) j.at("n_mc").get_to(c.n_mc);
  if (j.contains("precision")) j.at("precision").get_to(c.precision);
  if (j.contains("workers")) j.at("workers").get_to(c.workers);
  if (j.contains("out")) j.at("out").get_to(c.out_dir);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  return j.get<ExperimentConfig>();
}

/// Build the lattice named by the config; custom generator matrices are given
/// as decimal strings (row-major) and parsed to double.
inline FuchsianGroupModel build_lattice(const ExperimentConfig& c) {
  FuchsianGroupModel g;
  if (!c.lattice_file.empty()) {
    std::ifstream in(c.lattice_file);
    if (!in) throw std::runtime_error("cannot open lattice file: " + c.lattice_file);
    json j;
    in >> j;
    g.label = j.value("label", "custom");
    for (const auto& row : j.at("generators")) {
      g.generators.push_back(Mat2{detail::parse_decimal(row.at(0)), detail::parse_decimal(row.at(1)),
                                  detail::parse_decimal(row.at(2)),
                                  detail::parse_decimal(row.at(3))});
    }
    if (j.contains("center")) {
      g.center = {detail::parse_decimal(j.at("center").at(0)),
                  detail::parse_decimal(j.at("center").at(1))};
    }
    if (j.contains("bbox")) {
      const auto& b = j.at("bbox");
      g.bbox = {b.at("x_min").get<double>(), b.at("x_max").get<double>(),
                b.at("y_min").get<double>(), b.at("y_max").get<double>()};
    }
  } else if (c.lattice_name == "bolza") {
    g = FuchsianGroupModel::bolza();
  } else if (!c.generators.empty()) {
    g.label = c.lattice_name;
    for (const auto& row : c.generators) {
      if (row.size() != 4) throw std::invalid_argument("config: generator needs 4 entries");
      g.generators.push_back(
          Mat2{std::stod(row[0]), std::stod(row[1]), std::stod(row[2]), std::stod(row[3])});
    }
    g.center = {c.center.at(0), c.center.at(1)};
    g.bbox = c.bbox;
  } else {
    throw std::invalid_argument("config: unknown lattice '" + c.lattice_name + "'");
  }
  g.validate();
  return g;
}

inline Observable build_observable(const ObservableConfig& oc, const FuchsianGroupModel& gamma,
                                   std::uint64_t master_seed) {
  BumpSpec spec;
  if (!oc.center.empty()) {
    if (oc.center.size() != 4) throw std::invalid_argument("observable center needs 4 entries");
    spec.center = Mat2{std::stod(oc.center[0]), std::stod(oc.center[1]), std::stod(oc.center[2]),
                       std::stod(oc.center[3])};
  }
  spec.radius = oc.radius;
  spec.smoothness = oc.smoothness;
  spec.amplitude = oc.amplitude;
  spec.surface = oc.k_invariant;
  Observable f = make_observable(spec, gamma, master_seed);
  if (oc.centering_samples > 0) {
    Rng rng = Rng::stream(master_seed, /*tag=*/0xc347,
                          std::hash<std::string>{}(oc.id) & 0xffffffffULL);
    f = make_zero_average(f, oc.centering_samples, rng, gamma);
  }
  return f;
}

/// Decay-series CSV: one row per (t, base point) plus an aggregate row per t.
inline std::string decay_csv(const DecaySeries& series) {
  std::ostringstream out;
  out << "t,base,value,stderr,n_nodes,quad_error\n";
  for (std::size_t ti = 0; ti < series.t_grid.size(); ++ti) {
    for (std::size_t bi = 0; bi < series.values[ti].size(); ++bi) {
      out << detail::fmt_double(series.t_grid[ti]) << ',' << bi << ','
          << detail::fmt_double(series.values[ti][bi]) << ",0," << series.nodes[ti] << ','
          << detail::fmt_double(series.quad_errors[ti][bi]) << '\n';
    }
    out << detail::fmt_double(series.t_grid[ti]) << ",rms,"
        << detail::fmt_double(series.rms[ti]) << ',' << detail::fmt_double(series.rms_se[ti])
        << ',' << series.nodes[ti] << ',' << detail::fmt_double(series.quad_error[ti]) << '\n';
  }
  return out.str();
}

inline json fit_json(const FitResult& fit) {
  return json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"log_coeff", fit.log_coeff},
              {"log_correction", fit.log_correction},
              {"residual_rms", fit.residual_rms},
              {"points_used", fit.points_used}};
}

inline json shearing_json(const ShearingReport& r) {
  return json{{"t", r.t},
              {"corr", r.corr},
              {"corr_se", r.corr_se},
              {"sheared", r.sheared},
              {"sheared_se", r.sheared_se},
              {"diff", r.diff},
              {"diff_se", r.diff_se},
              {"identity_ok", r.identity_ok},
              {"sup_arc", r.sup_arc},
              {"g_l2", r.g_l2},
              {"vg_l2", r.vg_l2},
              {"bound_rhs", r.bound_rhs},
              {"bound_ok", r.bound_ok}};
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace horolab
