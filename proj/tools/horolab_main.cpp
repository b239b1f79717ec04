// horolab command-line front end: identity verification suites and the
// decay / mixing / shadowing experiments, batch-driven by a JSON config.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "horolab/io.hpp"
#include "horolab/verify.hpp"

namespace hl = horolab;
namespace fs = std::filesystem;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::string precision;
};

hl::ExperimentConfig load_and_merge(const CliOptions& opt, const std::string& command) {
  hl::ExperimentConfig cfg = hl::load_config(opt.config_path);
  cfg.command = command;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.workers > 0) cfg.workers = opt.workers;
  if (!opt.precision.empty()) cfg.precision = opt.precision;
  (void)cfg.precision_mode();  // validate
  fs::create_directories(cfg.out_dir);
  return cfg;
}

void write_manifest(const hl::ExperimentConfig& cfg, const std::string& name) {
  hl::json manifest{{"tool", "horolab"}, {"version", "0.1.0"}, {"config", cfg}};
  hl::write_file(cfg.out_dir + "/" + name + "_manifest.json", manifest.dump(2) + "\n");
}

int cmd_verify(const hl::ExperimentConfig& cfg) {
  const hl::FuchsianGroupModel gamma = hl::build_lattice(cfg);
  const auto suites = hl::verify_all(gamma, cfg.master_seed);
  hl::json report = hl::json::object();
  std::string first_failure;
  for (const auto& s : suites) {
    report[s.name] = {{"max_residual", s.max_residual},
                      {"tolerance", s.tolerance},
                      {"pass", s.pass}};
    std::printf("%-12s residual %.3e (tol %.0e) %s\n", s.name.c_str(), s.max_residual,
                s.tolerance, s.pass ? "ok" : "FAIL");
    if (!s.pass && first_failure.empty()) first_failure = s.name;
  }
  hl::write_file(cfg.out_dir + "/verify_report.json", report.dump(2) + "\n");
  write_manifest(cfg, "verify");
  if (!first_failure.empty()) {
    std::fprintf(stderr, "verify: suite '%s' failed\n", first_failure.c_str());
    return 1;
  }
  return 0;
}

int cmd_decay(const hl::ExperimentConfig& cfg) {
  const hl::FuchsianGroupModel gamma = hl::build_lattice(cfg);
  if (cfg.observables.empty()) throw std::invalid_argument("decay: no observable configured");
  const hl::Observable f = hl::build_observable(cfg.observables.front(), gamma, cfg.master_seed);
  bool converged = true;
  for (const auto& dir_text : cfg.directions) {
    const hl::AlgebraVector w_raw = hl::parse_direction(dir_text);
    const auto norm = hl::normalize_direction(w_raw, cfg.arc_length, cfg.sigma);
    const hl::DecaySeries series = hl::run_decay_experiment(
        f, norm.direction, std::min(norm.length, norm.sigma), cfg.t_grid, cfg.n_base,
        cfg.master_seed, gamma, cfg.kappa, cfg.workers, cfg.precision_mode());
    converged = converged && !series.any_nonconverged;
    const std::string tag = "decay_" + dir_text;
    hl::write_file(cfg.out_dir + "/" + tag + ".csv", hl::decay_csv(series));
    hl::json fits{{"pure_power", hl::fit_json(hl::fit_decay(series, hl::DecayModel::PurePower))},
                  {"power_times_log",
                   hl::fit_json(hl::fit_decay(series, hl::DecayModel::PowerTimesLog))}};
    hl::write_file(cfg.out_dir + "/" + tag + "_fit.json", fits.dump(2) + "\n");
    std::printf("decay %-8s slope %+.3f (pure power)\n", dir_text.c_str(),
                hl::fit_decay(series, hl::DecayModel::PurePower).slope);
  }
  write_manifest(cfg, "decay");
  if (!converged) {
    std::fprintf(stderr, "decay: quadrature non-convergence flagged\n");
    return 1;
  }
  return 0;
}

int cmd_mixing(const hl::ExperimentConfig& cfg) {
  const hl::FuchsianGroupModel gamma = hl::build_lattice(cfg);
  if (cfg.observables.empty()) throw std::invalid_argument("mixing: no observable configured");
  const hl::Observable f = hl::build_observable(cfg.observables.front(), gamma, cfg.master_seed);
  const hl::Observable g =
      cfg.observables.size() > 1
          ? hl::build_observable(cfg.observables[1], gamma, cfg.master_seed + 1)
          : f;

  std::ostringstream csv;
  csv << "t,value,stderr,n_nodes,quad_error\n";
  hl::json reports = hl::json::array();
  std::vector<double> ts, ys, ses;
  bool identity_ok = true;
  for (double t : cfg.t_grid) {
    const hl::ShearingReport rep = hl::shearing_identity_check(
        f, g, t, cfg.sigma, cfg.n_mc, cfg.master_seed, gamma, 9, 8, cfg.kappa);
    reports.push_back(hl::shearing_json(rep));
    csv << hl::detail::fmt_double(t) << ',' << hl::detail::fmt_double(rep.corr) << ','
        << hl::detail::fmt_double(rep.corr_se) << ',' << cfg.n_mc << ",0\n";
    ts.push_back(t);
    ys.push_back(std::abs(rep.corr));
    ses.push_back(rep.corr_se);
    identity_ok = identity_ok && rep.identity_ok;
    std::printf("mixing t=%-6g corr %+.3e +- %.1e identity %s bound %s\n", t, rep.corr,
                rep.corr_se, rep.identity_ok ? "ok" : "FAIL", rep.bound_ok ? "ok" : "FAIL");
  }
  hl::json out{{"shearing", reports}};
  try {
    // drop points below 5 standard errors so the slope reflects resolved signal
    std::vector<double> floors(ses);
    for (double& v : floors) v /= 2.0;
    const hl::FitResult fit = hl::fit_powerlaw(ts, ys, ses, floors,
                                               hl::DecayModel::PowerTimesLog);
    out["fit"] = hl::fit_json(fit);
    std::printf("mixing slope %+.3f (log-corrected)\n", fit.slope);
  } catch (const std::exception& e) {
    out["fit_error"] = e.what();
    std::printf("mixing slope: not fitted (%s)\n", e.what());
  }
  hl::write_file(cfg.out_dir + "/mixing.csv", csv.str());
  hl::write_file(cfg.out_dir + "/mixing_report.json", out.dump(2) + "\n");
  write_manifest(cfg, "mixing");
  if (!identity_ok) {
    std::fprintf(stderr, "mixing: shearing identity failed beyond 3 standard errors\n");
    return 1;
  }
  return 0;
}

int cmd_shadow(const hl::ExperimentConfig& cfg) {
  const hl::FuchsianGroupModel gamma = hl::build_lattice(cfg);
  hl::AlgebraVector w{1.0, 0.3, 0.2};
  for (const auto& d : cfg.directions) {
    const hl::AlgebraVector cand = hl::parse_direction(d);
    if (cand.v != 0.0) {
      w = cand;
      break;
    }
  }
  w = hl::normalize_direction(w, 1.0, 1.0).direction;
  const double ell = hl::ell_constant(w, cfg.sigma);

  std::ostringstream csv;
  csv << "t,max_distance\n";
  std::vector<double> ts, ys;
  for (double t : cfg.t_grid) {
    if (t < 4.0) continue;
    hl::Rng rng = hl::Rng::stream(cfg.master_seed, 0x5dad, static_cast<std::uint64_t>(t));
    double max_dist = 0.0;
    for (int b = 0; b < 4; ++b) {
      const hl::QuotientPoint p = hl::haar_sample(gamma, rng);
      const auto parts =
          hl::partition_arc(hl::ArcSpec{p, w, cfg.arc_length, cfg.sigma, t}, ell, gamma);
      const std::size_t step = std::max<std::size_t>(1, parts.size() / 8);
      for (std::size_t k = 0; k < parts.size(); k += step) {
        for (int j = 1; j <= 16; ++j) {
          const double s = j / (16.0 * ell * t);
          max_dist = std::max(max_dist, hl::shadow_distance(parts[k], w, t, s));
        }
      }
    }
    csv << hl::detail::fmt_double(t) << ',' << hl::detail::fmt_double(max_dist) << '\n';
    ts.push_back(t);
    ys.push_back(max_dist);
  }
  hl::write_file(cfg.out_dir + "/shadow.csv", csv.str());
  hl::json out;
  const hl::FitResult fit =
      hl::fit_powerlaw(ts, ys, std::vector<double>(ts.size(), 0.0),
                       std::vector<double>(ts.size(), 0.0), hl::DecayModel::PurePower);
  out["fit"] = hl::fit_json(fit);
  hl::write_file(cfg.out_dir + "/shadow_report.json", out.dump(2) + "\n");
  write_manifest(cfg, "shadow");
  std::printf("shadow distance slope %+.3f\n", fit.slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"horolab: numerical laboratory for the horocycle flow on compact quotients"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string command;
  for (const char* name : {"verify", "decay", "mixing", "shadow"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON experiment config")->required();
    sub->add_option("--out", opt.out_dir, "output directory (overrides config)");
    sub->add_option("--workers", opt.workers, "worker threads (overrides config)");
    sub->add_option("--precision", opt.precision, "double | dd (overrides config)");
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const hl::ExperimentConfig cfg = load_and_merge(opt, command);
    if (command == "verify") return cmd_verify(cfg);
    if (command == "decay") return cmd_decay(cfg);
    if (command == "mixing") return cmd_mixing(cfg);
    return cmd_shadow(cfg);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const hl::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
