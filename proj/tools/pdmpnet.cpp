// Command-line front end: simulate, estimate, scv and study subcommands.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pdmpnet/bandwidth.hpp"
#include "pdmpnet/config.hpp"
#include "pdmpnet/estimator.hpp"
#include "pdmpnet/experiments.hpp"
#include "pdmpnet/simulator.hpp"

namespace fs = std::filesystem;
using namespace pdmpnet;

namespace {

// Exit codes: 0 success, 1 runtime failure, 2 invalid input.
constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 1;
  bool force = false;
  bool no_clobber = false;
};

void guard_output(const std::string& path, bool no_clobber) {
  if (no_clobber && fs::exists(path))
    throw UsageError("refusing to overwrite existing output " + path + " (--no-clobber)");
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

RunConfig load(const Common& c) {
  RunConfig run = load_run_config(c.config);
  if (c.seed) {
    run.seed = *c.seed;
    run.sim.seed = *c.seed;
    if (run.study) run.study->seed = *c.seed;
  }
  return run;
}

// Estimation settings: taken from the config when given, else defaults for
// a beta = 1 class with an Epanechnikov kernel.
struct EstimationSetup {
  HolderClass holder;
  KernelSpec kernel;
  double region_d = 0.05;
  double level = 0.95;
};

EstimationSetup estimation_setup(const Common& c, const EventLog& log) {
  EstimationSetup s;
  s.holder.fmin_slope = 1.0;
  if (!c.config.empty()) {
    const RunConfig run = load(c);
    s.holder = run.f.holder();
    s.kernel = run.kernel;
    s.region_d = run.region_d;
    s.level = run.level;
    if (run.params.n_neurons != log.n_neurons())
      throw UsageError("config N does not match the event log");
  }
  return s;
}

int cmd_simulate(const Common& c) {
  const RunConfig run = load(c);
  const std::string path =
      c.out.empty() ? (fs::path(run.output_dir) / "events.csv").string() : c.out;
  guard_output(path, c.no_clobber);
  guard_output(path + ".meta", c.no_clobber);
  ensure_parent(path);
  const auto start = std::chrono::steady_clock::now();
  const EventLog log = simulate(run.params, run.f, run.sim);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_event_log(log, path);
  std::printf("jumps=%zu horizon=%.17g log=%s\n", log.jump_count(), log.horizon(), path.c_str());
  std::fprintf(stderr, "wall time %.3f s\n", wall);
  return 0;
}

struct EstimateArgs {
  std::string log_path;
  std::vector<double> points;
  std::string h = "auto";
  std::string r = "auto";
};

double parse_number(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + " must be a number or 'auto', got '" + text + "'");
  }
}

int cmd_estimate(const Common& c, const EstimateArgs& a) {
  const EventLog log = read_event_log(a.log_path);
  const EstimationSetup s = estimation_setup(c, log);
  const Kernel q = s.kernel.build();
  for (double point : a.points) {
    if (!region_check(point, log.params(), s.holder, s.region_d)) {
      if (!c.force)
        throw UsageError("a = " + std::to_string(point) +
                         " lies outside the admissible region; use --force to override");
      std::fprintf(stderr, "warning: a = %g lies outside the admissible region\n", point);
    }
  }

  double h = 0.0;
  if (a.h == "auto") {
    const ScvResult sel = scv_select(log, ScvConfig::defaults(log), q);
    h = sel.h_hat;
    if (!sel.interior())
      std::fprintf(stderr, "warning: SCV bandwidth %g is a grid endpoint\n", h);
  } else {
    h = parse_number(a.h, "h");
  }

  std::string rows = std::string(kEstimateCsvHeader) + "\n";
  for (double point : a.points) {
    const double r = a.r == "auto" ? pilot_threshold(log, point, h, q)
                                   : parse_number(a.r, "r");
    rows += to_csv_row(estimate_at(log, point, h, q, r, s.level)) + "\n";
  }
  if (!c.out.empty()) {
    guard_output(c.out, c.no_clobber);
    ensure_parent(c.out);
    std::ofstream out(c.out, std::ios::binary);
    out << rows;
    if (!out) throw std::runtime_error("failed writing " + c.out);
  }
  std::cout << rows;
  return 0;
}

int cmd_scv(const Common& c, const std::string& log_path) {
  const EventLog log = read_event_log(log_path);
  const EstimationSetup s = estimation_setup(c, log);
  const ScvResult sel = scv_select(log, ScvConfig::defaults(log), s.kernel.build());
  std::string curve = "h,scv_score\n";
  char buf[80];
  for (std::size_t k = 0; k < sel.grid.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", sel.grid[k], sel.scores[k]);
    curve += buf;
  }
  if (!c.out.empty()) {
    guard_output(c.out, c.no_clobber);
    ensure_parent(c.out);
    std::ofstream out(c.out, std::ios::binary);
    out << curve;
    if (!out) throw std::runtime_error("failed writing " + c.out);
  }
  std::printf("h_hat=%.17g index=%zu interior=%s\n", sel.h_hat, sel.index,
              sel.interior() ? "yes" : "no");
  if (!sel.interior())
    std::fprintf(stderr, "warning: SCV bandwidth is a grid endpoint\n");
  return 0;
}

int cmd_study(const Common& c, const std::string& kind_name) {
  const StudyKind kind = study_kind_from_string(kind_name);
  RunConfig run = load(c);
  if (!run.study) throw UsageError("config has no 'study' section");
  StudyConfig cfg = *run.study;
  cfg.kind = kind;
  cfg.threads = c.threads;
  cfg.validate();
  const std::string dir = c.out.empty() ? run.output_dir : c.out;
  const auto start = std::chrono::steady_clock::now();
  nlohmann::json summary;
  const auto written = run_study(cfg, dir, c.no_clobber, &summary);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& p : written) std::printf("wrote %s\n", p.c_str());
  std::fprintf(stderr, "wall time %.3f s\n", wall);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and rate estimation for networks of interacting neurons"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config, "JSON run configuration");
    if (config_required) opt->required();
    opt->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_value, "override the master seed");
    sub->add_option("--out", common.out, "output path");
    sub->add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", common.force, "accept points outside the admissible region");
    sub->add_flag("--no-clobber", common.no_clobber, "refuse to overwrite existing outputs");
  };

  auto* sim = app.add_subcommand("simulate", "simulate a trajectory and write its event log");
  add_common(sim, true);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "estimate the rate at given points");
  add_common(estimate, false);
  estimate->add_option("--log", est.log_path, "event log CSV")->required()->check(CLI::ExistingFile);
  estimate->add_option("-a,--point", est.points, "evaluation point(s)")->required();
  estimate->add_option("--bandwidth,-H", est.h, "bandwidth or 'auto' (SCV)");
  estimate->add_option("--threshold,-r", est.r, "admissibility threshold or 'auto'");

  std::string scv_log;
  auto* scv = app.add_subcommand("scv", "cross-validated bandwidth on an event log");
  add_common(scv, false);
  scv->add_option("--log", scv_log, "event log CSV")->required()->check(CLI::ExistingFile);

  std::string kind;
  auto* study = app.add_subcommand("study", "run a Monte Carlo study");
  add_common(study, true);
  study->add_option("kind", kind,
                    "rate|clt|ergodic|exchange|jumpchain|density|scv|likelihood|regen")
      ->required()
      ->check(CLI::IsMember({"rate", "clt", "ergodic", "exchange", "jumpchain", "density",
                             "scv", "likelihood", "regen"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (auto* sub : app.get_subcommands())
    if (sub->count("--seed") > 0) common.seed = seed_value;

  try {
    if (*sim) return cmd_simulate(common);
    if (*estimate) return cmd_estimate(common, est);
    if (*scv) return cmd_scv(common, scv_log);
    if (*study) return cmd_study(common, kind);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const OutputExistsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
