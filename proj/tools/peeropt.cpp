// Command line front end: triplet verification and coefficient dumps,
// convergence studies, optimization runs, and the adaptation demo.
// Exit codes: 0 success, 1 verification failure, 2 config error,
// 3 solver failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "peeropt/csvio.hpp"
#include "peeropt/experiments.hpp"
#include "peeropt/jsonio.hpp"
#include "peeropt/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw peeropt::ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << data;
  if (!f) throw std::runtime_error("write failed: " + path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw peeropt::ConfigError("cannot create output directory " + dir + ": " +
                               ec.message());
}

std::string strip_extension(const std::string& name) {
  size_t dot = name.find_last_of('.');
  return (dot != std::string::npos && dot > 0) ? name.substr(0, dot) : name;
}

struct Options {
  std::string config;
  std::string out = ".";
  std::string triplet;
  unsigned seed = 20250612;
  int dump_limit = 0;  // 0 = no limit
};

int run_verify(const Options& opt) {
  peeropt::PeerTriplet trip;
  try {
    if (!opt.config.empty()) {
      trip = peeropt::triplet_from_json(slurp(opt.config));
    } else {
      trip = peeropt::builtin_triplet(opt.triplet.empty() ? "AP4o33vgi"
                                                          : opt.triplet);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  peeropt::TripletReport rep = peeropt::verify_triplet(trip, opt.seed);
  ensure_dir(opt.out);
  std::string path = opt.out + "/verify-" + rep.name + ".json";
  spit(path, peeropt::report_to_json(rep));

  if (rep.pass()) {
    std::printf("%s (%s grids): all checks passed\n", rep.name.c_str(),
                rep.grid_class.c_str());
  } else {
    for (const std::string& f : rep.failures)
      std::printf("FAIL: %s\n", f.c_str());
    std::printf("%s: %zu check(s) failed\n", rep.name.c_str(),
                rep.failures.size());
  }
  std::printf("report: %s\n", path.c_str());
  return rep.pass() ? kExitOk : kExitVerify;
}

int run_dump(const Options& opt) {
  std::vector<std::string> names;
  try {
    if (!opt.triplet.empty()) {
      peeropt::builtin_triplet(opt.triplet);  // validates the name
      names.push_back(opt.triplet);
    } else {
      names = peeropt::builtin_triplet_names();
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  if (opt.dump_limit > 0 && static_cast<int>(names.size()) > opt.dump_limit)
    names.resize(static_cast<size_t>(opt.dump_limit));

  ensure_dir(opt.out);
  for (const std::string& n : names) {
    std::string path = opt.out + "/" + n + "-coeffs.json";
    spit(path, peeropt::triplet_to_json(peeropt::builtin_triplet(n)));
    std::printf("wrote %s\n", path.c_str());
  }
  return kExitOk;
}

int run_convergence(const Options& opt) {
  peeropt::RunConfig cfg = peeropt::load_run_config(opt.config);
  peeropt::ConvergenceResult res = peeropt::run_convergence(cfg);
  ensure_dir(opt.out);
  std::string stem = cfg.outputs.empty() ? cfg.problem + "-convergence"
                                         : strip_extension(cfg.outputs[0]);
  std::string path = peeropt::artifact_path(opt.out, stem, cfg.hash, ".csv");
  spit(path, res.csv);

  for (const auto& row : res.rows) {
    if (row.ok)
      std::printf("N=%-5d u %.3e (%.2f)  y %.3e (%.2f)  p %.3e (%.2f)\n",
                  row.nsteps, row.err.control, row.order_control,
                  row.err.state, row.order_state, row.err.adjoint,
                  row.order_adjoint);
    else
      std::printf("N=%-5d failed: %s\n", row.nsteps, row.error.c_str());
  }
  std::printf("table: %s\n", path.c_str());
  return kExitOk;
}

int run_solve(const Options& opt) {
  peeropt::RunConfig cfg = peeropt::load_run_config(opt.config);
  ensure_dir(opt.out);
  peeropt::SolveArtifacts a = peeropt::run_solve(cfg, opt.out);
  const peeropt::OptimizeResult& r = a.outcome.result;
  std::printf("%s on %d slabs (%s): objective %.10e after %d iteration(s), "
              "stationarity %.3e%s\n",
              cfg.problem.c_str(), a.outcome.grid.nsteps(),
              cfg.grid_mode.c_str(), r.objective, r.iterations,
              r.stationarity, r.converged ? "" : " (not converged)");
  for (const std::string& f : a.files) std::printf("wrote %s\n", f.c_str());
  return r.converged ? kExitOk : kExitSolver;
}

int run_adapt_demo(const Options& opt) {
  peeropt::RunConfig cfg = peeropt::load_run_config(opt.config);
  ensure_dir(opt.out);
  peeropt::SolveArtifacts a = peeropt::run_adapt_demo(cfg, opt.out);
  auto [smin, smax] = a.outcome.grid.sigma_range();
  std::printf("adapted %d slabs: sigma in [%.3f, %.3f], max |eta| = %.3f\n",
              a.outcome.grid.nsteps(), smin, smax, a.outcome.grid.max_eta());
  std::printf("objective uniform %.10e -> adapted %.10e\n",
              a.outcome.uniform_result.objective, a.outcome.result.objective);
  for (const std::string& f : a.files) std::printf("wrote %s\n", f.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"implicit two-step peer triplets for ODE-constrained optimal "
               "control: verification, convergence studies, optimization "
               "runs"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* verify =
      app.add_subcommand("verify", "check triplet properties, write a report");
  verify->add_option("--triplet", opt.triplet, "builtin triplet name");
  verify->add_option("--config", opt.config,
                     "coefficient JSON to verify instead of a builtin");
  verify->add_option("--out", opt.out, "output directory");
  verify->add_option("--seed", opt.seed,
                     "seed for randomized stability sampling");

  CLI::App* dump =
      app.add_subcommand("dump-coeffs", "write coefficient JSON dumps");
  dump->add_option("--triplet", opt.triplet, "dump one builtin triplet");
  dump->add_option("--out", opt.out, "output directory");
  dump->add_option("--dump-limit", opt.dump_limit,
                   "dump at most this many triplets");

  CLI::App* conv = app.add_subcommand(
      "convergence", "error table against the closed-form optimum");
  conv->add_option("--config", opt.config, "run config JSON")->required();
  conv->add_option("--out", opt.out, "output directory");

  CLI::App* solve =
      app.add_subcommand("solve", "run the optimizer, write artifacts");
  solve->add_option("--config", opt.config, "run config JSON")->required();
  solve->add_option("--out", opt.out, "output directory");

  CLI::App* adapt = app.add_subcommand(
      "adapt-demo", "solve, equidistribute, re-solve, write mesh tables");
  adapt->add_option("--config", opt.config, "run config JSON")->required();
  adapt->add_option("--out", opt.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (verify->parsed()) return run_verify(opt);
    if (dump->parsed()) return run_dump(opt);
    if (conv->parsed()) return run_convergence(opt);
    if (solve->parsed()) return run_solve(opt);
    if (adapt->parsed()) return run_adapt_demo(opt);
  } catch (const peeropt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const peeropt::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitConfig;
}
