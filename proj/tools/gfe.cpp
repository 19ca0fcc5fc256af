// gfe: refinement studies for geodesic finite element harmonic maps.
//
//   gfe bench --problem P2 --order 1 --levels 4 --out p2.csv
//   gfe interp-study --problem P2 --order 2 --levels 4 --out p2_interp.csv
//   gfe list-problems
//
// Exit codes: 0 success, 2 solver failure, 3 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "gfe/bench.hpp"
#include "gfe/errors.hpp"
#include "gfe/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 2;
constexpr int kExitConfigError = 3;

struct Options {
  std::string problem;
  int order = 0;
  int levels = 0;
  std::string out;
  int quad_degree = 0;
  std::optional<std::uint64_t> seed;
  std::string config;
};

void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--problem", o.problem, "Problem name (see list-problems)");
  cmd->add_option("--order", o.order, "Polynomial order m (1 or 2)");
  cmd->add_option("--levels", o.levels, "Number of refinement levels (>= 2)");
  cmd->add_option("--out", o.out, "CSV output path");
  cmd->add_option("--quad-degree", o.quad_degree, "Quadrature degree for error integrals");
  cmd->add_option("--seed", o.seed, "Seed for the initial-iterate perturbation");
  cmd->add_option("--config", o.config, "TOML-style configuration file")->check(CLI::ExistingFile);
}

gfe::RunConfig make_config(const Options& o) {
  gfe::RunConfig c;
  if (!o.config.empty()) c = gfe::load_run_config(o.config);
  if (!o.problem.empty()) c.problem = o.problem;
  if (o.order > 0) c.order = o.order;
  if (o.levels > 0) c.levels = o.levels;
  if (!o.out.empty()) c.output = o.out;
  if (o.quad_degree > 0) c.quadrature_degree = o.quad_degree;
  if (o.seed) c.seed = o.seed;
  if (c.problem.empty()) throw gfe::ConfigError("--problem is required");
  if (o.order < 0 || o.levels < 0 || o.quad_degree < 0) throw gfe::ConfigError("negative option value");
  c.validate();
  return c;
}

void print_summary(const gfe::RunResult& r, bool solve) {
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    const auto& l = r.levels[i];
    std::fprintf(stderr, "level %d  k=%-4d h=%.4g  d_L2=%.4e  D_12=%.4e", l.level, l.subdivisions, l.h, l.d_L2,
                 l.D_12);
    if (i > 0) {
      std::fprintf(stderr, "  eoc=(%s, %s)", gfe::format_eoc(r.report.eoc_L2[i - 1]).substr(0, 6).c_str(),
                   gfe::format_eoc(r.report.eoc_D12[i - 1]).substr(0, 6).c_str());
    }
    if (solve) std::fprintf(stderr, "  iters=%d  |g|=%.2e%s", l.iterations, l.grad_norm, l.converged ? "" : "  NOT CONVERGED");
    std::fprintf(stderr, "\n");
  }
}

int write_csv(const gfe::RunConfig& c, const gfe::RunResult& r, bool solve) {
  auto emit = [&](std::ostream& os) {
    if (solve) {
      gfe::write_run_csv(os, r);
    } else {
      gfe::write_interpolation_csv(os, r);
    }
  };
  if (c.output.empty() || c.output == "-") {
    emit(std::cout);
    return kExitOk;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << c.output << "\n";
    return kExitConfigError;
  }
  emit(out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic finite element convergence studies"};
  app.require_subcommand(1);

  Options bench_opts, interp_opts;
  auto* bench = app.add_subcommand("bench", "Solve on a refinement sequence and write a convergence table");
  add_run_options(bench, bench_opts);
  auto* interp = app.add_subcommand("interp-study", "Interpolation errors of the exact solution (no solve)");
  add_run_options(interp, interp_opts);
  auto* list = app.add_subcommand("list-problems", "List the built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    gfe::configure_threads_from_env();
    if (list->parsed()) {
      for (const auto& p : gfe::problem_registry()) {
        std::cout << p.name << "\t" << p.manifold.name() << "\td=" << p.domain.dim() << "\torders=";
        for (std::size_t i = 0; i < p.orders.size(); ++i) std::cout << (i ? "," : "") << p.orders[i];
        std::cout << "\t" << p.description << "\n";
      }
      return kExitOk;
    }
    const bool solve = bench->parsed();
    const gfe::RunConfig config = make_config(solve ? bench_opts : interp_opts);
    const gfe::RunResult result = solve ? gfe::run(config) : gfe::interpolation_study(config);
    print_summary(result, solve);
    const int code = write_csv(config, result, solve);
    if (code != kExitOk) return code;
    return result.all_converged ? kExitOk : kExitSolverFailure;
  } catch (const gfe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const gfe::Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}
