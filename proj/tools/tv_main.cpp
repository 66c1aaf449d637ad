#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "tv/harness.hpp"

namespace {

// exit codes: 0 success, 2 bad arguments, 3 input missing, 4 solver failure
constexpr int kExitBadArgs = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitSolverFailure = 4;

tv::SolveRoute parse_route(const std::string& name) {
  if (name == "auto") return tv::SolveRoute::Auto;
  if (name == "spectral") return tv::SolveRoute::Spectral;
  if (name == "woodbury") return tv::SolveRoute::Woodbury;
  if (name == "cg") return tv::SolveRoute::Cg;
  throw CLI::ValidationError("--route", "expected auto|spectral|woodbury|cg");
}

double resolve_mu(const std::string& mu_arg, double sigma) {
  if (mu_arg == "auto") return tv::mu_auto(sigma);
  size_t used = 0;
  const double v = std::stod(mu_arg, &used);
  if (used != mu_arg.size() || v <= 0)
    throw std::invalid_argument("--mu must be 'auto' or a positive number");
  return v;
}

void write_trace(const tv::SolverTrace& trace, const std::string& path) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write trace file " + path);
  trace.write_csv(os);
}

int cmd_deblur(const std::string& input, const std::string& kernel_spec, double sigma,
               const std::string& mu_arg, double beta, double tol, long max_iter,
               const std::string& solver, std::uint64_t seed, const std::string& output,
               const std::string& trace_path, const std::string& route, bool monotone,
               double rho) {
  tv::Image clean;
  try {
    clean = tv::load_image(input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingInput;
  }

  tv::DegradationSpec dspec;
  dspec.kernel = tv::KernelSpec::parse(kernel_spec);
  dspec.sigma = sigma;
  dspec.seed = seed;
  const double mu = resolve_mu(mu_arg, sigma);

  tv::Degraded deg = tv::degrade(clean, dspec);
  tv::SolverConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.monotone = monotone;
  cfg.seed = seed;
  cfg.admm_rho = rho;
  cfg.route = parse_route(route);
  cfg.record_trace = true;

  tv::DeblurRun run =
      tv::run_deblur(deg.f, deg.K, mu, beta, tv::parse_solver(solver), cfg, &clean);
  if (!output.empty()) tv::save_image(run.restored, output);
  write_trace(run.trace, trace_path);
  std::printf("deblur %s kernel=%s sigma=%g mu=%g beta=%g: snr=%.2f dB (degraded %.2f dB) iters=%ld %s time=%.3fs\n",
              input.c_str(), dspec.kernel.str().c_str(), sigma, mu, beta, run.snr,
              tv::snr_db(deg.f, clean), run.iterations,
              run.converged ? "converged" : "max-iter", run.time_s);
  return 0;
}

int cmd_recover(int m, int n, const std::string& frame, double frame_ratio, int s, double sigma,
                double beta, double tol, long max_iter, const std::string& solver,
                std::uint64_t seed, const std::string& trace_path, const std::string& route,
                double rho) {
  const tv::FrameKind kind = frame == "dct" ? tv::FrameKind::Dct : tv::FrameKind::Tight;
  if (s < 0) s = m / 8;
  tv::RecoveryProblem prob = tv::gen_recovery_problem(m, n, kind, s, sigma, seed, frame_ratio);
  const double mu = tv::mu_auto(sigma);

  tv::SolverConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cfg.seed = seed;
  cfg.admm_rho = rho;
  cfg.route = parse_route(route);
  cfg.record_trace = !trace_path.empty();
  cfg.snr_reference = &prob.x_true;

  const auto kind_s = tv::parse_solver(solver);
  tv::SolverResult res;
  switch (kind_s) {
    case tv::SolverKind::Am: res = tv::am_solve(prob.params(mu, beta), cfg); break;
    case tv::SolverKind::Sam: res = tv::sam_solve(prob.params(mu, beta), cfg); break;
    case tv::SolverKind::Admm: res = tv::admm_solve(prob.params(mu, beta), cfg); break;
  }
  write_trace(res.trace, trace_path);
  std::printf("recover m=%d n=%d frame=%s s=%d sigma=%g: rel_error=%.4g iters=%ld %s\n", m, n,
              frame.c_str(), s, sigma, tv::rel_error(res.x, prob.x_true), res.iterations,
              res.converged ? "converged" : "max-iter");
  return 0;
}

int cmd_bench(const std::string& suite, const std::string& scale, const std::string& images,
              const std::string& out, std::uint64_t seed) {
  tv::BenchResult result = tv::run_suite(suite, scale, images, out, seed);
  long skipped = 0;
  for (const auto& r : result.rows)
    if (r.status == "skipped") ++skipped;
  std::printf("bench %s (%s): %ld rows ok, %ld skipped -> %s\n", suite.c_str(), scale.c_str(),
              result.ok_rows(), skipped, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Total-variation restoration and analysis-sparse recovery toolkit"};
  app.require_subcommand(1);

  // deblur
  auto* deblur = app.add_subcommand("deblur", "degrade an image and restore it");
  std::string in_path, kernel = "gaussian:11:9", mu_arg = "auto", solver = "sam";
  std::string output, trace, route = "auto";
  double sigma = 1e-3, beta = 128.0, tol = 1e-3, rho = 0.0;
  long max_iter = 1000;
  std::uint64_t seed = 0;
  bool monotone = false;
  deblur->add_option("--input", in_path, "clean reference image (P5/P6 NetPBM)")->required();
  deblur->add_option("--kernel", kernel, "gaussian:SIZE:SIGMA | motion:LEN:THETA | average:SIZE | delta");
  deblur->add_option("--sigma", sigma, "noise standard deviation");
  deblur->add_option("--mu", mu_arg, "fidelity weight, or 'auto' for 0.05/sigma^2");
  deblur->add_option("--beta", beta, "penalty parameter");
  deblur->add_option("--tol", tol, "relative-change stopping tolerance");
  deblur->add_option("--max-iter", max_iter, "iteration cap");
  deblur->add_option("--solver", solver, "am | sam | admm");
  deblur->add_option("--seed", seed, "degradation seed");
  deblur->add_option("--output", output, "restored image path");
  deblur->add_option("--trace", trace, "per-iteration CSV path");
  deblur->add_option("--route", route, "normal-equation route: auto|spectral|woodbury|cg");
  deblur->add_option("--rho", rho, "ADMM penalty (default beta)");
  deblur->add_flag("--monotone", monotone, "report the best objective iterate");

  // recover
  auto* recover = app.add_subcommand("recover", "analysis-sparse recovery experiment");
  int m = 256, n = 1024, s = -1;
  std::string frame = "tight";
  double frame_ratio = 1.0, rsigma = 1e-3, rbeta = 2048.0, rtol = 1e-6, rrho = 0.0;
  long rmax_iter = 50000;
  std::string rsolver = "sam", rtrace, rroute = "auto";
  std::uint64_t rseed = 0;
  recover->add_option("--m", m, "measurement count");
  recover->add_option("--n", n, "signal dimension");
  recover->add_option("--frame", frame, "tight | dct")
      ->check(CLI::IsMember({"tight", "dct"}));
  recover->add_option("--frame-ratio", frame_ratio, "tight-frame rows / n (p = ratio*n)");
  recover->add_option("--s", s, "sparsity (default m/8)");
  recover->add_option("--sigma", rsigma, "noise standard deviation");
  recover->add_option("--beta", rbeta, "penalty parameter");
  recover->add_option("--tol", rtol, "relative-change stopping tolerance");
  recover->add_option("--max-iter", rmax_iter, "iteration cap");
  recover->add_option("--solver", rsolver, "am | sam | admm");
  recover->add_option("--seed", rseed, "problem seed");
  recover->add_option("--trace", rtrace, "per-iteration CSV path");
  recover->add_option("--route", rroute, "normal-equation route override");
  recover->add_option("--rho", rrho, "ADMM penalty (default beta)");

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  std::string suite = "table3", scale = "desk", images, out = "bench.csv";
  std::uint64_t bseed = 0;
  bench->add_option("--suite", suite, "table1|table2|table3|table4|fig2")
      ->check(CLI::IsMember({"table1", "table2", "table3", "table4", "fig2"}));
  bench->add_option("--scale", scale, "desk | full")->check(CLI::IsMember({"desk", "full"}));
  bench->add_option("--images", images, "directory with the test images");
  bench->add_option("--out", out, "result CSV path");
  bench->add_option("--seed", bseed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitBadArgs;
  }

  try {
    if (deblur->parsed())
      return cmd_deblur(in_path, kernel, sigma, mu_arg, beta, tol, max_iter, solver, seed, output,
                        trace, route, monotone, rho);
    if (recover->parsed())
      return cmd_recover(m, n, frame, frame_ratio, s, rsigma, rbeta, rtol, rmax_iter, rsolver,
                         rseed, rtrace, rroute, rrho);
    if (bench->parsed()) return cmd_bench(suite, scale, images, out, bseed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return 0;
}
