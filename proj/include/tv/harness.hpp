#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tv/imaging.hpp"
#include "tv/solvers.hpp"

namespace tv {

enum class SolverKind { Am, Sam, Admm };
SolverKind parse_solver(const std::string& name);
std::string solver_name(SolverKind kind);

// ---------------------------------------------------------------------------
// Deblur pipeline: per-channel solves against a shared blur, traces merged
// across channels (objectives add, error norms combine in quadrature).

struct DeblurRun {
  Image restored;
  SolverTrace trace;
  long iterations = 0;  // max over channels
  bool converged = false;
  double snr = 0.0;  // NaN when no reference
  double time_s = 0.0;
  std::vector<std::shared_ptr<const NormalSystem>> systems;
};

DeblurRun run_deblur(const Image& degraded, const std::shared_ptr<const CirculantOp>& K,
                     double mu, double beta, SolverKind kind, const SolverConfig& config,
                     const Image* reference = nullptr);

Image crop_center(const Image& img, int max_height, int max_width);

// ---------------------------------------------------------------------------
// Sparse recovery problems

enum class FrameKind { Tight, Dct };

struct RecoveryProblem {
  std::shared_ptr<const DenseOp> K;
  std::shared_ptr<const AnalysisOp> D;
  Vec x_true;
  Vec y_true;
  Vec f;
  double sigma = 0.0;
  int s = 0;
  std::uint64_t seed = 0;

  ObjectiveParams params(double mu, double beta) const;
};

// K: m x n normalized Gaussian. D: random tight frame (p = round(ratio*n)
// columns orthonormalized) or orthonormal DCT. x_true = D^T y_true with
// y_true s-sparse (uniform support, standard normal values).
// f = K x_true + sigma * eta. Deterministic per seed.
RecoveryProblem gen_recovery_problem(int m, int n, FrameKind frame, int s, double sigma,
                                     std::uint64_t seed, double frame_ratio = 1.0);

double rel_error(const Vec& x_rec, const Vec& x_true);

// ---------------------------------------------------------------------------
// Benchmark suites

struct BenchRow {
  std::string suite;
  std::string case_id;
  std::string solver;
  std::string status;  // "ok" or "skipped"
  int reps = 0;
  std::string metric;  // "snr_db" or "rel_error"
  double metric_mean = 0.0;
  double metric_std = 0.0;
  double iters_mean = 0.0;
  double time_mean_s = 0.0;
  std::string note;
};

struct BenchResult {
  std::string suite;
  std::vector<BenchRow> rows;
  void write_csv(std::ostream& os) const;
  long ok_rows() const;
};

// suite: table1|table2|table3|table4|fig2 ; scale: desk|full.
// Desk shrinks images to <=256x256 center crops and recovery sizes to
// n <= 1024 with 3 repetitions; full uses original sizes with 10.
// Missing input images skip their cases with a note; the suite completes.
// Writes the result CSV to out_path; fig2 additionally writes
// <out>_am_trace.csv and <out>_sam_trace.csv.
BenchResult run_suite(const std::string& suite, const std::string& scale,
                      const std::string& images_dir, const std::string& out_path,
                      std::uint64_t seed);

}  // namespace tv
