#include "tv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "tv/rng.hpp"

namespace tv {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

SolverKind parse_solver(const std::string& name) {
  if (name == "am") return SolverKind::Am;
  if (name == "sam") return SolverKind::Sam;
  if (name == "admm") return SolverKind::Admm;
  throw std::invalid_argument("unknown solver: " + name + " (expected am|sam|admm)");
}

std::string solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Am: return "am";
    case SolverKind::Sam: return "sam";
    case SolverKind::Admm: return "admm";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

SolverResult dispatch(SolverKind kind, const ObjectiveParams& params, const SolverConfig& cfg) {
  switch (kind) {
    case SolverKind::Am: return am_solve(params, cfg);
    case SolverKind::Sam: return sam_solve(params, cfg);
    case SolverKind::Admm: return admm_solve(params, cfg);
  }
  throw std::logic_error("unreachable");
}

// Channels run independently; the merged record at iteration k combines the
// state of every channel at min(k, its last iteration). Objectives add;
// squared error norms and squared step norms add.
SolverTrace merge_channel_traces(const std::vector<SolverTrace>& traces, double signal_sq) {
  if (traces.size() == 1) return traces[0];
  SolverTrace out;
  size_t depth = 0;
  for (const auto& t : traces) depth = std::max(depth, t.records.size());
  for (size_t k = 0; k < depth; ++k) {
    TraceRecord m;
    m.k = static_cast<int>(k + 1);
    bool have_err = true;
    for (const auto& t : traces) {
      if (t.records.empty()) continue;
      const bool live = k < t.records.size();
      const TraceRecord& r = live ? t.records[k] : t.records.back();
      m.psi += r.psi;
      m.phi += r.phi;
      m.time_s += r.time_s;
      m.dx_sq += live ? r.dx_sq : 0.0;
      m.xprev_sq += r.xprev_sq;
      if (std::isnan(r.err_sq))
        have_err = false;
      else
        m.err_sq += r.err_sq;
    }
    m.rel_change = std::sqrt(m.dx_sq) / std::max(1.0, std::sqrt(m.xprev_sq));
    if (have_err && signal_sq > 0) {
      m.snr_db = std::sqrt(m.err_sq) < 1e-15 ? 300.0 : 10.0 * std::log10(signal_sq / m.err_sq);
    } else {
      m.snr_db = kNaN;
      m.err_sq = kNaN;
    }
    out.records.push_back(m);
  }
  return out;
}

}  // namespace

DeblurRun run_deblur(const Image& degraded, const std::shared_ptr<const CirculantOp>& K,
                     double mu, double beta, SolverKind kind, const SolverConfig& config,
                     const Image* reference) {
  DeblurRun run;
  run.restored = Image(degraded.height, degraded.width, degraded.channels);
  run.converged = true;
  std::vector<SolverTrace> traces;
  auto D = std::make_shared<AnalysisOp>(AnalysisOp::tv_periodic(degraded.height, degraded.width));
  for (int ch = 0; ch < degraded.channels; ++ch) {
    ObjectiveParams params;
    params.mu = mu;
    params.beta = beta;
    params.K = K;
    params.D = D;
    params.f = degraded.channel(ch);

    SolverConfig cfg = config;
    Vec ref_ch;
    if (reference) {
      ref_ch = reference->channel(ch);
      cfg.snr_reference = &ref_ch;
    }
    const auto t0 = std::chrono::steady_clock::now();
    SolverResult res = dispatch(kind, params, cfg);
    run.time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.restored.channel(ch) = res.x;
    run.iterations = std::max(run.iterations, res.iterations);
    run.converged = run.converged && res.converged;
    run.systems.push_back(res.system);
    traces.push_back(std::move(res.trace));
  }
  if (config.record_trace) {
    double signal_sq = 0.0;
    if (reference) {
      const Vec& d = reference->data;
      signal_sq = (d.array() - d.mean()).matrix().squaredNorm();
    }
    run.trace = merge_channel_traces(traces, signal_sq);
  }
  run.snr = reference ? snr_db(run.restored, *reference) : kNaN;
  return run;
}

Image crop_center(const Image& img, int max_height, int max_width) {
  const int h = std::min(img.height, max_height);
  const int w = std::min(img.width, max_width);
  if (h == img.height && w == img.width) return img;
  const int r0 = (img.height - h) / 2;
  const int c0 = (img.width - w) / 2;
  Image out(h, w, img.channels);
  for (int ch = 0; ch < img.channels; ++ch)
    for (int c = 0; c < w; ++c)
      for (int r = 0; r < h; ++r) out.at(r, c, ch) = img.at(r0 + r, c0 + c, ch);
  return out;
}

// ---------------------------------------------------------------------------

ObjectiveParams RecoveryProblem::params(double mu, double beta) const {
  ObjectiveParams p;
  p.mu = mu;
  p.beta = beta;
  p.K = K;
  p.D = D;
  p.f = f;
  return p;
}

RecoveryProblem gen_recovery_problem(int m, int n, FrameKind frame, int s, double sigma,
                                     std::uint64_t seed, double frame_ratio) {
  if (m < 1 || n < 1 || s < 0 || s > n) throw std::invalid_argument("gen_recovery_problem: bad sizes");
  RecoveryProblem prob;
  prob.sigma = sigma;
  prob.s = s;
  prob.seed = seed;
  prob.K = std::make_shared<DenseOp>(gen_gaussian_matrix(m, n, mix_seed(seed, 1)));

  long p;
  if (frame == FrameKind::Tight) {
    p = std::lround(frame_ratio * n);
    if (p < n) throw std::invalid_argument("gen_recovery_problem: frame ratio must be >= 1");
    prob.D = std::make_shared<AnalysisOp>(
        AnalysisOp::tight_frame(gen_tight_frame(static_cast<int>(p), n, mix_seed(seed, 2))));
  } else {
    p = n;
    prob.D = std::make_shared<AnalysisOp>(AnalysisOp::dct(gen_dct(n)));
  }
  if (s > p) throw std::invalid_argument("gen_recovery_problem: s exceeds coefficient count");

  // s-sparse coefficient vector: partial Fisher-Yates for the support,
  // standard normal values in draw order
  Rng rng(mix_seed(seed, 3));
  std::vector<long> idx(p);
  std::iota(idx.begin(), idx.end(), 0l);
  prob.y_true = Vec::Zero(p);
  for (int i = 0; i < s; ++i) {
    const long j = i + static_cast<long>(rng.uniform_below(p - i));
    std::swap(idx[i], idx[j]);
    prob.y_true[idx[i]] = rng.normal();
  }

  GradField yf(static_cast<int>(p), 1);
  yf.data = prob.y_true;
  prob.x_true = prob.D->apply_adjoint(yf);

  Rng noise(mix_seed(seed, 4));
  prob.f = prob.K->apply(prob.x_true);
  for (long i = 0; i < prob.f.size(); ++i) prob.f[i] += sigma * noise.normal();
  return prob;
}

double rel_error(const Vec& x_rec, const Vec& x_true) {
  if (x_rec.size() != x_true.size()) throw std::invalid_argument("rel_error: size mismatch");
  const double nrm = x_true.norm();
  if (nrm == 0) throw std::invalid_argument("rel_error: x_true is zero");
  return (x_rec - x_true).norm() / nrm;
}

// ---------------------------------------------------------------------------

void BenchResult::write_csv(std::ostream& os) const {
  os << "suite,case,solver,status,reps,metric,metric_mean,metric_std,iters_mean,time_s,note\n";
  char buf[512];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%d,%s,%.10g,%.10g,%.10g,%.4g,%s\n",
                  r.suite.c_str(), r.case_id.c_str(), r.solver.c_str(), r.status.c_str(), r.reps,
                  r.metric.c_str(), r.metric_mean, r.metric_std, r.iters_mean, r.time_mean_s,
                  r.note.c_str());
    os << buf;
  }
}

long BenchResult::ok_rows() const {
  long n = 0;
  for (const auto& r : rows)
    if (r.status == "ok") ++n;
  return n;
}

namespace {

struct Stats {
  double mean = kNaN, stddev = kNaN;
};

Stats mean_std(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(acc / (static_cast<double>(v.size()) - 1)) : 0.0;
  return s;
}

std::vector<KernelSpec> table_kernels() {
  return {KernelSpec::gaussian(11, 9),  KernelSpec::gaussian(21, 11), KernelSpec::gaussian(31, 13),
          KernelSpec::motion(21, 45),   KernelSpec::motion(41, 90),   KernelSpec::motion(61, 135),
          KernelSpec::average(11),      KernelSpec::average(13),      KernelSpec::average(15)};
}

struct SuiteContext {
  std::string scale;
  std::string images_dir;
  std::uint64_t seed = 0;
  int reps() const { return scale == "full" ? 10 : 3; }
  bool desk() const { return scale != "full"; }
};

void run_image_suite(BenchResult& out, const SuiteContext& ctx,
                     const std::vector<std::string>& image_files) {
  const double sigma = 1e-3;
  const double mu = mu_auto(sigma);
  const double beta = 128.0;  // 2^7
  int case_idx = 0;
  for (const std::string& file : image_files) {
    Image clean;
    bool have = false;
    const std::string path = ctx.images_dir.empty() ? file : ctx.images_dir + "/" + file;
    try {
      clean = load_image(path);
      have = true;
    } catch (const std::exception&) {
    }
    if (have && ctx.desk()) clean = crop_center(clean, 256, 256);
    for (const KernelSpec& kern : table_kernels()) {
      const std::string case_id = kern.str() + "/" + file;
      for (SolverKind kind : {SolverKind::Am, SolverKind::Sam, SolverKind::Admm}) {
        BenchRow row;
        row.suite = out.suite;
        row.case_id = case_id;
        row.solver = solver_name(kind);
        row.metric = "snr_db";
        if (!have) {
          row.status = "skipped";
          row.note = "missing input " + path;
          out.rows.push_back(row);
          continue;
        }
        std::vector<double> metrics, iters, times;
        for (int rep = 0; rep < ctx.reps(); ++rep) {
          DegradationSpec dspec{kern, sigma,
                                mix_seed(ctx.seed, static_cast<std::uint64_t>(case_idx) * 64 + rep)};
          Degraded deg = degrade(clean, dspec);
          SolverConfig cfg;
          cfg.tol = 1e-3;
          cfg.max_iter = 500;
          cfg.record_trace = false;
          DeblurRun run = run_deblur(deg.f, deg.K, mu, beta, kind, cfg, &clean);
          metrics.push_back(run.snr);
          iters.push_back(static_cast<double>(run.iterations));
          times.push_back(run.time_s);
        }
        row.status = "ok";
        row.reps = ctx.reps();
        const Stats ms = mean_std(metrics);
        row.metric_mean = ms.mean;
        row.metric_std = ms.stddev;
        row.iters_mean = mean_std(iters).mean;
        row.time_mean_s = mean_std(times).mean;
        out.rows.push_back(row);
      }
      ++case_idx;
    }
  }
}

void run_recovery_suite(BenchResult& out, const SuiteContext& ctx, FrameKind frame) {
  const std::vector<std::pair<int, int>> sizes = {
      {256, 1024}, {256, 2048}, {256, 4096}, {256, 8192}, {512, 2048},
      {512, 4096}, {512, 8192}, {1024, 2048}, {1024, 4096}, {1024, 8192}};
  const double sigma = 1e-3;
  const double mu = mu_auto(sigma);
  const double beta = 2048.0;  // 2^11
  int case_idx = 0;
  for (auto [m, n] : sizes) {
    if (ctx.desk() && n > 1024) continue;
    const std::string case_id = std::to_string(m) + "/" + std::to_string(n);
    for (SolverKind kind : {SolverKind::Sam, SolverKind::Admm}) {
      BenchRow row;
      row.suite = out.suite;
      row.case_id = case_id;
      row.solver = solver_name(kind);
      row.metric = "rel_error";
      std::vector<double> metrics, iters, times;
      for (int rep = 0; rep < ctx.reps(); ++rep) {
        RecoveryProblem prob = gen_recovery_problem(
            m, n, frame, m / 8, sigma,
            mix_seed(ctx.seed, 0x5ec0ull + static_cast<std::uint64_t>(case_idx) * 64 + rep));
        SolverConfig cfg;
        cfg.tol = 1e-6;
        cfg.max_iter = 50000;
        cfg.record_trace = false;
        const auto t0 = std::chrono::steady_clock::now();
        SolverResult res = dispatch(kind, prob.params(mu, beta), cfg);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        metrics.push_back(rel_error(res.x, prob.x_true));
        iters.push_back(static_cast<double>(res.iterations));
      }
      row.status = "ok";
      row.reps = ctx.reps();
      const Stats ms = mean_std(metrics);
      row.metric_mean = ms.mean;
      row.metric_std = ms.stddev;
      row.iters_mean = mean_std(iters).mean;
      row.time_mean_s = mean_std(times).mean;
      out.rows.push_back(row);
    }
    ++case_idx;
  }
}

void run_fig2_suite(BenchResult& out, const SuiteContext& ctx, const std::string& out_path) {
  const std::string file = "man.pgm";
  const std::string path = ctx.images_dir.empty() ? file : ctx.images_dir + "/" + file;
  const KernelSpec kern = KernelSpec::motion(41, 91);
  const double sigma = 1e-3;
  Image clean;
  bool have = false;
  try {
    clean = load_image(path);
    have = true;
  } catch (const std::exception&) {
  }
  if (have && ctx.desk()) clean = crop_center(clean, 256, 256);
  for (SolverKind kind : {SolverKind::Am, SolverKind::Sam}) {
    BenchRow row;
    row.suite = out.suite;
    row.case_id = kern.str() + "/" + file;
    row.solver = solver_name(kind);
    row.metric = "snr_db";
    if (!have) {
      row.status = "skipped";
      row.note = "missing input " + path;
      out.rows.push_back(row);
      continue;
    }
    DegradationSpec dspec{kern, sigma, mix_seed(ctx.seed, 0xf19u)};
    Degraded deg = degrade(clean, dspec);
    SolverConfig cfg;
    cfg.tol = 0.0;  // run the full trace
    cfg.max_iter = ctx.desk() ? 100 : 200;
    cfg.record_trace = true;
    DeblurRun run = run_deblur(deg.f, deg.K, mu_auto(sigma), 128.0, kind, cfg, &clean);
    row.status = "ok";
    row.reps = 1;
    row.metric_mean = run.snr;
    row.metric_std = 0.0;
    row.iters_mean = static_cast<double>(run.iterations);
    row.time_mean_s = run.time_s;
    out.rows.push_back(row);

    std::string stem = out_path;
    const auto dot = stem.rfind('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    std::ofstream tf(stem + "_" + solver_name(kind) + "_trace.csv");
    run.trace.write_csv(tf);
  }
}

}  // namespace

BenchResult run_suite(const std::string& suite, const std::string& scale,
                      const std::string& images_dir, const std::string& out_path,
                      std::uint64_t seed) {
  if (scale != "desk" && scale != "full")
    throw std::invalid_argument("run_suite: scale must be desk or full");
  BenchResult result;
  result.suite = suite;
  SuiteContext ctx{scale, images_dir, seed};
  if (suite == "table1") {
    run_image_suite(result, ctx, {"boat.pgm", "man.pgm"});
  } else if (suite == "table2") {
    run_image_suite(result, ctx, {"mandrill.ppm", "sandiego.ppm"});
  } else if (suite == "table3") {
    run_recovery_suite(result, ctx, FrameKind::Tight);
  } else if (suite == "table4") {
    run_recovery_suite(result, ctx, FrameKind::Dct);
  } else if (suite == "fig2") {
    run_fig2_suite(result, ctx, out_path);
  } else {
    throw std::invalid_argument("run_suite: unknown suite " + suite);
  }
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("run_suite: cannot write " + out_path);
    result.write_csv(os);
  }
  return result;
}

}  // namespace tv
