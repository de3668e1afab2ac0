#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "polysamp/diagnostics.hpp"
#include "polysamp/io.hpp"
#include "polysamp/model.hpp"
#include "polysamp/preprocess.hpp"
#include "polysamp/walks.hpp"

namespace polysamp::cli {

// Exit codes: 0 success, 1 computational failure, 2 usage or input error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string default_out_dir() {
  const char* env = std::getenv("POLYSAMP_OUT");
  return env && *env ? std::string(env) : std::string(".");
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

inline std::string fmt(double v, const char* spec = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Input resolution: generator spec (name:size) or a file path
// ---------------------------------------------------------------------------

struct ResolvedInput {
  std::string label;
  bool generator = false;
  bool has_sparse = false;
  ConstrainedPolytope sparse;
  Vector center;  // generator analytic center, sparse coordinates
  bool has_dense = false;
  FullDimPolytope dense;
};

inline ResolvedInput resolve_input(const std::string& spec) {
  ResolvedInput in;
  in.label = spec;
  static const std::regex generator_re("(simplex|hypercube|birkhoff):([0-9]+)");
  std::smatch match;
  if (std::regex_match(spec, match, generator_re)) {
    const long long size = std::stoll(match[2]);
    in.generator = true;
    in.has_sparse = true;
    try {
      if (match[1] == "simplex") {
        in.sparse = make_simplex(size);
        in.center = simplex_center(size);
      } else if (match[1] == "hypercube") {
        in.sparse = make_hypercube(size);
        in.center = hypercube_center(size);
      } else {
        in.sparse = make_birkhoff(size);
        in.center = birkhoff_center(size);
      }
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return in;
  }
  if (!std::filesystem::exists(spec)) {
    if (spec.find(':') != std::string::npos)
      throw UsageError("unknown generator '" + spec +
                       "' (expected simplex:N, hypercube:N, or birkhoff:N)");
    throw UsageError("input file '" + spec + "' does not exist");
  }
  if (spec.size() >= 4 && spec.substr(spec.size() - 4) == ".mps") {
    in.sparse = mps_to_constrained(load_mps(spec)).polytope;
    in.has_sparse = true;
    return in;
  }
  LoadedPolytope loaded = load_polytope(spec);
  if (loaded.form == PolytopeForm::sparse_k2) {
    in.sparse = std::move(loaded.sparse);
    in.has_sparse = true;
  } else {
    in.dense = std::move(loaded.dense);
    in.has_dense = true;
  }
  return in;
}

// ---------------------------------------------------------------------------
// Preparation: reduce, find a start point, pick the requested form
// ---------------------------------------------------------------------------

struct Prepared {
  PolytopeForm form = PolytopeForm::sparse_k2;
  ConstrainedPolytope sparse;
  FullDimPolytope dense;
  Vector x0;           // coordinates of the active form
  double delta = -1.0; // initialization margin when the LP ran
  Index rounds = -1;   // facial reduction rounds when it ran

  Index d_eff() const {
    return form == PolytopeForm::sparse_k2 ? sparse.dim() - sparse.rows()
                                           : dense.dim();
  }
};

// Generators are constructed strictly feasible with a known center, so they
// skip the reduction/initialization LPs (which would dominate benchmark
// runtimes at high dimension). File inputs get the full pipeline unless
// `reduce` is off (diagnostics on externally produced samples must see the
// polytope exactly as stored).
inline Prepared prepare(const ResolvedInput& in, PolytopeForm form,
                        bool reduce) {
  Prepared prep;
  prep.form = form;

  if (in.has_dense) {
    if (form == PolytopeForm::sparse_k2)
      throw UsageError("input '" + in.label +
                       "' is full-dimensional; rerun with --form dense");
    prep.dense = in.dense;
    const InitResult init = initialize_full(prep.dense);
    if (!(init.delta > 0.0))
      throw Error("input '" + in.label + "' has no interior point");
    prep.x0 = init.x;
    prep.delta = init.delta;
    return prep;
  }

  ConstrainedPolytope p = in.sparse;
  Vector x0;
  if (in.generator) {
    x0 = in.center;
  } else if (reduce) {
    FacialReductionResult fr = facial_reduction(p);
    const InitResult init = initialize(fr.reduced);
    if (!(init.delta > 0.0))
      throw Error("input '" + in.label +
                  "' has no interior point after facial reduction");
    p = std::move(fr.reduced);
    x0 = init.x;
    prep.delta = init.delta;
    prep.rounds = fr.rounds;
  } else {
    const InitResult init = initialize(p);
    if (!(init.delta > 0.0))
      throw Error("input '" + in.label + "' has no interior point");
    x0 = init.x;
    prep.delta = init.delta;
  }

  if (form == PolytopeForm::sparse_k2) {
    prep.sparse = std::move(p);
    prep.x0 = std::move(x0);
  } else {
    prep.dense = to_full_dimensional(p);
    prep.x0 = prep.dense.map.project(x0);
  }
  return prep;
}

// ---------------------------------------------------------------------------
// Shared walk flags
// ---------------------------------------------------------------------------

struct WalkFlags {
  WalkKind kind = WalkKind::dikin;
  PolytopeForm form = PolytopeForm::sparse_k2;
  double r = 0.5;
  double epsilon = 1e-12;
  std::uint64_t seed = 1;
  long long steps = 1000;
  long long thin = 1;
  long long burn_in = 0;
  bool experimental = false;

  void add_to(CLI::App& cmd, bool with_chain_shape = true) {
    static const std::map<std::string, WalkKind> walk_names{
        {"ball", WalkKind::ball},
        {"hit_and_run", WalkKind::hit_and_run},
        {"dikin", WalkKind::dikin},
        {"vaidya", WalkKind::vaidya},
        {"john", WalkKind::john},
        {"lee_sidford", WalkKind::lee_sidford}};
    static const std::map<std::string, PolytopeForm> form_names{
        {"dense", PolytopeForm::dense_k1}, {"sparse", PolytopeForm::sparse_k2}};
    cmd.add_option("--walk", kind, "walk kind")
        ->transform(CLI::CheckedTransformer(walk_names))
        ->default_str("dikin");
    cmd.add_option("--form", form, "polytope form to run in")
        ->transform(CLI::CheckedTransformer(form_names))
        ->default_str("sparse");
    cmd.add_option("--r", r, "step radius")->check(CLI::PositiveNumber);
    cmd.add_option("--epsilon", epsilon, "metric regularization (sparse form)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--seed", seed, "random seed");
    if (with_chain_shape) {
      cmd.add_option("--steps", steps,
                     "samples to keep (raw steps = burn-in + steps * thin)")
          ->check(CLI::NonNegativeNumber);
      cmd.add_option("--thin", thin, "keep every thin-th step")
          ->check(CLI::Range(1LL, std::numeric_limits<long long>::max()));
      cmd.add_option("--burn-in", burn_in, "raw steps to discard first")
          ->check(CLI::NonNegativeNumber);
    }
    cmd.add_flag("--experimental", experimental,
                 "enable walks still under evaluation");
  }

  void gate() const {
    if (kind == WalkKind::lee_sidford && !experimental)
      throw UsageError(
          "walk 'lee_sidford' is experimental: its weight solver is costly and "
          "excluded from the default acceptance gates; pass --experimental to "
          "run it anyway");
  }

  WalkConfig config() const {
    WalkConfig cfg;
    cfg.kind = kind;
    cfg.form = form;
    cfg.r = r;
    cfg.epsilon = epsilon;
    cfg.seed = seed;
    cfg.steps = steps;
    cfg.thin = thin;
    cfg.burn_in = burn_in;
    return cfg;
  }
};

inline const char* form_name(PolytopeForm form) {
  return form == PolytopeForm::sparse_k2 ? "sparse" : "dense";
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

inline int cmd_preprocess(const std::string& input, const std::string& out_dir) {
  const ResolvedInput in = resolve_input(input);
  if (!in.has_sparse)
    throw UsageError("preprocess operates on the constrained (K2) form; '" +
                     input + "' is full-dimensional");

  const FacialReductionResult fr = facial_reduction(in.sparse);
  const InitResult init = initialize(fr.reduced);

  ensure_dir(out_dir);
  const std::string reduced_path = join_path(out_dir, "reduced.txt");
  save_polytope(fr.reduced, reduced_path);

  nlohmann::json j;
  j["input"] = input;
  j["rounds"] = fr.rounds;
  j["delta"] = init.delta;
  j["delta_capped"] = init.delta_capped;
  j["x0"] = std::vector<double>(init.x.data(), init.x.data() + init.x.size());
  j["kept_columns"] = fr.kept_columns;
  j["kept_rows"] = fr.kept_rows;
  j["fixed_variables"] = nlohmann::json::array();
  for (const FixedVariable& fv : fr.fixed_variables) {
    nlohmann::json cert;
    cert["index"] = fv.index;
    cert["y"] = std::vector<double>(fv.y.data(), fv.y.data() + fv.y.size());
    j["fixed_variables"].push_back(cert);
  }
  const std::string report_path = join_path(out_dir, "preprocess.json");
  std::ofstream os(report_path);
  if (!os) throw IoError("cannot open '" + report_path + "' for writing");
  os << j.dump(2) << "\n";
  if (!os.flush()) throw IoError("write failed for '" + report_path + "'");

  std::cout << "facial reduction: " << fr.rounds << " round(s), "
            << fr.fixed_variables.size() << " variable(s) fixed; delta = "
            << fmt(init.delta) << "\nwrote " << reduced_path << " and "
            << report_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

inline int cmd_sample(const std::string& input, const WalkFlags& flags,
                      const std::string& out_dir) {
  flags.gate();
  const ResolvedInput in = resolve_input(input);
  const Prepared prep = prepare(in, flags.form, true);

  WalkConfig cfg = flags.config();
  if (cfg.steps < 10)
    throw UsageError("need at least 10 kept samples for the diagnostics "
                     "report; increase --steps");

  const ChainOutput chain =
      prep.form == PolytopeForm::sparse_k2
          ? run_chain(prep.sparse, prep.x0, cfg)
          : run_chain(prep.dense, prep.x0, cfg);
  const DiagnosticsReport rep =
      prep.form == PolytopeForm::sparse_k2
          ? summarize(chain, prep.sparse, prep.x0)
          : summarize(chain, prep.dense, prep.x0);

  ensure_dir(out_dir);
  const std::string samples_path = join_path(out_dir, "samples.csv");
  write_samples_csv(chain.samples, samples_path);

  nlohmann::json j = report_to_json(rep);
  j["input"] = input;
  j["walk"] = walk_kind_name(cfg.kind);
  j["form"] = form_name(prep.form);
  j["r"] = cfg.r;
  j["seed"] = cfg.seed;
  j["steps"] = cfg.steps;
  j["kept_samples"] = chain.samples.rows();
  j["dim_eff"] = prep.d_eff();
  j["infeasible_rejects"] = chain.infeasible_rejects;
  const std::string report_path = join_path(out_dir, "report.json");
  std::ofstream os(report_path);
  if (!os) throw IoError("cannot open '" + report_path + "' for writing");
  os << j.dump(2) << "\n";
  if (!os.flush()) throw IoError("write failed for '" + report_path + "'");

  std::cout << "kept " << chain.samples.rows() << " samples; acceptance "
            << fmt(rep.acceptance_rate, "%.3f") << "; min ESS "
            << fmt(rep.ess_min, "%.1f") << "; radial KS p = "
            << fmt(rep.ks_pvalue) << "\nwrote " << samples_path << " and "
            << report_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchSettings {
  std::string mode = "periter";
  long long trials = 10;
  long long target_ess = 500;
  double time_limit = 1e9;  // seconds
};

struct BenchRow {
  std::string input;
  Index d_eff = 0;
  Index rows = 0;
  long long nnz = 0;
  long long trials_done = 0;
  double mean_step_seconds = 0.0;
  double stddev_step_seconds = 0.0;
  long long steps_taken = 0;
  double ess = 0.0;
  double elapsed = 0.0;
  std::string status = "ok";
};

namespace bench_detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct TrialResult {
  bool completed = false;
  double seconds = 0.0;
  long long steps = 0;
};

// One timing trial: run `steps` raw steps from x0 in chunks so the wall-clock
// budget is honored mid-trial. A trial cut short by the budget still reports
// the seconds and steps it managed to time.
template <typename Poly>
TrialResult periter_trial(const Poly& p, const Vector& x0, WalkConfig cfg,
                          std::uint64_t trial, long long steps,
                          Clock::time_point start, double budget) {
  TrialResult res;
  Vector x = x0;
  long long done = 0;
  std::uint64_t chunk = 0;
  while (done < steps) {
    if (seconds_since(start) > budget) return res;
    const long long len = std::min<long long>(50, steps - done);
    cfg.steps = 1;    // keep only the final state; timing is what matters
    cfg.thin = len;   // so the chunk runs len raw steps
    cfg.burn_in = 0;
    const ChainOutput out = run_chain(p, x, cfg, trial * 65536 + chunk);
    res.seconds += out.per_step_seconds.total_seconds;
    res.steps += out.per_step_seconds.count;
    x = out.samples.row(out.samples.rows() - 1);
    done += len;
    ++chunk;
  }
  res.completed = true;
  return res;
}

template <typename Poly>
void run_periter(BenchRow& row, const Poly& p, const Vector& x0,
                 const WalkConfig& base, const BenchSettings& set,
                 long long steps_per_trial, Clock::time_point start) {
  std::vector<double> means;
  double partial_seconds = 0.0;
  long long partial_steps = 0;
  for (long long t = 0; t < set.trials; ++t) {
    const TrialResult res = periter_trial(p, x0, base, std::uint64_t(t),
                                          steps_per_trial, start,
                                          set.time_limit);
    if (!res.completed) {
      row.status = "timeout";
      partial_seconds = res.seconds;
      partial_steps = res.steps;
      break;
    }
    means.push_back(res.seconds / double(std::max<long long>(res.steps, 1)));
  }
  row.trials_done = static_cast<long long>(means.size());
  row.steps_taken = row.trials_done * steps_per_trial + partial_steps;
  if (!means.empty()) {
    double sum = 0.0;
    for (double m : means) sum += m;
    row.mean_step_seconds = sum / double(means.size());
    double var = 0.0;
    for (double m : means) {
      const double d = m - row.mean_step_seconds;
      var += d * d;
    }
    row.stddev_step_seconds =
        means.size() > 1 ? std::sqrt(var / double(means.size() - 1)) : 0.0;
  } else if (partial_steps > 0) {
    row.mean_step_seconds = partial_seconds / double(partial_steps);
  }
}

// Mixing cost: advance the chain in chunks, add up per-chunk ESS until the
// target is reached (per-chunk accumulation avoids storing the whole chain).
// `chunk_kept` counts kept samples per chunk; raw steps are chunk_kept * thin.
template <typename Poly>
void run_mixing(BenchRow& row, const Poly& p, const Vector& x0,
                const WalkConfig& base, const BenchSettings& set,
                long long chunk_kept, Clock::time_point start) {
  WalkConfig cfg = base;
  cfg.steps = std::max<long long>(chunk_kept, 10);
  Vector x = x0;
  double ess_total = 0.0;
  long long steps_total = 0;
  std::uint64_t chunk = 0;
  while (ess_total < double(set.target_ess)) {
    if (seconds_since(start) > set.time_limit) {
      row.status = "timeout";
      break;
    }
    cfg.burn_in = chunk == 0 ? base.burn_in : 0;
    const ChainOutput out = run_chain(p, x, cfg, chunk);
    steps_total += cfg.burn_in + cfg.steps * cfg.thin;
    ess_total += ess(out.samples).minCoeff();
    x = out.samples.row(out.samples.rows() - 1);
    ++chunk;
  }
  row.steps_taken = steps_total;
  row.ess = ess_total;
}

}  // namespace bench_detail

inline int cmd_bench(const std::vector<std::string>& inputs,
                     const WalkFlags& flags, const BenchSettings& set,
                     long long steps, const std::string& out_dir) {
  flags.gate();
  const auto start = bench_detail::Clock::now();

  std::vector<BenchRow> rows;
  for (const std::string& input : inputs) {
    BenchRow row;
    row.input = input;
    if (bench_detail::seconds_since(start) > set.time_limit) {
      row.status = "skipped";
      rows.push_back(row);
      continue;
    }
    const ResolvedInput in = resolve_input(input);
    const Prepared prep = prepare(in, flags.form, true);
    row.d_eff = prep.d_eff();
    if (prep.form == PolytopeForm::sparse_k2) {
      row.rows = prep.sparse.rows();
      row.nnz = prep.sparse.A.nonZeros();
    } else {
      row.rows = prep.dense.facets();
      row.nnz = static_cast<long long>(prep.dense.A.size());
    }

    const WalkConfig base = flags.config();
    if (set.mode == "periter") {
      if (prep.form == PolytopeForm::sparse_k2)
        bench_detail::run_periter(row, prep.sparse, prep.x0, base, set, steps,
                                  start);
      else
        bench_detail::run_periter(row, prep.dense, prep.x0, base, set, steps,
                                  start);
    } else {
      if (prep.form == PolytopeForm::sparse_k2)
        bench_detail::run_mixing(row, prep.sparse, prep.x0, base, set, steps,
                                 start);
      else
        bench_detail::run_mixing(row, prep.dense, prep.x0, base, set, steps,
                                 start);
    }
    row.elapsed = bench_detail::seconds_since(start);
    rows.push_back(row);
  }

  ensure_dir(out_dir);
  const std::string path = join_path(out_dir, "bench.csv");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  if (set.mode == "periter") {
    os << "input,dim_eff,rows,nnz,walk,form,trials,steps_per_trial,"
          "mean_seconds_per_step,stddev_seconds_per_step,status\n";
    for (const BenchRow& r : rows)
      os << r.input << "," << r.d_eff << "," << r.rows << "," << r.nnz << ","
         << walk_kind_name(flags.kind) << "," << form_name(flags.form) << ","
         << r.trials_done << "," << steps << ","
         << fmt(r.mean_step_seconds) << "," << fmt(r.stddev_step_seconds)
         << "," << r.status << "\n";
  } else {
    os << "input,dim_eff,rows,nnz,walk,form,thin,steps_taken,ess,target_ess,"
          "elapsed_seconds,status\n";
    for (const BenchRow& r : rows)
      os << r.input << "," << r.d_eff << "," << r.rows << "," << r.nnz << ","
         << walk_kind_name(flags.kind) << "," << form_name(flags.form) << ","
         << flags.thin << "," << r.steps_taken << "," << fmt(r.ess) << ","
         << set.target_ess << "," << fmt(r.elapsed) << "," << r.status << "\n";
  }
  if (!os.flush()) throw IoError("write failed for '" + path + "'");

  for (const BenchRow& r : rows)
    std::cout << r.input << ": "
              << (set.mode == "periter"
                      ? fmt(r.mean_step_seconds) + " s/step over " +
                            std::to_string(r.trials_done) + " trial(s)"
                      : fmt(r.ess, "%.1f") + " ESS in " +
                            std::to_string(r.steps_taken) + " steps")
              << " [" << r.status << "]\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// uniformity
// ---------------------------------------------------------------------------

namespace uniformity_detail {

template <typename Poly>
DenseMatrix collect_to_target_ess(const Poly& p, const Vector& x0,
                                  WalkConfig cfg, long long chunk_kept,
                                  long long target_ess, double time_limit,
                                  std::string& status) {
  using bench_detail::seconds_since;
  const auto start = bench_detail::Clock::now();
  cfg.steps = std::max<long long>(chunk_kept, 10);
  DenseMatrix all;
  Vector x = x0;
  std::uint64_t chunk = 0;
  for (;;) {
    cfg.burn_in = chunk == 0 ? cfg.burn_in : 0;
    const ChainOutput out = run_chain(p, x, cfg, chunk);
    const Index old = all.rows();
    all.conservativeResize(old + out.samples.rows(), out.samples.cols());
    all.bottomRows(out.samples.rows()) = out.samples;
    x = out.samples.row(out.samples.rows() - 1);
    ++chunk;
    if (all.rows() >= 10 && ess(all).minCoeff() >= double(target_ess)) break;
    if (seconds_since(start) > time_limit) {
      status = "timeout";
      break;
    }
  }
  return all;
}

}  // namespace uniformity_detail

inline int cmd_uniformity(const std::string& input, const WalkFlags& flags,
                          long long target_ess, long long chunk_steps,
                          double time_limit, const std::string& samples_path,
                          const std::string& out_dir) {
  flags.gate();
  const ResolvedInput in = resolve_input(input);
  const bool external = !samples_path.empty();
  const Prepared prep = prepare(in, flags.form, !external);

  std::string status = "ok";
  DenseMatrix samples;
  if (external) {
    samples = read_samples_csv(samples_path);
    const Index want = prep.form == PolytopeForm::sparse_k2
                           ? prep.sparse.dim()
                           : prep.dense.dim();
    if (samples.cols() != want)
      throw UsageError("samples file has " + std::to_string(samples.cols()) +
                       " columns but the polytope has " + std::to_string(want) +
                       " coordinates");
    if (samples.rows() < 1) throw UsageError("samples file holds no rows");
  } else {
    WalkConfig cfg = flags.config();
    samples = prep.form == PolytopeForm::sparse_k2
                  ? uniformity_detail::collect_to_target_ess(
                        prep.sparse, prep.x0, cfg, chunk_steps, target_ess,
                        time_limit, status)
                  : uniformity_detail::collect_to_target_ess(
                        prep.dense, prep.x0, cfg, chunk_steps, target_ess,
                        time_limit, status);
  }

  const Index n_collected = samples.rows();
  const double ess_min = n_collected >= 10 ? ess(samples).minCoeff() : -1.0;
  // Chain samples are serially correlated, so the KS null (independent draws)
  // applies only after striding the chain down to roughly ess_min rows.
  // Externally supplied samples are tested as given.
  DenseMatrix tested = external || ess_min <= 0.0
                           ? std::move(samples)
                           : decorrelate(samples, ess_min);

  const Index n = tested.rows();
  const Index d_eff = prep.d_eff();
  std::vector<double> u(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Vector x = tested.row(i);
    const bool inside = prep.form == PolytopeForm::sparse_k2
                            ? membership(prep.sparse, x)
                            : membership(prep.dense, x);
    if (!inside)
      throw Error("sample " + std::to_string(i) + " lies outside the polytope");
    const double ratio = prep.form == PolytopeForm::sparse_k2
                             ? ray_ratio(prep.sparse, prep.x0, x)
                             : ray_ratio(prep.dense, prep.x0, x);
    u[static_cast<std::size_t>(i)] = std::pow(ratio, double(d_eff));
  }

  std::vector<double> sorted = u;
  std::sort(sorted.begin(), sorted.end());
  const double statistic = ks_statistic_uniform(u);
  const double pvalue = ks_pvalue(statistic, n);

  ensure_dir(out_dir);
  const std::string ecdf_path = join_path(out_dir, "ecdf.csv");
  {
    std::ofstream os(ecdf_path);
    if (!os) throw IoError("cannot open '" + ecdf_path + "' for writing");
    os << "u_power,ecdf\n";
    for (Index i = 0; i < n; ++i)
      os << fmt(sorted[static_cast<std::size_t>(i)], "%.12g") << ","
         << fmt(double(i + 1) / double(n), "%.12g") << "\n";
    if (!os.flush()) throw IoError("write failed for '" + ecdf_path + "'");
  }

  nlohmann::json j;
  j["input"] = input;
  j["walk"] = external ? "none" : walk_kind_name(flags.kind);
  j["form"] = form_name(prep.form);
  j["n_collected"] = n_collected;
  j["n_samples"] = n;
  j["dim_eff"] = d_eff;
  j["ess_min"] = ess_min;
  j["target_ess"] = external ? 0 : target_ess;
  j["ks_statistic"] = statistic;
  j["ks_pvalue"] = pvalue;
  j["status"] = status;
  const std::string json_path = join_path(out_dir, "uniformity.json");
  std::ofstream os(json_path);
  if (!os) throw IoError("cannot open '" + json_path + "' for writing");
  os << j.dump(2) << "\n";
  if (!os.flush()) throw IoError("write failed for '" + json_path + "'");

  std::cout << n << " samples; radial KS statistic " << fmt(statistic)
            << ", p = " << fmt(pvalue) << " [" << status << "]\nwrote "
            << ecdf_path << " and " << json_path << "\n";
  return 0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int cli_main(int argc, char** argv) {
  CLI::App app{"Uniform sampling over convex polytopes"};
  app.require_subcommand(1);

  std::string out_dir = detail::default_out_dir();
  app.add_option("-o,--out", out_dir,
                 "output directory (default: $POLYSAMP_OUT or '.')");

  // preprocess
  std::string pre_input;
  CLI::App* pre = app.add_subcommand(
      "preprocess", "facial reduction and interior-point initialization");
  pre->add_option("input", pre_input, "generator spec (name:size) or file")
      ->required();

  // sample
  std::string sample_input;
  detail::WalkFlags sample_flags;
  CLI::App* sample =
      app.add_subcommand("sample", "run a chain and write samples + report");
  sample->add_option("input", sample_input, "generator spec (name:size) or file")
      ->required();
  sample_flags.add_to(*sample);

  // bench
  std::vector<std::string> bench_inputs;
  detail::WalkFlags bench_flags;
  detail::BenchSettings bench_set;
  long long bench_steps = 500;
  CLI::App* bench = app.add_subcommand(
      "bench", "per-iteration and mixing-cost measurements");
  bench->add_option("inputs", bench_inputs,
                    "generator specs (name:size) or files")
      ->required()
      ->expected(-1);
  bench_flags.add_to(*bench, false);
  bench->add_option("--mode", bench_set.mode, "periter or mixing")
      ->check(CLI::IsMember({"periter", "mixing"}));
  bench->add_option("--trials", bench_set.trials, "timing trials per input")
      ->check(CLI::PositiveNumber);
  bench->add_option("--steps", bench_steps,
                    "raw steps per trial (periter) or samples kept per chunk "
                    "(mixing)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--thin", bench_flags.thin, "mixing mode: keep every thin-th")
      ->check(CLI::PositiveNumber);
  bench->add_option("--target-ess", bench_set.target_ess,
                    "mixing mode: stop at this summed ESS")
      ->check(CLI::PositiveNumber);
  bench->add_option("--time-limit", bench_set.time_limit,
                    "wall-clock budget in seconds")
      ->check(CLI::PositiveNumber);

  // uniformity
  std::string uni_input, uni_samples;
  detail::WalkFlags uni_flags;
  long long uni_target = 500;
  long long uni_chunk = 500;
  double uni_limit = 1e9;
  CLI::App* uni = app.add_subcommand(
      "uniformity", "radial uniformity test against Uniform[0,1]");
  uni->add_option("input", uni_input, "generator spec (name:size) or file")
      ->required();
  uni_flags.add_to(*uni, false);
  uni->add_option("--thin", uni_flags.thin, "keep every thin-th step")
      ->check(CLI::PositiveNumber);
  uni->add_option("--burn-in", uni_flags.burn_in, "steps to discard first")
      ->check(CLI::NonNegativeNumber);
  uni->add_option("--target-ess", uni_target, "collect until this minimum ESS")
      ->check(CLI::PositiveNumber);
  uni->add_option("--steps", uni_chunk,
                  "samples kept between ESS checks")
      ->check(CLI::PositiveNumber);
  uni->add_option("--time-limit", uni_limit, "wall-clock budget in seconds")
      ->check(CLI::PositiveNumber);
  uni->add_option("--samples", uni_samples,
                  "test an existing samples CSV instead of running a chain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(pre)) return detail::cmd_preprocess(pre_input, out_dir);
    if (app.got_subcommand(sample))
      return detail::cmd_sample(sample_input, sample_flags, out_dir);
    if (app.got_subcommand(bench))
      return detail::cmd_bench(bench_inputs, bench_flags, bench_set,
                               bench_steps, out_dir);
    return detail::cmd_uniformity(uni_input, uni_flags, uni_target, uni_chunk,
                                  uni_limit, uni_samples, out_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace polysamp::cli
