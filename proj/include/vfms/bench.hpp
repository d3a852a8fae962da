#pragma once

// Experiment harness: noise sweeps, run-time distributions, size scaling and
// averaged traces over random K-SAT ensembles.
//
// Every run in an experiment gets two seeds derived from the master seed and
// its grid coordinates: stream 0 generates the formula and stream 1 drives
// the solver. Runs are independent and may execute on several worker
// threads; results are stored by grid position, so the output does not
// depend on the worker count. Run times are flips / N. A run that exhausts
// its budget counts as +inf in order statistics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include "vfms/cnf.hpp"
#include "vfms/csv.hpp"
#include "vfms/engine.hpp"
#include "vfms/rng.hpp"
#include "vfms/trace.hpp"

namespace vfms {

inline constexpr double kUnsolved = std::numeric_limits<double>::infinity();

struct Quartiles {
  double q1 = 0;
  double median = 0;
  double q3 = 0;
};

/// Quantile at probability p: position h = (n - 1) p in the sorted sample,
/// linear interpolation between the two closest ranks. An interpolation
/// that touches +inf with nonzero weight is +inf.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  const double a = sorted[lo];
  if (frac == 0.0) return a;
  const double b = sorted[lo + 1];
  if (std::isinf(a) || std::isinf(b)) return kUnsolved;
  return a + frac * (b - a);
}

inline Quartiles median_quartiles(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("median_quartiles of an empty sample");
  std::sort(samples.begin(), samples.end());
  return {quantile_sorted(samples, 0.25), quantile_sorted(samples, 0.5), quantile_sorted(samples, 0.75)};
}

/// Number of worker threads: `VFMS_WORKERS` if set and positive, else 1.
inline unsigned default_workers() {
  if (const char* env = std::getenv("VFMS_WORKERS")) {
    const long w = std::strtol(env, nullptr, 10);
    if (w > 0) return static_cast<unsigned>(w);
  }
  return 1;
}

/// out[i] = fn(i) for i in [0, count), on up to `workers` threads.
template <typename Fn>
auto parallel_map(std::size_t count, unsigned workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(count);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// One random instance of the ensemble solved once.
struct EnsembleRun {
  std::size_t n_vars = 0;
  double alpha = 0;
  std::size_t k = 3;
  RunConfig run;
  std::uint64_t formula_seed = 0;
};

inline RunResult solve_instance(const EnsembleRun& spec, TraceSink* sink = nullptr) {
  const Formula f = generate_random_ksat(spec.n_vars, clauses_for_density(spec.n_vars, spec.alpha), spec.k,
                                         spec.formula_seed);
  return run(f, spec.run, sink);
}

inline double normalized_time(const RunResult& r, std::size_t n_vars) {
  return r.solved ? static_cast<double>(r.flips) / static_cast<double>(n_vars) : kUnsolved;
}

/// Seeds for `count` runs at grid coordinate `cell`: formula and solver.
struct SeedPair {
  std::uint64_t formula;
  std::uint64_t solver;
};

inline SeedPair run_seeds(std::uint64_t master, std::uint64_t cell, std::uint64_t instance) {
  return {derive_seed(master, {0, cell, instance}), derive_seed(master, {1, cell, instance})};
}

/// Throws if any two derived seeds of a grid coincide.
inline void check_seed_grid(std::uint64_t master, std::size_t cells, std::size_t instances) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(2 * cells * instances);
  for (std::size_t c = 0; c < cells; ++c)
    for (std::size_t i = 0; i < instances; ++i) {
      const SeedPair s = run_seeds(master, c, i);
      if (!seen.insert(s.formula).second || !seen.insert(s.solver).second)
        throw std::runtime_error("derived seed collision");
    }
}

struct ExperimentStats {
  Quartiles quartiles;
  double success_rate = 0;
};

inline ExperimentStats summarize(std::span<const RunResult> results, std::size_t n_vars) {
  std::vector<double> times;
  times.reserve(results.size());
  std::size_t solved = 0;
  for (const RunResult& r : results) {
    times.push_back(normalized_time(r, n_vars));
    solved += r.solved ? 1 : 0;
  }
  return {median_quartiles(std::move(times)), static_cast<double>(solved) / static_cast<double>(results.size())};
}

// ---------------------------------------------------------------------------
// Noise sweep

struct SweepConfig {
  std::size_t n_vars = 1000;
  double alpha = 4.2;
  std::size_t k = 3;
  Heuristic heuristic = Heuristic::vfms;
  std::vector<double> eta_grid;
  std::size_t instances = 21;
  std::uint64_t master_seed = 0;
  std::uint64_t max_flips = 0;

  void validate() const {
    if (eta_grid.empty()) throw std::invalid_argument("eta grid is empty");
    for (std::size_t i = 0; i < eta_grid.size(); ++i) {
      if (!valid_eta(eta_grid[i])) throw std::invalid_argument("eta grid values must lie in (0, 1]");
      if (i > 0 && !(eta_grid[i] > eta_grid[i - 1])) throw std::invalid_argument("eta grid must be strictly increasing");
    }
    if (instances == 0) throw std::invalid_argument("instances must be at least 1");
    if (n_vars < k) throw std::invalid_argument("n_vars must be at least k");
  }
};

struct SweepRow {
  double eta = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double success_rate = 0;
  std::size_t instances = 0;
};

/// Runs `instances` fresh formulas at every eta of the grid. Run (j, i) uses
/// run_seeds(master_seed, j, i).
inline std::vector<SweepRow> noise_sweep(const SweepConfig& config, unsigned workers = 1) {
  config.validate();
  const std::size_t cells = config.eta_grid.size();
  check_seed_grid(config.master_seed, cells, config.instances);
  const auto results = parallel_map(cells * config.instances, workers, [&](std::size_t idx) {
    const std::size_t j = idx / config.instances;
    const std::size_t i = idx % config.instances;
    const SeedPair seeds = run_seeds(config.master_seed, j, i);
    return solve_instance({config.n_vars, config.alpha, config.k,
                           RunConfig{config.heuristic, config.eta_grid[j], seeds.solver, config.max_flips},
                           seeds.formula});
  });
  std::vector<SweepRow> rows;
  rows.reserve(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    const auto cell = std::span(results).subspan(j * config.instances, config.instances);
    const ExperimentStats s = summarize(cell, config.n_vars);
    rows.push_back({config.eta_grid[j], s.quartiles.q1, s.quartiles.median, s.quartiles.q3, s.success_rate,
                    config.instances});
  }
  return rows;
}

inline std::vector<SweepRow> rescale_eta(std::vector<SweepRow> rows, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("rescale factor must be positive");
  for (SweepRow& r : rows) r.eta *= factor;
  return rows;
}

/// Row with the smallest median; first one on ties. Rows must be nonempty.
inline const SweepRow& argmin_median(std::span<const SweepRow> rows) {
  if (rows.empty()) throw std::invalid_argument("argmin of an empty sweep");
  return *std::min_element(rows.begin(), rows.end(),
                           [](const SweepRow& a, const SweepRow& b) { return a.median < b.median; });
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "eta,q1,median,q3,success_rate,instances\n";
  for (const SweepRow& r : rows)
    out << csv::number(r.eta) << ',' << csv::number(r.q1) << ',' << csv::number(r.median) << ','
        << csv::number(r.q3) << ',' << csv::number(r.success_rate) << ',' << r.instances << '\n';
}

// ---------------------------------------------------------------------------
// Cumulative distribution

struct CdfPoint {
  double normalized_flips = 0;
  double fraction = 0;

  friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

/// Empirical CDF of flips / n_vars over solved runs; unsolved runs only
/// enlarge the denominator. One point per distinct solve time.
inline std::vector<CdfPoint> cumulative_distribution(std::span<const RunResult> results, std::size_t n_vars) {
  if (results.empty()) throw std::invalid_argument("cumulative distribution of no runs");
  if (n_vars == 0) throw std::invalid_argument("n_vars must be positive");
  std::vector<std::uint64_t> flips;
  for (const RunResult& r : results)
    if (r.solved) flips.push_back(r.flips);
  std::sort(flips.begin(), flips.end());
  const double total = static_cast<double>(results.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < flips.size(); ++i) {
    if (i + 1 < flips.size() && flips[i + 1] == flips[i]) continue;
    out.push_back({static_cast<double>(flips[i]) / static_cast<double>(n_vars), static_cast<double>(i + 1) / total});
  }
  return out;
}

inline void write_cdf_csv(std::ostream& out, std::span<const CdfPoint> points) {
  out << "normalized_flips,cumulative_fraction\n";
  for (const CdfPoint& p : points) out << csv::number(p.normalized_flips) << ',' << csv::number(p.fraction) << '\n';
}

struct EnsembleConfig {
  std::size_t n_vars = 1000;
  double alpha = 4.2;
  std::size_t k = 3;
  Heuristic heuristic = Heuristic::vfms;
  double eta = 0.25;
  std::size_t instances = 100;
  std::uint64_t master_seed = 0;
  std::uint64_t max_flips = 0;
};

/// `instances` independent formulas at one parameter point; run i uses
/// run_seeds(master_seed, cell, i).
inline std::vector<RunResult> ensemble_runs(const EnsembleConfig& c, unsigned workers = 1, std::uint64_t cell = 0) {
  if (c.instances == 0) throw std::invalid_argument("instances must be at least 1");
  if (c.heuristic != Heuristic::focused_walk && !valid_eta(c.eta)) throw std::invalid_argument("eta must lie in (0, 1]");
  check_seed_grid(c.master_seed, cell + 1, c.instances);
  return parallel_map(c.instances, workers, [&](std::size_t i) {
    const SeedPair seeds = run_seeds(c.master_seed, cell, i);
    return solve_instance({c.n_vars, c.alpha, c.k, RunConfig{c.heuristic, c.eta, seeds.solver, c.max_flips}, seeds.formula});
  });
}

// ---------------------------------------------------------------------------
// Size scaling

struct ScalingConfig {
  std::vector<std::size_t> sizes;
  double alpha = 4.1;
  std::size_t k = 3;
  Heuristic heuristic = Heuristic::vfms;
  double eta = 0.23;
  std::size_t instances = 21;
  std::uint64_t master_seed = 0;
  std::uint64_t max_flips_per_n = 10000;
};

struct ScalingRow {
  std::size_t n = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double success_rate = 0;
};

/// Size index s is the grid cell; the flip budget is max_flips_per_n * N.
inline std::vector<ScalingRow> scaling_experiment(const ScalingConfig& c, unsigned workers = 1) {
  if (c.sizes.empty()) throw std::invalid_argument("no sizes given");
  for (std::size_t s = 1; s < c.sizes.size(); ++s)
    if (!(c.sizes[s] > c.sizes[s - 1])) throw std::invalid_argument("sizes must be strictly increasing");
  check_seed_grid(c.master_seed, c.sizes.size(), c.instances);
  std::vector<ScalingRow> rows;
  for (std::size_t s = 0; s < c.sizes.size(); ++s) {
    const std::size_t n = c.sizes[s];
    const auto results = ensemble_runs(
        {n, c.alpha, c.k, c.heuristic, c.eta, c.instances, c.master_seed, c.max_flips_per_n * n}, workers, s);
    const ExperimentStats st = summarize(results, n);
    rows.push_back({n, st.quartiles.q1, st.quartiles.median, st.quartiles.q3, st.success_rate});
  }
  return rows;
}

inline void write_scaling_csv(std::ostream& out, std::span<const ScalingRow> rows) {
  out << "n,q1,median,q3,success_rate\n";
  for (const ScalingRow& r : rows)
    out << r.n << ',' << csv::number(r.q1) << ',' << csv::number(r.median) << ',' << csv::number(r.q3) << ','
        << csv::number(r.success_rate) << '\n';
}

// ---------------------------------------------------------------------------
// Traces

/// Runs the ensemble with a TraceRecorder attached to every run.
inline std::vector<Trace> trace_experiment(const EnsembleConfig& c, TraceSchedule schedule, unsigned workers = 1) {
  if (c.instances == 0) throw std::invalid_argument("instances must be at least 1");
  check_seed_grid(c.master_seed, 1, c.instances);
  return parallel_map(c.instances, workers, [&](std::size_t i) {
    const SeedPair seeds = run_seeds(c.master_seed, 0, i);
    TraceRecorder recorder(schedule);
    solve_instance({c.n_vars, c.alpha, c.k, RunConfig{c.heuristic, c.eta, seeds.solver, c.max_flips}, seeds.formula},
                   &recorder);
    return std::move(recorder).trace();
  });
}

}  // namespace vfms
