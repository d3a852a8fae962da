// vfms: generate random K-SAT instances, solve them with focused Metropolis
// search, and run the benchmark experiments.
//
// Exit codes: 0 solved / success, 1 flip budget exhausted, 2 usage, parse
// or I/O error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vfms/vfms.hpp"

namespace {

using namespace vfms;

constexpr int kExitSolved = 0;
constexpr int kExitBudget = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const auto kEtaValidator = CLI::Validator(
    [](std::string& s) -> std::string {
      double x = 0;
      try {
        x = std::stod(s);
      } catch (...) {
        return "eta must be a number";
      }
      return valid_eta(x) ? std::string{} : "eta must lie in (0, 1]";
    },
    "in (0, 1]");

// Output goes to a file when a path is given, otherwise to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw UsageError("cannot open output file: " + path);
    path_ = path;
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool to_stdout() const { return !file_; }
  void close() {
    stream().flush();
    if (file_) {
      file_->close();
      if (!*file_) throw UsageError("write failed: " + path_);
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::string path_;
};

double round_grid(double x) { return std::round(x * 1e10) / 1e10; }

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + csv::number(xs[i]);
  return s;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

Heuristic heuristic_from(const std::string& name) {
  const auto h = parse_heuristic(name);
  if (!h) throw UsageError("unknown heuristic: " + name);
  return *h;
}

// Flags shared by the ensemble experiments.
struct EnsembleFlags {
  std::size_t n = 1000;
  double alpha = 4.2;
  std::size_t k = 3;
  std::string heuristic = "vfms";
  std::size_t instances = 21;
  std::uint64_t seed = 0;
  std::uint64_t max_flips_per_n = 10000;
  std::string out;
  bool has_n = true;  // false where --sizes replaces --n

  void add_to(CLI::App* cmd, std::size_t default_instances, bool with_n = true) {
    instances = default_instances;
    has_n = with_n;
    if (has_n)
      cmd->add_option("--n", n, "Number of variables")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--alpha", alpha, "Clause density M/N; M = round(alpha N)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--k", k, "Clause width")->check(CLI::Range(2, 64))->capture_default_str();
    cmd->add_option("--heuristic", heuristic, "vfms | fms | focused-walk")
        ->check(CLI::IsMember({"vfms", "fms", "focused-walk", "focused_walk"}))
        ->capture_default_str();
    cmd->add_option("--instances", instances, "Runs per parameter point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("--max-flips-per-n", max_flips_per_n, "Flip budget per run, in units of N")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--out", out, "Output CSV (default: stdout)");
  }

  void validate() const {
    if (has_n && n < k) throw UsageError("--n must be at least --k");
  }

  void header(csv::Header& h) const {
    if (has_n) h.add("n", static_cast<std::uint64_t>(n));
    h.add("alpha", alpha);
    if (has_n) h.add("m", static_cast<std::uint64_t>(clauses_for_density(n, alpha)));
    h.add("k", static_cast<std::uint64_t>(k))
        .add("heuristic", std::string(to_string(heuristic_from(heuristic))))
        .add("instances", static_cast<std::uint64_t>(instances))
        .add("seed", seed)
        .add("max_flips_per_n", max_flips_per_n);
  }

  std::string reproduce() const {
    std::ostringstream s;
    if (has_n) s << "--n " << n << ' ';
    s << "--alpha " << csv::number(alpha) << " --k " << k << " --heuristic "
      << to_string(heuristic_from(heuristic)) << " --instances " << instances << " --seed " << seed
      << " --max-flips-per-n " << max_flips_per_n;
    return s.str();
  }
};

void write_common_header(std::ostream& out, const std::string& command, const csv::Header& h,
                         const std::string& reproduce) {
  out << "# vfms " << command << '\n';
  h.write(out);
  out << "# unsolved_runs=+inf in order statistics; times are flips/N\n";
  out << "# reproduce=vfms " << command << ' ' << reproduce << '\n';
}

void report_elapsed(const char* what, std::chrono::steady_clock::time_point start) {
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << what << ": " << s << " s wall clock\n";
}

// ---------------------------------------------------------------------------

struct GenerateCmd {
  std::size_t n = 0;
  double alpha = -1;
  std::size_t m = 0;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  std::string out;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* m_opt = nullptr;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("generate", "Write a random K-SAT instance in DIMACS format");
    cmd->add_option("--n", n, "Number of variables")->required()->check(CLI::PositiveNumber);
    alpha_opt = cmd->add_option("--alpha", alpha, "Clause density; M = round(alpha N)")->check(CLI::NonNegativeNumber);
    m_opt = cmd->add_option("--m", m, "Number of clauses")->check(CLI::NonNegativeNumber);
    alpha_opt->excludes(m_opt);
    cmd->add_option("--k", k, "Clause width")->check(CLI::Range(2, 64))->capture_default_str();
    cmd->add_option("--seed", seed, "Generator seed")->capture_default_str();
    cmd->add_option("--out", out, "Output file (default: stdout)");
    cmd->callback([this] { exit_code = run(); });
  }

  int run() {
    if (alpha_opt->count() + m_opt->count() != 1) throw UsageError("give exactly one of --alpha or --m");
    if (n < k) throw UsageError("--n must be at least --k");
    const std::size_t clauses = alpha_opt->count() ? clauses_for_density(n, alpha) : m;
    const Formula f = generate_random_ksat(n, clauses, k, seed);
    Output o(out);
    o.stream() << "c vfms generate n=" << n << " m=" << clauses << " k=" << k << " seed=" << seed << '\n';
    write_dimacs(o.stream(), f);
    o.close();
    (o.to_stdout() ? std::cerr : std::cout) << "n=" << n << " m=" << clauses << " k=" << k << " seed=" << seed << '\n';
    return kExitSolved;
  }

  int exit_code = kExitSolved;
};

struct SolveCmd {
  std::string cnf;
  std::string heuristic = "vfms";
  double eta = 0;
  std::uint64_t seed = 0;
  std::uint64_t max_flips = 0;
  std::string trace;
  std::uint32_t points_per_decade = 20;
  std::uint64_t linear_stride = 0;
  CLI::Option* eta_opt = nullptr;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("solve", "Run focused local search on a DIMACS instance");
    cmd->add_option("--cnf", cnf, "DIMACS CNF file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--heuristic", heuristic, "vfms | fms | focused-walk")
        ->check(CLI::IsMember({"vfms", "fms", "focused-walk", "focused_walk"}))
        ->capture_default_str();
    eta_opt = cmd->add_option("--eta", eta, "Noise parameter in (0, 1]; required for vfms and fms")->check(kEtaValidator);
    cmd->add_option("--seed", seed, "Solver seed")->capture_default_str();
    cmd->add_option("--max-flips", max_flips, "Flip budget (0: unlimited)")->capture_default_str();
    cmd->add_option("--trace", trace, "Write a (flips, E, N_u) trace CSV here");
    cmd->add_option("--points-per-decade", points_per_decade, "Trace points per decade of flips")
        ->check(CLI::Range(1u, 1000u))
        ->capture_default_str();
    cmd->add_option("--linear-stride", linear_stride, "Also trace every this many flips (0: off)")
        ->capture_default_str();
    cmd->callback([this] { exit_code = run(); });
  }

  int run() {
    const Heuristic h = heuristic_from(heuristic);
    if (h != Heuristic::focused_walk && eta_opt->count() == 0) throw UsageError("--eta is required for " + heuristic);
    if (h == Heuristic::focused_walk && eta_opt->count() == 0) eta = 1.0;

    std::ifstream in(cnf, std::ios::binary);
    if (!in) throw UsageError("cannot read " + cnf);
    const Formula f = parse_dimacs(in);
    if (f.has_duplicate_variables())
      std::cerr << "warning: some clauses repeat a variable" << (f.has_tautologies() ? " (tautologies present)" : "")
                << '\n';

    // Open the trace file before solving so an unwritable path fails early.
    std::unique_ptr<Output> trace_out;
    if (!trace.empty()) trace_out = std::make_unique<Output>(trace);

    const TraceSchedule schedule{points_per_decade, linear_stride};
    TraceRecorder recorder(schedule);
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = vfms::run(f, {h, eta, seed, max_flips}, trace_out ? &recorder : nullptr);
    report_elapsed("solve", start);

    csv::Header hdr;
    hdr.add("cnf", cnf)
        .add("n", static_cast<std::uint64_t>(f.num_vars()))
        .add("m", static_cast<std::uint64_t>(f.num_clauses()))
        .add("heuristic", std::string(to_string(h)))
        .add("eta", eta)
        .add("seed", seed)
        .add("max_flips", max_flips);
    hdr.write(std::cout);
    std::cout << "solved,flips,proposals,seed\n"
              << (r.solved ? 1 : 0) << ',' << r.flips << ',' << r.proposals << ',' << r.seed << '\n';

    if (trace_out) {
      hdr.add("points_per_decade", static_cast<std::uint64_t>(points_per_decade)).add("linear_stride", linear_stride);
      hdr.write(trace_out->stream());
      write_trace_csv(trace_out->stream(), recorder.trace());
      trace_out->close();
    }
    return r.solved ? kExitSolved : kExitBudget;
  }

  int exit_code = kExitSolved;
};

struct SweepCmd {
  EnsembleFlags flags;
  std::vector<double> eta_grid;
  double eta_min = 0.05, eta_max = 0.6, eta_step = 0.05;
  unsigned workers = default_workers();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sweep", "Median and quartiles of flips/N over a grid of eta");
    flags.add_to(cmd, 21);
    cmd->add_option("--eta-grid", eta_grid, "Comma-separated eta values (overrides min/max/step)")
        ->delimiter(',')
        ->check(kEtaValidator);
    cmd->add_option("--eta-min", eta_min, "Grid start")->check(kEtaValidator)->capture_default_str();
    cmd->add_option("--eta-max", eta_max, "Grid end (inclusive)")->check(kEtaValidator)->capture_default_str();
    cmd->add_option("--eta-step", eta_step, "Grid spacing")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--workers", workers, "Worker threads (env VFMS_WORKERS)")->check(CLI::PositiveNumber);
    cmd->callback([this] { exit_code = run(); });
  }

  int run() {
    flags.validate();
    if (eta_grid.empty()) {
      if (eta_max < eta_min) throw UsageError("--eta-max must not be below --eta-min");
      for (std::size_t i = 0;; ++i) {
        const double x = round_grid(eta_min + static_cast<double>(i) * eta_step);
        if (x > eta_max + 1e-12) break;
        eta_grid.push_back(x);
      }
    }
    SweepConfig c;
    c.n_vars = flags.n;
    c.alpha = flags.alpha;
    c.k = flags.k;
    c.heuristic = heuristic_from(flags.heuristic);
    c.eta_grid = eta_grid;
    c.instances = flags.instances;
    c.master_seed = flags.seed;
    c.max_flips = flags.max_flips_per_n * flags.n;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    Output o(flags.out);
    const auto start = std::chrono::steady_clock::now();
    const auto rows = noise_sweep(c, workers);
    report_elapsed("sweep", start);

    csv::Header h;
    flags.header(h);
    h.add("eta_grid", join(eta_grid));
    write_common_header(o.stream(), "sweep", h, flags.reproduce() + " --eta-grid " + join(eta_grid));
    write_sweep_csv(o.stream(), rows);
    o.close();
    return kExitSolved;
  }

  int exit_code = kExitSolved;
};

struct CdfCmd {
  EnsembleFlags flags;
  double eta = 0.25;
  unsigned workers = default_workers();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("cdf", "Cumulative distribution of flips/N over random instances");
    flags.add_to(cmd, 100);
    cmd->add_option("--eta", eta, "Noise parameter")->check(kEtaValidator)->capture_default_str();
    cmd->add_option("--workers", workers, "Worker threads (env VFMS_WORKERS)")->check(CLI::PositiveNumber);
    cmd->callback([this] { exit_code = run(); });
  }

  int run() {
    flags.validate();
    EnsembleConfig c{flags.n, flags.alpha, flags.k, heuristic_from(flags.heuristic), eta, flags.instances, flags.seed,
                     flags.max_flips_per_n * flags.n};
    Output o(flags.out);
    const auto start = std::chrono::steady_clock::now();
    const auto runs = ensemble_runs(c, workers);
    report_elapsed("cdf", start);
    const auto cdf = cumulative_distribution(runs, flags.n);
    const ExperimentStats st = summarize(runs, flags.n);

    csv::Header h;
    flags.header(h);
    h.add("eta", eta).add("success_rate", st.success_rate);
    write_common_header(o.stream(), "cdf", h, flags.reproduce() + " --eta " + csv::number(eta));
    write_cdf_csv(o.stream(), cdf);
    o.close();
    return kExitSolved;
  }

  int exit_code = kExitSolved;
};

struct ScalingCmd {
  EnsembleFlags flags;
  std::vector<std::size_t> sizes{1000, 10000};
  double eta = 0.23;
  unsigned workers = default_workers();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("scaling", "Median flips/N as a function of N at fixed alpha");
    flags.add_to(cmd, 21, false);
    cmd->add_option("--sizes", sizes, "Comma-separated increasing N values")->delimiter(',')->capture_default_str();
    cmd->add_option("--eta", eta, "Noise parameter")->check(kEtaValidator)->capture_default_str();
    cmd->add_option("--workers", workers, "Worker threads (env VFMS_WORKERS)")->check(CLI::PositiveNumber);
    cmd->callback([this] { exit_code = run(); });
  }

  int run() {
    if (sizes.empty()) throw UsageError("--sizes is empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] < flags.k) throw UsageError("every size must be at least --k");
      if (i > 0 && sizes[i] <= sizes[i - 1]) throw UsageError("--sizes must be strictly increasing");
    }
    ScalingConfig c{sizes, flags.alpha, flags.k, heuristic_from(flags.heuristic), eta, flags.instances, flags.seed,
                    flags.max_flips_per_n};
    Output o(flags.out);
    const auto start = std::chrono::steady_clock::now();
    const auto rows = scaling_experiment(c, workers);
    report_elapsed("scaling", start);

    csv::Header h;
    flags.header(h);
    h.add("sizes", join(sizes)).add("eta", eta);
    write_common_header(o.stream(), "scaling", h,
                        flags.reproduce() + " --sizes " + join(sizes) + " --eta " + csv::number(eta));
    write_scaling_csv(o.stream(), rows);
    o.close();
    return kExitSolved;
  }

  int exit_code = kExitSolved;
};

struct TraceAvgCmd {
  EnsembleFlags flags;
  double eta = 0.23;
  std::uint32_t points_per_decade = 20;
  std::uint64_t linear_stride = 0;
  unsigned workers = default_workers();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("trace-avg", "Average E, N_u and N_u/E traces over random instances");
    flags.add_to(cmd, 20);
    cmd->add_option("--eta", eta, "Noise parameter")->check(kEtaValidator)->capture_default_str();
    cmd->add_option("--points-per-decade", points_per_decade, "Trace points per decade of flips")
        ->check(CLI::Range(1u, 1000u))
        ->capture_default_str();
    cmd->add_option("--linear-stride", linear_stride, "Also trace every this many flips (0: off)")
        ->capture_default_str();
    cmd->add_option("--workers", workers, "Worker threads (env VFMS_WORKERS)")->check(CLI::PositiveNumber);
    cmd->callback([this] { exit_code = run(); });
  }

  int run() {
    flags.validate();
    EnsembleConfig c{flags.n, flags.alpha, flags.k, heuristic_from(flags.heuristic), eta, flags.instances, flags.seed,
                     flags.max_flips_per_n * flags.n};
    Output o(flags.out);
    const auto start = std::chrono::steady_clock::now();
    const auto traces = trace_experiment(c, {points_per_decade, linear_stride}, workers);
    report_elapsed("trace-avg", start);
    const auto avg = average_traces(traces);

    csv::Header h;
    flags.header(h);
    h.add("eta", eta)
        .add("points_per_decade", static_cast<std::uint64_t>(points_per_decade))
        .add("linear_stride", linear_stride);
    o.stream() << "# solved instances are dropped from later steps; count = instances still unsolved\n";
    write_common_header(o.stream(), "trace-avg", h,
                        flags.reproduce() + " --eta " + csv::number(eta) + " --points-per-decade " +
                            std::to_string(points_per_decade) + " --linear-stride " + std::to_string(linear_stride));
    write_average_csv(o.stream(), avg);
    o.close();
    return kExitSolved;
  }

  int exit_code = kExitSolved;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Focused Metropolis search for random K-SAT"};
  app.require_subcommand(1);

  GenerateCmd generate;
  SolveCmd solve;
  SweepCmd sweep;
  CdfCmd cdf;
  ScalingCmd scaling;
  TraceAvgCmd trace_avg;
  generate.add(app);
  solve.add(app);
  sweep.add(app);
  cdf.add(app);
  scaling.add(app);
  trace_avg.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  for (const auto* sub : app.get_subcommands()) {
    const std::string name = sub->get_name();
    if (name == "generate") return generate.exit_code;
    if (name == "solve") return solve.exit_code;
    if (name == "sweep") return sweep.exit_code;
    if (name == "cdf") return cdf.exit_code;
    if (name == "scaling") return scaling.exit_code;
    if (name == "trace-avg") return trace_avg.exit_code;
  }
  return kExitUsage;
}
