#pragma once

// Focused Metropolis local search.
//
// SolverState keeps the assignment together with everything needed to
// propose and apply a flip in time proportional to the flipped variable's
// degree: per-clause true-literal counts, the set of unsatisfied clauses,
// per-variable unsat degrees u(v), and the support set {v : u(v) >= 1}.
// The energy E is the number of unsatisfied clauses and N_u the size of the
// support set.
//
// Three proposal rules share one loop:
//   vfms          uniform variable from the support set
//   fms           uniform unsatisfied clause, then uniform literal in it
//   focused_walk  as fms, but every proposal is accepted
// Uphill proposals (dE > 0) are accepted with probability eta^dE.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfms/cnf.hpp"
#include "vfms/indexed_set.hpp"
#include "vfms/rng.hpp"

namespace vfms {

enum class Heuristic { vfms, fms, focused_walk };

inline std::string_view to_string(Heuristic h) {
  switch (h) {
    case Heuristic::vfms: return "vfms";
    case Heuristic::fms: return "fms";
    case Heuristic::focused_walk: return "focused-walk";
  }
  return "?";
}

inline std::optional<Heuristic> parse_heuristic(std::string_view s) {
  if (s == "vfms" || s == "v-fms") return Heuristic::vfms;
  if (s == "fms") return Heuristic::fms;
  if (s == "focused-walk" || s == "focused_walk") return Heuristic::focused_walk;
  return std::nullopt;
}

inline bool valid_eta(double eta) { return eta > 0.0 && eta <= 1.0; }

class SolverState;

/// Receives snapshots of a run. The loop calls record() once before the
/// first proposal and again whenever the flip count reaches next_step();
/// record_final() is called once at termination.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual std::uint64_t next_step() const = 0;
  virtual void record(const SolverState& state) = 0;
  virtual void record_final(const SolverState& state) = 0;
};

class SolverState {
 public:
  /// Uniformly random initial assignment drawn from the seeded stream.
  SolverState(const Formula& formula, std::uint64_t seed) : formula_(&formula), rng_(seed) {
    value_.resize(formula.num_vars() + 1, 0);
    for (Var v = 1; v <= formula.num_vars(); ++v) value_[v] = rng_.coin() ? 1 : 0;
    build();
  }

  /// Given assignment: values[v] for v in [1, N] (values[0] is ignored).
  SolverState(const Formula& formula, std::span<const std::uint8_t> values, std::uint64_t seed)
      : formula_(&formula), rng_(seed) {
    if (values.size() != formula.num_vars() + 1)
      throw std::invalid_argument("assignment size must be num_vars + 1");
    value_.assign(values.begin(), values.end());
    for (auto& x : value_) x = x ? 1 : 0;
    value_[0] = 0;
    build();
  }

  const Formula& formula() const { return *formula_; }
  bool value(Var v) const { return value_[v] != 0; }
  std::span<const std::uint8_t> assignment() const { return value_; }

  std::size_t energy() const { return unsat_clauses_.size(); }
  std::size_t n_u() const { return unsat_vars_.size(); }
  std::uint64_t flips() const { return flips_; }
  std::uint64_t proposals() const { return proposals_; }
  bool solved() const { return unsat_clauses_.empty(); }

  std::uint32_t true_count(ClauseId c) const { return true_count_[c]; }
  std::uint32_t unsat_degree(Var v) const { return unsat_degree_[v]; }
  const IndexedSet<ClauseId>& unsat_clauses() const { return unsat_clauses_; }
  const IndexedSet<Var>& unsat_variables() const { return unsat_vars_; }

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  /// Break count minus make count for flipping v. O(deg(v)).
  int delta_energy(Var v) const {
    const bool old = value_[v] != 0;
    int delta = 0;
    for (const Incidence& inc : incidence(v)) {
      const std::uint32_t tc = true_count_[inc.clause];
      const std::uint32_t after = tc - (old ? inc.positive : inc.negative) + (old ? inc.negative : inc.positive);
      if (tc == 0 && after > 0)
        --delta;
      else if (tc > 0 && after == 0)
        ++delta;
    }
    return delta;
  }

  void flip(Var v) {
    const bool old = value_[v] != 0;
    value_[v] = old ? 0 : 1;
    for (const Incidence& inc : incidence(v)) {
      const std::uint32_t tc = true_count_[inc.clause];
      const std::uint32_t after = tc - (old ? inc.positive : inc.negative) + (old ? inc.negative : inc.positive);
      true_count_[inc.clause] = after;
      if (tc == 0 && after > 0)
        mark_satisfied(inc.clause);
      else if (tc > 0 && after == 0)
        mark_unsatisfied(inc.clause);
    }
    ++flips_;
  }

  /// Uniform over the support set. Requires energy() >= 1.
  Var sample_unsat_variable() { return unsat_vars_.sample(rng_); }

  /// Uniform unsatisfied clause, then uniform literal position in it.
  /// Requires energy() >= 1.
  Var sample_clause_then_variable() {
    const auto lits = formula_->clause(unsat_clauses_.sample(rng_));
    return lits[rng_.below(lits.size())].var();
  }

  void count_proposal() { ++proposals_; }

  /// Largest number of distinct clauses any variable appears in.
  std::uint32_t max_degree() const { return max_degree_; }

 private:
  // One entry per (variable, clause) pair. positive/negative count the
  // literals of the variable in the clause with each sign, so repeated and
  // tautological literals are handled without special cases.
  struct Incidence {
    ClauseId clause;
    std::uint16_t positive;
    std::uint16_t negative;
  };

  std::span<const Incidence> incidence(Var v) const {
    return {incidence_.data() + inc_start_[v], inc_start_[v + 1] - inc_start_[v]};
  }
  std::span<const Var> clause_vars(ClauseId c) const {
    return {clause_vars_.data() + cv_start_[c], cv_start_[c + 1] - cv_start_[c]};
  }

  void mark_unsatisfied(ClauseId c) {
    unsat_clauses_.insert(c);
    for (Var w : clause_vars(c))
      if (unsat_degree_[w]++ == 0) unsat_vars_.insert(w);
  }

  void mark_satisfied(ClauseId c) {
    unsat_clauses_.erase(c);
    for (Var w : clause_vars(c))
      if (--unsat_degree_[w] == 0) unsat_vars_.erase(w);
  }

  void build() {
    const Formula& f = *formula_;
    const std::size_t n = f.num_vars();
    const std::size_t m = f.num_clauses();

    inc_start_.assign(n + 2, 0);
    incidence_.clear();
    incidence_.reserve(f.num_literals());
    max_degree_ = 0;
    for (Var v = 1; v <= n; ++v) {
      inc_start_[v] = static_cast<std::uint32_t>(incidence_.size());
      // Occurrences of v are in clause order, so repeats are adjacent.
      for (const Occurrence& occ : f.occurrences(v)) {
        const bool neg = f.clause(occ.clause)[occ.position].negated();
        if (incidence_.size() > inc_start_[v] && incidence_.back().clause == occ.clause) {
          (neg ? incidence_.back().negative : incidence_.back().positive)++;
        } else {
          incidence_.push_back({occ.clause, static_cast<std::uint16_t>(neg ? 0 : 1),
                                static_cast<std::uint16_t>(neg ? 1 : 0)});
        }
      }
      max_degree_ = std::max<std::uint32_t>(max_degree_, static_cast<std::uint32_t>(incidence_.size() - inc_start_[v]));
    }
    inc_start_[n + 1] = static_cast<std::uint32_t>(incidence_.size());
    if (n == 0) inc_start_[0] = inc_start_[1] = 0;

    cv_start_.assign(m + 1, 0);
    clause_vars_.clear();
    clause_vars_.reserve(f.num_literals());
    for (ClauseId c = 0; c < m; ++c) {
      if (f.clause(c).empty()) throw std::invalid_argument("formula contains an empty clause");
      const std::size_t first = clause_vars_.size();
      for (Literal l : f.clause(c)) {
        bool seen = false;
        for (std::size_t i = first; i < clause_vars_.size(); ++i) seen = seen || clause_vars_[i] == l.var();
        if (!seen) clause_vars_.push_back(l.var());
      }
      cv_start_[c + 1] = static_cast<std::uint32_t>(clause_vars_.size());
    }

    true_count_.assign(m, 0);
    unsat_degree_.assign(n + 1, 0);
    unsat_clauses_.reset(m);
    unsat_vars_.reset(n + 1);
    for (ClauseId c = 0; c < m; ++c) {
      std::uint32_t tc = 0;
      for (Literal l : f.clause(c)) tc += l.satisfied_by(value_[l.var()] != 0) ? 1 : 0;
      true_count_[c] = tc;
      if (tc == 0) mark_unsatisfied(c);
    }
    flips_ = 0;
    proposals_ = 0;
  }

  const Formula* formula_;
  Rng rng_;
  std::vector<std::uint8_t> value_;
  std::vector<std::uint32_t> true_count_;
  std::vector<std::uint32_t> unsat_degree_;
  IndexedSet<ClauseId> unsat_clauses_;
  IndexedSet<Var> unsat_vars_;
  std::uint64_t flips_ = 0;
  std::uint64_t proposals_ = 0;

  std::vector<std::uint32_t> inc_start_;
  std::vector<Incidence> incidence_;
  std::vector<std::uint32_t> cv_start_;
  std::vector<Var> clause_vars_;
  std::uint32_t max_degree_ = 0;
};

/// True if delta_e <= 0; otherwise true with probability eta^delta_e.
/// Draws from `rng` only for uphill moves.
inline bool metropolis_accept(int delta_e, double eta, Rng& rng) {
  if (delta_e <= 0) return true;
  return rng.uniform() < std::pow(eta, delta_e);
}

/// Precomputed eta^d for the run loop; same decisions as metropolis_accept.
class MetropolisRule {
 public:
  MetropolisRule(double eta, std::uint32_t max_delta) : eta_(eta), powers_(max_delta + 1) {
    for (std::uint32_t d = 0; d <= max_delta; ++d) powers_[d] = std::pow(eta, static_cast<int>(d));
  }

  bool accept(int delta_e, Rng& rng) const {
    if (delta_e <= 0) return true;
    const double p = static_cast<std::size_t>(delta_e) < powers_.size() ? powers_[delta_e] : std::pow(eta_, delta_e);
    return rng.uniform() < p;
  }

 private:
  double eta_;
  std::vector<double> powers_;
};

struct RunConfig {
  Heuristic heuristic = Heuristic::vfms;
  double eta = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t max_flips = 0;  // 0: no limit
};

struct RunResult {
  bool solved = false;
  std::uint64_t flips = 0;
  std::uint64_t proposals = 0;
  std::size_t final_energy = 0;
  std::uint64_t seed = 0;
  double eta = 1.0;
  Heuristic heuristic = Heuristic::vfms;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

namespace detail {

template <Heuristic H>
void search_loop(SolverState& state, const MetropolisRule& rule, std::uint64_t max_flips, TraceSink* sink) {
  std::uint64_t next_record = sink ? sink->next_step() : ~std::uint64_t{0};
  while (!state.solved() && (max_flips == 0 || state.flips() < max_flips)) {
    Var v;
    if constexpr (H == Heuristic::vfms)
      v = state.sample_unsat_variable();
    else
      v = state.sample_clause_then_variable();
    state.count_proposal();

    bool accept = true;
    if constexpr (H != Heuristic::focused_walk) accept = rule.accept(state.delta_energy(v), state.rng());
    if (!accept) continue;

    state.flip(v);
    if (sink && state.flips() >= next_record) {
      sink->record(state);
      next_record = sink->next_step();
    }
  }
}

}  // namespace detail

/// Continues a search from `state` until it is solved or has made
/// `config.max_flips` flips in total. config.seed is ignored here; the state
/// owns its generator.
inline RunResult search(SolverState& state, const RunConfig& config, TraceSink* sink = nullptr) {
  if (config.heuristic != Heuristic::focused_walk && !valid_eta(config.eta))
    throw std::invalid_argument("eta must lie in (0, 1]");
  if (sink) sink->record(state);
  const MetropolisRule rule(config.eta, state.max_degree());
  switch (config.heuristic) {
    case Heuristic::vfms: detail::search_loop<Heuristic::vfms>(state, rule, config.max_flips, sink); break;
    case Heuristic::fms: detail::search_loop<Heuristic::fms>(state, rule, config.max_flips, sink); break;
    case Heuristic::focused_walk:
      detail::search_loop<Heuristic::focused_walk>(state, rule, config.max_flips, sink);
      break;
  }
  if (sink) sink->record_final(state);
  return RunResult{state.solved(), state.flips(),  state.proposals(),   state.energy(),
                   config.seed,    config.eta,     config.heuristic};
}

/// Random initial assignment from config.seed followed by search().
inline RunResult run(const Formula& formula, const RunConfig& config, TraceSink* sink = nullptr) {
  if (config.heuristic != Heuristic::focused_walk && !valid_eta(config.eta))
    throw std::invalid_argument("eta must lie in (0, 1]");
  SolverState state(formula, config.seed);
  return search(state, config, sink);
}

}  // namespace vfms
