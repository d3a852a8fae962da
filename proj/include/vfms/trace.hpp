#pragma once

// Snapshots of (flips, E, N_u) along a run, taken on a schedule that is
// geometric in the flip count (fixed points per decade) optionally merged
// with a linear stride, plus pointwise averaging across instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "vfms/csv.hpp"
#include "vfms/engine.hpp"

namespace vfms {

struct TracePoint {
  std::uint64_t flips = 0;
  std::uint64_t proposals = 0;
  std::size_t energy = 0;
  std::size_t n_u = 0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct TraceSchedule {
  std::uint32_t points_per_decade = 20;
  std::uint64_t linear_stride = 0;  // 0: geometric points only

  friend bool operator==(const TraceSchedule&, const TraceSchedule&) = default;
};

/// Walks the schedule in increasing order. Step i of the geometric part is
/// round(10^(i / points_per_decade)); equal roundings collapse.
class ScheduleCursor {
 public:
  explicit ScheduleCursor(TraceSchedule schedule) : schedule_(schedule) {
    if (schedule_.points_per_decade == 0) throw std::invalid_argument("points_per_decade must be positive");
  }

  /// Smallest schedule step strictly greater than `s`.
  std::uint64_t next_after(std::uint64_t s) {
    // The geometric index only moves forward; callers ask in increasing order.
    while (geometric(index_) <= s) ++index_;
    std::uint64_t next = geometric(index_);
    if (schedule_.linear_stride > 0) {
      const std::uint64_t lin = (s / schedule_.linear_stride + 1) * schedule_.linear_stride;
      next = std::min(next, lin);
    }
    return next;
  }

  bool contains(std::uint64_t s) {
    if (s == 0) return true;
    ScheduleCursor probe(schedule_);
    return probe.next_after(s - 1) == s;
  }

 private:
  std::uint64_t geometric(std::uint64_t i) const {
    const double x = std::pow(10.0, static_cast<double>(i) / schedule_.points_per_decade);
    return x >= 1.8e19 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(std::llround(x));
  }

  TraceSchedule schedule_;
  std::uint64_t index_ = 0;
};

/// Every schedule step in [0, max_flips], starting at 0.
inline std::vector<std::uint64_t> schedule_steps(std::uint64_t max_flips, TraceSchedule schedule) {
  ScheduleCursor cursor(schedule);
  std::vector<std::uint64_t> steps{0};
  for (std::uint64_t s = cursor.next_after(0); s <= max_flips; s = cursor.next_after(s)) steps.push_back(s);
  return steps;
}

struct Trace {
  TraceSchedule schedule;
  std::vector<TracePoint> points;
};

/// In-memory sink: a point at every schedule step the run reaches, plus the
/// terminal state if it fell between steps.
class TraceRecorder final : public TraceSink {
 public:
  explicit TraceRecorder(TraceSchedule schedule = {}) : cursor_(schedule) { trace_.schedule = schedule; }

  std::uint64_t next_step() const override { return next_; }

  void record(const SolverState& state) override {
    append(state);
    next_ = cursor_.next_after(state.flips());
  }

  void record_final(const SolverState& state) override {
    if (trace_.points.empty() || trace_.points.back().flips != state.flips()) append(state);
  }

  const Trace& trace() const& { return trace_; }
  Trace trace() && { return std::move(trace_); }

 private:
  void append(const SolverState& s) {
    trace_.points.push_back({s.flips(), s.proposals(), s.energy(), s.n_u()});
  }

  ScheduleCursor cursor_;
  std::uint64_t next_ = 0;
  Trace trace_;
};

struct AveragedPoint {
  std::uint64_t flips = 0;
  std::size_t count = 0;  // instances still unsolved at this step
  double mean_energy = 0;
  double mean_n_u = 0;
  double mean_ratio = 0;  // mean over instances of N_u / E
};

/// Pointwise mean over instances at shared schedule steps. Points with E = 0
/// (solved) and terminal points between steps do not contribute; steps no
/// instance reached are omitted.
inline std::vector<AveragedPoint> average_traces(std::span<const Trace> traces) {
  if (traces.empty()) return {};
  for (const Trace& t : traces)
    if (!(t.schedule == traces.front().schedule)) throw std::invalid_argument("traces use mismatched schedules");

  struct Acc {
    std::size_t count = 0;
    double energy = 0, n_u = 0, ratio = 0;
  };
  std::map<std::uint64_t, Acc> acc;
  ScheduleCursor cursor(traces.front().schedule);
  for (const Trace& t : traces) {
    for (const TracePoint& p : t.points) {
      if (p.energy == 0 || !cursor.contains(p.flips)) continue;
      Acc& a = acc[p.flips];
      ++a.count;
      a.energy += static_cast<double>(p.energy);
      a.n_u += static_cast<double>(p.n_u);
      a.ratio += static_cast<double>(p.n_u) / static_cast<double>(p.energy);
    }
  }
  std::vector<AveragedPoint> out;
  out.reserve(acc.size());
  for (const auto& [flips, a] : acc) {
    const double c = static_cast<double>(a.count);
    out.push_back({flips, a.count, a.energy / c, a.n_u / c, a.ratio / c});
  }
  return out;
}

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "flips,proposals,energy,n_u\n";
  for (const TracePoint& p : trace.points)
    out << p.flips << ',' << p.proposals << ',' << p.energy << ',' << p.n_u << '\n';
}

inline void write_average_csv(std::ostream& out, std::span<const AveragedPoint> points) {
  out << "flips,count,mean_energy,mean_n_u,mean_ratio\n";
  for (const AveragedPoint& p : points)
    out << p.flips << ',' << p.count << ',' << csv::number(p.mean_energy) << ',' << csv::number(p.mean_n_u) << ','
        << csv::number(p.mean_ratio) << '\n';
}

}  // namespace vfms
