#pragma once

// CNF formulas, DIMACS text I/O and the random K-SAT ensemble.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfms/rng.hpp"

namespace vfms {

using Var = std::uint32_t;       // 1-based variable index
using ClauseId = std::uint32_t;  // 0-based clause index

/// A variable or its negation, packed as (variable << 1) | negated.
class Literal {
 public:
  constexpr Literal() = default;
  constexpr Literal(Var v, bool negated) : code_((v << 1) | (negated ? 1u : 0u)) {}

  /// From a signed DIMACS integer; 0 is not a literal.
  static constexpr Literal from_dimacs(std::int64_t x) {
    return x < 0 ? Literal(static_cast<Var>(-x), true) : Literal(static_cast<Var>(x), false);
  }

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool negated() const { return (code_ & 1u) != 0; }
  constexpr std::int64_t to_dimacs() const {
    return negated() ? -static_cast<std::int64_t>(var()) : static_cast<std::int64_t>(var());
  }
  constexpr Literal operator~() const { return Literal::from_code(code_ ^ 1u); }

  /// True under an assignment where the variable takes `value`.
  constexpr bool satisfied_by(bool value) const { return value != negated(); }

  friend constexpr bool operator==(Literal, Literal) = default;

 private:
  static constexpr Literal from_code(std::uint32_t c) {
    Literal l;
    l.code_ = c;
    return l;
  }
  std::uint32_t code_ = 0;
};

/// Where a variable occurs: clause id and literal position inside it.
struct Occurrence {
  ClauseId clause;
  std::uint32_t position;
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Immutable CNF instance. Clauses are stored contiguously; the occurrence
/// index lists, for every variable, each (clause, position) where it appears.
class Formula {
 public:
  Formula() = default;

  /// Builds a formula from clauses of literals. Literals must reference
  /// variables in [1, num_vars]; throws std::invalid_argument otherwise.
  Formula(std::size_t num_vars, const std::vector<std::vector<Literal>>& clauses)
      : num_vars_(num_vars) {
    clause_start_.reserve(clauses.size() + 1);
    for (const auto& c : clauses) {
      literals_.insert(literals_.end(), c.begin(), c.end());
      clause_start_.push_back(static_cast<std::uint32_t>(literals_.size()));
    }
    finalize();
  }

  /// Flat constructor used by the generator: `width` literals per clause.
  Formula(std::size_t num_vars, std::size_t width, std::vector<Literal> flat)
      : num_vars_(num_vars), literals_(std::move(flat)) {
    if (width == 0 || literals_.size() % width != 0)
      throw std::invalid_argument("flat literal array is not a multiple of the clause width");
    const std::size_t m = literals_.size() / width;
    clause_start_.resize(m + 1);
    for (std::size_t c = 0; c <= m; ++c) clause_start_[c] = static_cast<std::uint32_t>(c * width);
    finalize();
  }

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_clauses() const { return clause_start_.empty() ? 0 : clause_start_.size() - 1; }
  std::size_t num_literals() const { return literals_.size(); }

  /// Widest clause. Equals K for a uniform K-SAT formula.
  std::size_t k() const { return max_width_; }
  bool uniform_width() const { return uniform_; }

  /// Clause density M / N.
  double alpha() const {
    return num_vars_ == 0 ? 0.0 : static_cast<double>(num_clauses()) / static_cast<double>(num_vars_);
  }

  std::span<const Literal> clause(ClauseId c) const {
    return {literals_.data() + clause_start_[c], clause_start_[c + 1] - clause_start_[c]};
  }

  std::span<const Occurrence> occurrences(Var v) const {
    return {occurrences_.data() + occ_start_[v], occ_start_[v + 1] - occ_start_[v]};
  }

  /// Some clause mentions one variable more than once (x v x, or x v -x).
  bool has_duplicate_variables() const { return duplicate_vars_; }
  /// Some clause contains both x and -x.
  bool has_tautologies() const { return tautologies_; }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.num_vars_ == b.num_vars_ && a.clause_start_ == b.clause_start_ &&
           a.literals_ == b.literals_;
  }

 private:
  void finalize() {
    if (num_clauses() > 0 && num_vars_ == 0)
      throw std::invalid_argument("formula with clauses must have at least one variable");
    max_width_ = 0;
    uniform_ = true;
    for (ClauseId c = 0; c < num_clauses(); ++c) {
      const std::size_t w = clause(c).size();
      if (c > 0 && w != max_width_) uniform_ = false;
      max_width_ = std::max(max_width_, w);
    }

    occ_start_.assign(num_vars_ + 2, 0);
    for (Literal l : literals_) {
      if (l.var() == 0 || l.var() > num_vars_)
        throw std::invalid_argument("literal references variable outside [1, num_vars]");
      ++occ_start_[l.var() + 1];
    }
    std::partial_sum(occ_start_.begin(), occ_start_.end(), occ_start_.begin());
    occurrences_.resize(literals_.size());
    std::vector<std::uint32_t> fill(occ_start_.begin(), occ_start_.end() - 1);
    for (ClauseId c = 0; c < num_clauses(); ++c) {
      const auto lits = clause(c);
      for (std::uint32_t p = 0; p < lits.size(); ++p) {
        occurrences_[fill[lits[p].var()]++] = {c, p};
        for (std::uint32_t q = 0; q < p; ++q) {
          if (lits[q].var() == lits[p].var()) {
            duplicate_vars_ = true;
            if (lits[q] != lits[p]) tautologies_ = true;
          }
        }
      }
    }
  }

  std::size_t num_vars_ = 0;
  std::vector<Literal> literals_;
  std::vector<std::uint32_t> clause_start_{0};
  std::vector<std::uint32_t> occ_start_{0, 0};
  std::vector<Occurrence> occurrences_;
  std::size_t max_width_ = 0;
  bool uniform_ = true;
  bool duplicate_vars_ = false;
  bool tautologies_ = false;
};

// ---------------------------------------------------------------------------
// DIMACS

enum class ParseErrorKind {
  missing_header,
  duplicate_header,
  malformed_header,
  malformed_literal,
  literal_out_of_range,
  empty_clause,
  unterminated_clause,
  clause_count_mismatch,
};

inline std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::missing_header: return "missing header";
    case ParseErrorKind::duplicate_header: return "duplicate header";
    case ParseErrorKind::malformed_header: return "malformed header";
    case ParseErrorKind::malformed_literal: return "malformed literal";
    case ParseErrorKind::literal_out_of_range: return "literal out of range";
    case ParseErrorKind::empty_clause: return "empty clause";
    case ParseErrorKind::unterminated_clause: return "unterminated clause";
    case ParseErrorKind::clause_count_mismatch: return "clause count mismatch";
  }
  return "parse error";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t line)
      : std::runtime_error(std::string(to_string(kind)) + ", line " + std::to_string(line)),
        kind_(kind),
        line_(line) {}

  ParseErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  ParseErrorKind kind_;
  std::size_t line_;
};

namespace detail {

inline std::string_view trim_left(std::string_view s) {
  const auto p = s.find_first_not_of(" \t\r\f\v");
  return p == std::string_view::npos ? std::string_view{} : s.substr(p);
}

// Splits on blanks; calls fn(token) for each.
template <typename Fn>
void for_each_token(std::string_view s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == '\f' || s[i] == '\v')) ++i;
    std::size_t j = i;
    while (j < s.size() && !(s[j] == ' ' || s[j] == '\t' || s[j] == '\r' || s[j] == '\f' || s[j] == '\v')) ++j;
    if (j > i) fn(s.substr(i, j - i));
    i = j;
  }
}

template <typename T>
bool parse_int(std::string_view tok, T& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace detail

/// Parses DIMACS CNF. Comment lines start with `c`; a line starting with `%`
/// ends the input (SATLIB convention). Clauses may span lines.
inline Formula parse_dimacs(std::istream& in) {
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t header_line = 0;
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::vector<std::vector<Literal>> clauses;
  std::vector<Literal> current;
  std::size_t current_start_line = 0;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::trim_left(line);
    if (body.empty() || body[0] == 'c') continue;
    if (body[0] == '%') break;
    if (body[0] == 'p') {
      if (have_header) throw ParseError(ParseErrorKind::duplicate_header, line_no);
      std::vector<std::string_view> toks;
      detail::for_each_token(body, [&](std::string_view t) { toks.push_back(t); });
      if (toks.size() != 4 || toks[0] != "p" || toks[1] != "cnf" || !detail::parse_int(toks[2], n) ||
          !detail::parse_int(toks[3], m) || n > 0x7fffffffULL || m > 0xffffffffULL)
        throw ParseError(ParseErrorKind::malformed_header, line_no);
      have_header = true;
      header_line = line_no;
      clauses.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(m, 1u << 20)));
      continue;
    }
    if (!have_header) throw ParseError(ParseErrorKind::missing_header, line_no);
    detail::for_each_token(body, [&](std::string_view tok) {
      std::int64_t x = 0;
      if (!detail::parse_int(tok, x)) throw ParseError(ParseErrorKind::malformed_literal, line_no);
      if (x == 0) {
        if (current.empty()) throw ParseError(ParseErrorKind::empty_clause, line_no);
        if (clauses.size() == m) throw ParseError(ParseErrorKind::clause_count_mismatch, line_no);
        clauses.push_back(std::move(current));
        current.clear();
        return;
      }
      const std::uint64_t mag = x < 0 ? static_cast<std::uint64_t>(-(x + 1)) + 1 : static_cast<std::uint64_t>(x);
      if (mag > n) throw ParseError(ParseErrorKind::literal_out_of_range, line_no);
      if (current.empty()) current_start_line = line_no;
      current.push_back(Literal::from_dimacs(x));
    });
  }
  if (!have_header) throw ParseError(ParseErrorKind::missing_header, line_no);
  if (!current.empty()) throw ParseError(ParseErrorKind::unterminated_clause, current_start_line);
  if (clauses.size() != m) throw ParseError(ParseErrorKind::clause_count_mismatch, line_no == 0 ? header_line : line_no);
  return Formula(static_cast<std::size_t>(n), clauses);
}

inline Formula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in);
}

inline void write_dimacs(std::ostream& out, const Formula& f) {
  out << "p cnf " << f.num_vars() << ' ' << f.num_clauses() << '\n';
  std::string buf;
  for (ClauseId c = 0; c < f.num_clauses(); ++c) {
    buf.clear();
    for (Literal l : f.clause(c)) {
      buf += std::to_string(l.to_dimacs());
      buf += ' ';
    }
    buf += "0\n";
    out << buf;
  }
}

inline std::string write_dimacs(const Formula& f) {
  std::ostringstream out;
  write_dimacs(out, f);
  return std::move(out).str();
}

// ---------------------------------------------------------------------------
// Random K-SAT

/// Standard random K-SAT ensemble: every clause draws `k` distinct variables
/// uniformly (partial Fisher-Yates over a persistent permutation of [1, n])
/// and negates each with probability 1/2. Duplicate clauses are allowed.
inline Formula generate_random_ksat(std::size_t n_vars, std::size_t n_clauses, std::size_t k,
                                    std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("clause width k must be at least 2");
  if (n_vars < k) throw std::invalid_argument("n_vars must be at least k");
  Rng rng(seed);
  std::vector<Var> perm(n_vars);
  std::iota(perm.begin(), perm.end(), Var{1});
  std::vector<Literal> flat;
  flat.reserve(n_clauses * k);
  for (std::size_t c = 0; c < n_clauses; ++c) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n_vars - i));
      std::swap(perm[i], perm[j]);
    }
    for (std::size_t i = 0; i < k; ++i) flat.emplace_back(perm[i], rng.coin());
  }
  if (n_clauses == 0) return Formula(n_vars, std::vector<std::vector<Literal>>{});
  return Formula(n_vars, k, std::move(flat));
}

/// M = round(alpha * n), ties to even.
inline std::size_t clauses_for_density(std::size_t n_vars, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  const double x = alpha * static_cast<double>(n_vars);
  const double fl = std::floor(x);
  const double frac = x - fl;
  double r = fl;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(fl, 2.0) != 0.0)) r = fl + 1.0;
  return static_cast<std::size_t>(r);
}

}  // namespace vfms
