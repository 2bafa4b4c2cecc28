#pragma once

// Per-N brackets for the smallest constants c with
//   E_sin subset of c E_bin   (sin-into-bin)   and   E_bin subset of c E_sin   (bin-into-sin),
// where E_bin is the e-class of the binomial family on {0,...,N} and E_sin the
// e-class of the uniform-on-cell model of the sin^2 partition.

#include "evidence_kit/bernoulli.hpp"
#include "evidence_kit/bernstein.hpp"
#include "evidence_kit/lp.hpp"

#include <algorithm>
#include <future>
#include <queue>
#include <string>
#include <vector>

namespace evidence_kit {

enum class Direction { sin_into_bin, bin_into_sin };

inline std::string to_string(Direction d) { return d == Direction::sin_into_bin ? "sin2bin" : "bin2sin"; }

inline Direction parse_direction(const std::string& s) {
  if (s == "sin2bin" || s == "sin-into-bin") return Direction::sin_into_bin;
  if (s == "bin2sin" || s == "bin-into-sin") return Direction::bin_into_sin;
  throw Error(ErrorCode::invalid_input, "direction must be sin2bin or bin2sin, got '" + s + "'");
}

struct ConstantBracket {
  unsigned N = 0;
  Direction direction = Direction::sin_into_bin;
  double lower = 1.0;
  double upper = 1.0;
  ScoreFn<double> witness{FiniteSpace({"0"}), {Extended<double>(1.0)}};  // on {0,...,N}; recomputes to >= lower
  std::optional<double> p;     // maximizing p (sin-into-bin)
  std::size_t rounds = 0;      // subdivisions, or cutting-plane rounds summed over cells
  NumericsMode mode = NumericsMode::binary64;
};

struct ConstantSearchOptions {
  std::size_t max_rounds = 200;         // cutting-plane rounds per cell
  std::size_t max_subdivisions = 100000;
  unsigned threads = 1;
};

namespace detail {

/// F(p) = sum over cells A of |A| max_{j in A} bin_p(j), with the per-cell argmax.
inline double sin2bin_objective(const CellPartition& part, double p, std::vector<unsigned>* arg = nullptr) {
  double total = 0.0;
  if (arg) arg->assign(part.size(), 0);
  for (std::size_t c = 0; c < part.size(); ++c) {
    double best = -1.0;
    for (unsigned j = part.cells[c].first; j <= part.cells[c].second; ++j) {
      const double v = binomial_pmf(part.N, j, p);
      if (v > best) {
        best = v;
        if (arg) (*arg)[c] = j;
      }
    }
    total += part.cell_size(c) * best;
  }
  return total;
}

/// Upper bound of F on [a,b]: bin_p(j) is unimodal in p with mode j/N, so its
/// maximum over [a,b] sits at the clamped mode.
inline double sin2bin_interval_bound(const CellPartition& part, double a, double b) {
  double total = 0.0;
  for (std::size_t c = 0; c < part.size(); ++c) {
    double best = 0.0;
    for (unsigned j = part.cells[c].first; j <= part.cells[c].second; ++j) {
      const double mode = static_cast<double>(j) / part.N;
      best = std::max(best, binomial_pmf(part.N, j, std::clamp(mode, a, b)));
    }
    total += part.cell_size(c) * best;
  }
  return total * (1.0 + 1e-12);
}

inline ConstantBracket sin_into_bin(const CellPartition& part, double tol, const ConstantSearchOptions& opt) {
  struct Piece {
    double a, b, bound;
    bool operator<(const Piece& o) const { return bound < o.bound; }
  };
  ConstantBracket r;
  r.N = part.N;
  r.direction = Direction::sin_into_bin;
  double best_p = 0.0;
  double lower = 0.0;
  auto consider = [&](double p) {
    const double v = sin2bin_objective(part, p);
    if (v > lower) {
      lower = v;
      best_p = p;
    }
  };
  consider(0.0);
  consider(1.0);
  std::priority_queue<Piece> queue;
  queue.push({0.0, 1.0, sin2bin_interval_bound(part, 0.0, 1.0)});
  std::size_t steps = 0;
  double upper = queue.top().bound;
  while (!queue.empty()) {
    upper = std::max(queue.top().bound, lower);
    if (upper - lower <= tol) break;
    if (steps >= opt.max_subdivisions)
      throw Error(ErrorCode::did_not_converge, "sin2bin bracket [" + to_text(lower) + ", " + to_text(upper) +
                                                   "] did not reach the tolerance");
    Piece piece = queue.top();
    queue.pop();
    ++steps;
    const double mid = 0.5 * (piece.a + piece.b);
    consider(mid);
    for (auto [a, b] : {std::pair{piece.a, mid}, std::pair{mid, piece.b}}) {
      const double bound = sin2bin_interval_bound(part, a, b);
      if (bound > lower) queue.push({a, b, bound});
    }
  }
  if (queue.empty()) upper = lower;
  r.lower = lower;
  r.upper = std::max(upper, lower);
  r.p = best_p;
  r.rounds = steps;
  std::vector<unsigned> arg;
  sin2bin_objective(part, best_p, &arg);
  std::vector<Extended<double>> w(part.N + 1, Extended<double>(0.0));
  for (std::size_t c = 0; c < part.size(); ++c) w[arg[c]] = Extended<double>(static_cast<double>(part.cell_size(c)));
  r.witness = ScoreFn<double>(count_space(part.N), std::move(w));
  return r;
}

struct CellResult {
  double lower = 1.0;
  double upper = 1.0;
  std::vector<double> h;  // feasible for the binomial family; length N+1
  std::size_t rounds = 0;
};

/// Maximize the average of h over one cell subject to sup_p sum_j bin_p(j) h_j <= 1,
/// by cutting planes on the set of p-values.
inline CellResult bin_into_sin_cell(unsigned N, unsigned first, unsigned last, double tol,
                                    const ConstantSearchOptions& opt) {
  const unsigned n = last - first + 1;
  std::vector<double> grid{0.0, 0.5, 1.0};
  CellResult best;
  best.h.assign(N + 1, 0.0);
  best.upper = std::numeric_limits<double>::infinity();
  for (unsigned j = first; j <= last; ++j) best.h[j] = 1.0;  // h = 1 on the cell is feasible: sum_j bin_p(j) <= 1

  for (std::size_t round = 1; round <= opt.max_rounds; ++round) {
    best.rounds = round;
    // rows: one per grid point; columns scaled to unit maximum
    std::vector<std::vector<double>> raw(grid.size(), std::vector<double>(n));
    std::vector<double> scale(n, 0.0);
    for (std::size_t r = 0; r < grid.size(); ++r)
      for (unsigned j = 0; j < n; ++j) {
        raw[r][j] = binomial_pmf(N, first + j, grid[r]);
        scale[j] = std::max(scale[j], raw[r][j]);
      }
    std::vector<double> c(n);
    for (unsigned j = 0; j < n; ++j) {
      for (auto& row : raw) row[j] /= scale[j];
      c[j] = 1.0 / (n * scale[j]);
    }
    auto lp = lp_maximize(c, raw, std::vector<double>(grid.size(), 1.0));
    if (lp.status != LpStatus::optimal)
      throw Error(ErrorCode::did_not_converge, "cutting-plane LP did not reach an optimum");
    // the relaxation bounds the cell constant; pad for simplex roundoff
    best.upper = std::min(best.upper, lp.value * (1.0 + 1e-9));

    std::vector<double> h(N + 1, 0.0);
    for (unsigned j = 0; j < n; ++j) h[first + j] = lp.x[j] / scale[j];
    BernsteinOptions<double> bo;
    bo.tol = 0.1 * tol;
    bo.threshold = 1.0 + tol;
    auto env = bernstein_max<double>(h, bo);

    const double factor = std::max(1.0, env.upper);
    double avg = 0.0;
    for (unsigned j = first; j <= last; ++j) avg += h[j] / factor;
    avg /= n;
    if (avg > best.lower) {
      best.lower = avg;
      best.h = h;
      for (auto& x : best.h) x /= factor;
    }
    if (best.upper - best.lower <= tol * best.upper) return best;
    if (env.upper <= 1.0 + tol) {
      // feasible up to tol but the relaxation gap remains: locate the optimizer's peak
      BernsteinOptions<double> fine;
      fine.tol = 1e-3 * tol;
      env = bernstein_max<double>(h, fine);
    }
    grid.push_back(env.argmax);
  }
  throw Error(ErrorCode::did_not_converge, "bin2sin cell [" + std::to_string(first) + ".." + std::to_string(last) +
                                               "] stalled at [" + to_text(best.lower) + ", " + to_text(best.upper) +
                                               "] after " + std::to_string(opt.max_rounds) + " rounds");
}

inline ConstantBracket bin_into_sin(const CellPartition& part, double tol, const ConstantSearchOptions& opt) {
  std::vector<CellResult> cells(part.size());
  if (opt.threads > 1) {
    std::vector<std::future<CellResult>> jobs;
    for (std::size_t c = 0; c < part.size(); ++c)
      jobs.push_back(std::async(std::launch::async, [&, c] {
        return bin_into_sin_cell(part.N, part.cells[c].first, part.cells[c].second, tol, opt);
      }));
    for (std::size_t c = 0; c < part.size(); ++c) cells[c] = jobs[c].get();
  } else {
    for (std::size_t c = 0; c < part.size(); ++c)
      cells[c] = bin_into_sin_cell(part.N, part.cells[c].first, part.cells[c].second, tol, opt);
  }
  ConstantBracket r;
  r.N = part.N;
  r.direction = Direction::bin_into_sin;
  std::size_t arg = 0;
  r.upper = 0.0;
  r.lower = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    r.upper = std::max(r.upper, cells[c].upper);
    if (cells[c].lower > r.lower) {
      r.lower = cells[c].lower;
      arg = c;
    }
    r.rounds += cells[c].rounds;
  }
  r.lower = std::max(r.lower, 1.0);
  r.upper = std::max(r.upper, r.lower);
  std::vector<Extended<double>> w;
  for (double x : cells[arg].h) w.emplace_back(x);
  r.witness = ScoreFn<double>(count_space(part.N), std::move(w));
  return r;
}

}  // namespace detail

/// Smallest relative bin2sin tolerance: the LP upper bound carries a 1e-9
/// roundoff pad, so tighter targets cannot be met.
inline constexpr double min_bin2sin_tol = 1e-8;

/// sin2bin: tol is the absolute bracket width. bin2sin: tol is relative; the
/// search stops once (upper - lower) <= tol * upper.
inline ConstantBracket constant_search(unsigned N, Direction direction, double tol,
                                       const ConstantSearchOptions& opt = {}) {
  if (!(tol > 0)) throw Error(ErrorCode::invalid_parameter, "tolerance must be positive");
  if (direction == Direction::bin_into_sin && tol < min_bin2sin_tol)
    throw Error(ErrorCode::invalid_parameter, "bin2sin tolerance below " + to_text(min_bin2sin_tol) +
                                                  " is under the LP roundoff floor");
  const auto part = sin_partition(N);
  return direction == Direction::sin_into_bin ? detail::sin_into_bin(part, tol, opt)
                                              : detail::bin_into_sin(part, tol, opt);
}

/// Maximal cell average of h, the ratio certified by a bin-into-sin witness.
inline double max_cell_average(const ScoreFn<double>& h, const CellPartition& part) {
  double best = 0.0;
  for (std::size_t c = 0; c < part.size(); ++c) {
    double sum = 0.0;
    for (unsigned k = part.cells[c].first; k <= part.cells[c].second; ++k) sum += h[k].value();
    best = std::max(best, sum / part.cell_size(c));
  }
  return best;
}

}  // namespace evidence_kit
