#pragma once

// Dense tableau simplex for  max c.x  s.t.  A x <= b, x >= 0, with b >= 0 so
// the slack basis is feasible from the start.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace evidence_kit {

enum class LpStatus { optimal, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  std::vector<double> x;
  double value = 0.0;
  std::size_t pivots = 0;
};

inline LpResult lp_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                            const std::vector<double>& b, std::size_t max_pivots = 20000) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  const std::size_t width = n + m + 1;  // structural, slack, rhs
  constexpr double eps = 1e-12;

  std::vector<double> tab((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t col) -> double& { return tab[r * width + col]; };
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) at(r, j) = A[r][j];
    at(r, n + r) = 1.0;
    at(r, width - 1) = b[r];
  }
  // objective row holds reduced costs c_j - z_j
  for (std::size_t j = 0; j < n; ++j) at(m, j) = c[j];

  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;

  LpResult res;
  std::size_t degenerate_run = 0;
  for (;;) {
    if (res.pivots >= max_pivots) {
      res.status = LpStatus::iteration_limit;
      break;
    }
    // Dantzig pricing, Bland's rule after a run of degenerate pivots.
    const bool bland = degenerate_run > 50;
    std::size_t enter = width;
    double best = eps;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (at(m, j) > best) {
        enter = j;
        if (bland) break;
        best = at(m, j);
      }
    }
    if (enter == width) break;

    // Ratio test; near-ties go to the largest pivot element.
    std::size_t leave = m;
    double ratio = std::numeric_limits<double>::infinity();
    double pivot = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double a = at(r, enter);
      if (a <= 1e-11) continue;
      const double q = at(r, width - 1) / a;
      const bool tie = std::abs(q - ratio) <= 1e-12 * std::max(1.0, std::abs(ratio));
      if (q < ratio && !tie) {
        ratio = q;
        leave = r;
        pivot = a;
      } else if (tie && (bland ? basis[r] < basis[leave] : a > pivot)) {
        leave = r;
        pivot = a;
        ratio = std::min(ratio, q);
      }
    }
    if (leave == m) {
      res.status = LpStatus::unbounded;
      break;
    }
    degenerate_run = ratio <= eps ? degenerate_run + 1 : 0;

    const double inv = 1.0 / at(leave, enter);
    for (std::size_t j = 0; j < width; ++j) at(leave, j) *= inv;
    at(leave, enter) = 1.0;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double factor = at(r, enter);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) at(r, j) -= factor * at(leave, j);
      at(r, enter) = 0.0;
    }
    for (std::size_t r = 0; r < m; ++r)
      if (at(r, width - 1) < 0.0) at(r, width - 1) = 0.0;  // clamp roundoff
    basis[leave] = enter;
    ++res.pivots;
  }

  res.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) res.x[basis[r]] = at(r, width - 1);
  res.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

}  // namespace evidence_kit
