#pragma once

// Certified global maximum of a univariate polynomial on [0, 1] given in
// Bernstein form: sum_k c_k C(n,k) p^k (1-p)^(n-k).
//
// On any sub-interval the polynomial lies below the largest Bernstein
// coefficient and equals the first/last coefficient at the interval ends, so
// best-first midpoint subdivision yields a bracket [lower, upper] of the
// supremum. In exact mode the bracket is exact; in binary64 mode both ends are
// widened by an a-priori bound on the de Casteljau rounding error.

#include "evidence_kit/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace evidence_kit {

template <class T>
struct BernsteinBracket {
  T lower{};
  T upper{};
  T argmax{};  // a point where `lower` is attained (up to rounding)
  bool certified = false;  // upper - lower <= tol was reached
  std::size_t subdivisions = 0;
};

template <class T>
struct BernsteinOptions {
  T tol = T(0);
  std::optional<T> threshold;  // stop once sup <= threshold or sup > threshold is known
  std::size_t max_subdivisions = 100000;
};

namespace detail {

template <class T>
struct BernsteinPiece {
  T a;
  T b;
  std::vector<T> coeffs;
  T bound;
  int depth;
};

template <class T>
struct PieceOrder {
  bool operator()(const BernsteinPiece<T>& x, const BernsteinPiece<T>& y) const { return x.bound < y.bound; }
};

template <class T>
T max_coeff(std::span<const T> c) {
  return *std::max_element(c.begin(), c.end());
}

// Splits coefficients at the midpoint; `left` and `right` share the middle value.
template <class T>
void de_casteljau_halves(std::span<const T> c, std::vector<T>& left, std::vector<T>& right) {
  const std::size_t n = c.size() - 1;
  std::vector<T> work(c.begin(), c.end());
  left.resize(n + 1);
  right.resize(n + 1);
  left[0] = work[0];
  right[n] = work[n];
  for (std::size_t r = 1; r <= n; ++r) {
    for (std::size_t i = 0; i + r <= n; ++i) work[i] = (work[i] + work[i + 1]) / T(2);
    left[r] = work[0];
    right[n - r] = work[n - r];
  }
}

}  // namespace detail

/// Evaluates sum_k c_k C(n,k) p^k (1-p)^(n-k) by de Casteljau.
template <class T>
T bernstein_eval(std::span<const T> c, const T& p) {
  std::vector<T> work(c.begin(), c.end());
  const T q = T(1) - p;
  for (std::size_t r = 1; r < work.size(); ++r)
    for (std::size_t i = 0; i + r < work.size(); ++i) work[i] = q * work[i] + p * work[i + 1];
  return work.at(0);
}

template <class T>
BernsteinBracket<T> bernstein_max(std::span<const T> coeffs, const BernsteinOptions<T>& opt) {
  if (coeffs.empty()) throw Error(ErrorCode::invalid_input, "empty coefficient vector");
  const std::size_t degree = coeffs.size() - 1;

  // Rounding allowance: each midpoint level perturbs coefficients by at most
  // one rounding of a value bounded by max|c|.
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, std::abs(to_double(c)));
  auto pad = [&](int depth) -> T {
    if constexpr (is_exact_v<T>) {
      return T(0);
    } else {
      return 4.0 * (depth + 2) * (degree + 1) * std::numeric_limits<double>::epsilon() * scale;
    }
  };

  BernsteinBracket<T> out;
  out.lower = coeffs.front();
  out.argmax = T(0);
  if (coeffs.back() > out.lower) {
    out.lower = coeffs.back();
    out.argmax = T(1);
  }
  int max_depth = 0;

  std::priority_queue<detail::BernsteinPiece<T>, std::vector<detail::BernsteinPiece<T>>, detail::PieceOrder<T>> queue;
  {
    std::vector<T> c(coeffs.begin(), coeffs.end());
    T bound = detail::max_coeff<T>(c) + pad(0);
    queue.push({T(0), T(1), std::move(c), bound, 0});
  }

  auto lower_certain = [&] { return out.lower - pad(max_depth); };

  std::vector<T> left, right;
  for (;;) {
    const T upper = queue.empty() ? out.lower + pad(max_depth) : std::max(queue.top().bound, out.lower + pad(max_depth));
    out.upper = upper;
    if (upper - lower_certain() <= opt.tol) {
      out.certified = true;
      break;
    }
    if (opt.threshold) {
      if (upper <= *opt.threshold || lower_certain() > *opt.threshold) break;
    }
    if (queue.empty() || out.subdivisions >= opt.max_subdivisions) break;

    auto piece = queue.top();
    queue.pop();
    ++out.subdivisions;
    detail::de_casteljau_halves<T>(piece.coeffs, left, right);
    const T mid = (piece.a + piece.b) / T(2);
    const int depth = piece.depth + 1;
    max_depth = std::max(max_depth, depth);
    if (left.back() > out.lower) {
      out.lower = left.back();
      out.argmax = mid;
    }
    const T lb = detail::max_coeff<T>(left) + pad(depth);
    const T rb = detail::max_coeff<T>(right) + pad(depth);
    // Pieces that cannot beat the current lower bound never set `upper`.
    if (lb > out.lower) queue.push({piece.a, mid, left, lb, depth});
    if (rb > out.lower) queue.push({mid, piece.b, right, rb, depth});
  }
  out.lower = lower_certain();
  if (out.upper < out.lower) out.upper = out.lower;
  return out;
}

template <class T>
BernsteinBracket<T> bernstein_max(const std::vector<T>& coeffs, const BernsteinOptions<T>& opt) {
  return bernstein_max<T>(std::span<const T>(coeffs), opt);
}

}  // namespace evidence_kit
