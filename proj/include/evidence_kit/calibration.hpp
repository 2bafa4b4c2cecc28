#pragma once

// p-to-e and e-to-p calibrators: the power family kappa * p^(kappa-1), the
// logarithmic family H_kappa, and the Markov-inequality inverse min(1, 1/e).

#include "evidence_kit/core.hpp"
#include "evidence_kit/extended.hpp"
#include "evidence_kit/rational.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace evidence_kit {

enum class CalibratorKind { power, log, inverse };

inline std::string_view to_string(CalibratorKind k) {
  switch (k) {
    case CalibratorKind::power: return "power";
    case CalibratorKind::log: return "log";
    case CalibratorKind::inverse: return "inverse";
  }
  return "unknown";
}

class Calibrator {
 public:
  static Calibrator power(double kappa) { return Calibrator(CalibratorKind::power, kappa); }
  static Calibrator log(double kappa) { return Calibrator(CalibratorKind::log, kappa); }
  static Calibrator inverse() { return Calibrator(CalibratorKind::inverse, 0.0); }

  CalibratorKind kind() const { return kind_; }
  double kappa() const { return kappa_; }

  /// Largest p at which H_kappa is positive, e^(-1-kappa).
  double log_cutoff() const { return std::exp(-1.0 - kappa_); }
  /// kappa (1 + kappa)^kappa.
  double log_coefficient() const { return kappa_ * std::pow(1.0 + kappa_, kappa_); }

 private:
  Calibrator(CalibratorKind kind, double kappa) : kind_(kind), kappa_(kappa) {
    switch (kind) {
      case CalibratorKind::power:
        if (!(kappa > 0.0 && kappa < 1.0))
          throw Error(ErrorCode::invalid_kappa, "power calibrator needs kappa in (0,1), got " + to_text(kappa));
        break;
      case CalibratorKind::log:
        if (!(kappa > 0.0) || !std::isfinite(kappa))
          throw Error(ErrorCode::invalid_kappa, "log calibrator needs kappa > 0, got " + to_text(kappa));
        break;
      case CalibratorKind::inverse:
        break;
    }
  }

  CalibratorKind kind_;
  double kappa_;
};

inline Extended<double> calibrate_p_to_e(const Calibrator& cal, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::value_out_of_range, "p must lie in [0,1], got " + to_text(p));
  const double k = cal.kappa();
  switch (cal.kind()) {
    case CalibratorKind::power:
      if (p == 0.0) return Extended<double>::infinity();
      return k * std::pow(p, k - 1.0);
    case CalibratorKind::log:
      if (p == 0.0) return Extended<double>::infinity();
      if (p > cal.log_cutoff()) return 0.0;
      return cal.log_coefficient() / p * std::pow(-std::log(p), -1.0 - k);
    case CalibratorKind::inverse:
      break;
  }
  throw Error(ErrorCode::invalid_input, "the inverse calibrator maps e-values to p-values");
}

/// Rational upper enclosure of calibrate_p_to_e at a rational p: the libm
/// value pushed up by a few ulps. Integrating the enclosure exactly certifies
/// e-function membership of the true calibrated function.
inline Extended<Rational> calibrate_p_to_e_upper(const Calibrator& cal, const Rational& p) {
  if (p < 0 || p > 1) throw Error(ErrorCode::value_out_of_range, "p must lie in [0,1], got " + to_text(p));
  if (p == 0) return Extended<Rational>::infinity();
  // the double nearest p may sit below p; calibrators are nonincreasing, so
  // evaluate at a double that is <= p.
  double pd = to_double(p);
  if (rational_from_double(pd) > p) pd = std::nextafter(pd, 0.0);
  if (pd <= 0.0) pd = std::numeric_limits<double>::denorm_min();
  // H_kappa jumps to 0 above the cutoff; decide that branch exactly enough.
  if (cal.kind() == CalibratorKind::log) {
    if (to_double(p) > round_up(cal.log_cutoff(), 8)) return Rational(0);
    // near the cutoff use the formula branch regardless of the rounded test
    const double value = cal.log_coefficient() / pd * std::pow(-std::log(pd), -1.0 - cal.kappa());
    return rational_from_double(round_up(value, 8));
  }
  auto e = calibrate_p_to_e(cal, pd);
  if (e.is_infinite()) return Extended<Rational>::infinity();
  return rational_from_double(round_up(e.value(), 8));
}

inline double calibrate_e_to_p(const Extended<double>& e) {
  if (e.is_infinite()) return 0.0;
  if (e.value() < 0) throw Error(ErrorCode::value_out_of_range, "e-values are nonnegative");
  if (e.value() <= 1.0) return 1.0;
  return 1.0 / e.value();
}

template <class T>
T calibrate_e_to_p_exact(const Extended<T>& e) {
  if (e.is_infinite()) return T(0);
  if (e.value() < 0) throw Error(ErrorCode::value_out_of_range, "e-values are nonnegative");
  if (e.value() <= 1) return T(1);
  return T(1) / e.value();
}

template <class T>
ScoreFn<T> e_to_p(const ScoreFn<T>& f) {
  return f.map([](const Extended<T>& e) { return Extended<T>(calibrate_e_to_p_exact(e)); });
}

inline ScoreFn<double> p_to_e(const Calibrator& cal, const ScoreFn<double>& f) {
  return f.map([&](const Extended<double>& p) {
    if (p.is_infinite()) throw Error(ErrorCode::value_out_of_range, "p-values are finite");
    return calibrate_p_to_e(cal, p.value());
  });
}

inline ScoreFn<Rational> p_to_e_upper(const Calibrator& cal, const ScoreFn<Rational>& f) {
  return f.map([&](const Extended<Rational>& p) {
    if (p.is_infinite()) throw Error(ErrorCode::value_out_of_range, "p-values are finite");
    return calibrate_p_to_e_upper(cal, p.value());
  });
}

// ---------------------------------------------------------------------------
// Admissibility: integral of the calibrator over [0,1] must not exceed 1.

namespace detail {

struct GaussKronrod15 {
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
      0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
      0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
      0.417959183673469387755102040816327};

  struct Result {
    double value;
    double error;
  };

  template <class Fn>
  static Result apply(const Fn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * wk[7];
    double gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
      const double x = h * xk[j];
      const double f1 = f(c - x);
      const double f2 = f(c + x);
      kron += wk[j] * (f1 + f2);
      if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
    }
    return {kron * h, std::abs((kron - gauss) * h)};
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]; bisects the interval
/// with the largest error estimate until the total is below `target`.
template <class Fn>
QuadratureResult adaptive_gauss_kronrod(const Fn& f, double a, double b, double target, std::size_t max_intervals) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  std::priority_queue<Piece> queue;
  auto first = GaussKronrod15::apply(f, a, b);
  queue.push({a, b, first.value, first.error});
  double total = first.value;
  double error = first.error;
  while (error > target && queue.size() < max_intervals) {
    Piece top = queue.top();
    queue.pop();
    const double m = 0.5 * (top.a + top.b);
    if (!(m > top.a && m < top.b)) {
      queue.push(top);
      break;
    }
    auto left = GaussKronrod15::apply(f, top.a, m);
    auto right = GaussKronrod15::apply(f, m, top.b);
    total += left.value + right.value - top.value;
    error += left.error + right.error - top.error;
    queue.push({top.a, m, left.value, left.error});
    queue.push({m, top.b, right.value, right.error});
  }
  // re-sum to shed accumulated cancellation in the running totals
  QuadratureResult out;
  out.intervals = queue.size();
  while (!queue.empty()) {
    out.value += queue.top().value;
    out.error += queue.top().error;
    queue.pop();
  }
  // floating-point floor: a few ulps per interval of the computed value
  out.error += 50.0 * std::numeric_limits<double>::epsilon() * std::abs(out.value) * static_cast<double>(out.intervals);
  out.converged = out.error <= target;
  return out;
}

}  // namespace detail

/// Numerically certifies that the calibrator integrates to at most 1 over
/// [0, 1]. The endpoint singularity at p = 0 is removed by substitution
/// (u = p^kappa for the power family, u = -ln p followed by u = (1+kappa)/t for
/// the logarithmic family) so quadrature nodes never approach it. The verdict
/// carries `integral` and `error_bound` in its stats.
inline Verdict admissibility_check(const Calibrator& cal, std::size_t subdivisions, double tolerance = 1e-9) {
  if (subdivisions < 16) throw Error(ErrorCode::invalid_parameter, "admissibility_check needs >= 16 subdivisions");
  const double k = cal.kappa();
  const double target = tolerance / 10.0;
  detail::QuadratureResult q;
  switch (cal.kind()) {
    case CalibratorKind::power: {
      // p = u^(1/k), dp = (1/k) u^(1/k - 1) du; evaluated in logs so tiny u
      // does not underflow p.
      auto integrand = [k](double u) {
        const double log_u = std::log(u);
        const double log_p = log_u / k;
        const double log_cal = std::log(k) + (k - 1.0) * log_p;
        const double log_jac = -std::log(k) + (1.0 / k - 1.0) * log_u;
        return std::exp(log_cal + log_jac);
      };
      q = detail::adaptive_gauss_kronrod(integrand, 0.0, 1.0, target, subdivisions);
      break;
    }
    case CalibratorKind::log: {
      // p = e^(-u): H(p) dp = c u^(-1-k) du on [1+k, inf); then u = (1+k)/t
      // maps it onto t in (0, 1], and t = s^(1/k) removes the t^(k-1)
      // endpoint singularity. Evaluated in logs like the power family.
      const double log_coeff = std::log(cal.log_coefficient());
      auto integrand = [k, log_coeff](double s) {
        const double log_s = std::log(s);
        const double log_t = log_s / k;
        const double log_u = std::log1p(k) - log_t;
        const double log_jac_u = std::log1p(k) - 2.0 * log_t;
        const double log_jac_t = -std::log(k) + (1.0 / k - 1.0) * log_s;
        return std::exp(log_coeff + (-1.0 - k) * log_u + log_jac_u + log_jac_t);
      };
      q = detail::adaptive_gauss_kronrod(integrand, 0.0, 1.0, target, subdivisions);
      break;
    }
    case CalibratorKind::inverse:
      throw Error(ErrorCode::invalid_input, "admissibility applies to p-to-e calibrators");
  }
  if (!q.converged)
    throw Error(ErrorCode::quadrature_did_not_converge,
                "error estimate " + to_text(q.error) + " after " + std::to_string(q.intervals) + " intervals");

  Verdict v;
  v.mode = NumericsMode::binary64;
  v.stats["integral"] = q.value;
  v.stats["error_bound"] = q.error;
  v.stats["intervals"] = static_cast<double>(q.intervals);
  const double worst = q.value + q.error;
  v.margin = 1.0 + tolerance - worst;
  if (worst <= 1.0 + tolerance) {
    v.status = Status::accepted;
  } else {
    v.status = q.value - q.error > 1.0 + tolerance ? Status::rejected : Status::inconclusive;
    v.witness = Witness{std::string(to_string(cal.kind())) + " kappa=" + to_text(k), k, std::nullopt, std::nullopt,
                        to_text(q.value), "1"};
  }
  return v;
}

}  // namespace evidence_kit
