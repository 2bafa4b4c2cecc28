#pragma once

// Membership tests for e-functions and p-functions with respect to simple
// measures and composite models, including conditional (parameter-dependent)
// functions and the upper envelope P*(f) = sup_theta int f dP_theta.

#include "evidence_kit/bernstein.hpp"
#include "evidence_kit/core.hpp"
#include "evidence_kit/counts.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

namespace evidence_kit {

// ---------------------------------------------------------------------------
// Models

template <class T>
struct FiniteFamily {
  FiniteSpace space;
  FiniteSpace parameters;
  std::vector<Measure<T>> members;  // indexed like `parameters`
};

/// B_p on {0,1}^N for every p in [0,1].
struct BernoulliFamily {
  unsigned N;
  FiniteSpace space;
};

/// bin_p on {0,...,N} for every p in [0,1].
struct BinomialFamily {
  unsigned N;
  FiniteSpace space;
};

/// U_k, the uniform measure on the cell containing k, for every k.
struct PartitionUniform {
  CellPartition partition;
  FiniteSpace space;
};

template <class T>
class StatModel {
 public:
  using Variant = std::variant<FiniteFamily<T>, BernoulliFamily, BinomialFamily, PartitionUniform>;

  static StatModel finite_family(FiniteSpace parameters, std::vector<Measure<T>> members) {
    if (members.empty() || members.size() != parameters.size())
      throw Error(ErrorCode::invalid_input, "one measure per parameter label is required");
    FiniteSpace space = members.front().space();
    for (const auto& m : members)
      require_same_space(m.space(), space, "finite family members must share one space");
    return StatModel(FiniteFamily<T>{space, std::move(parameters), std::move(members)});
  }
  /// Finite family with parameters labelled "0", "1", ...
  static StatModel finite_family(std::vector<Measure<T>> members) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < members.size(); ++i) labels.push_back(std::to_string(i));
    return finite_family(FiniteSpace(std::move(labels)), std::move(members));
  }
  static StatModel simple(const Measure<T>& mu) { return finite_family(FiniteSpace({"P"}), {mu}); }
  static StatModel bernoulli(unsigned N) { return StatModel(BernoulliFamily{N, binary_space(N)}); }
  static StatModel binomial(unsigned N) { return StatModel(BinomialFamily{N, count_space(N)}); }
  static StatModel partition_uniform(CellPartition partition) {
    FiniteSpace space = count_space(partition.N);
    return StatModel(PartitionUniform{std::move(partition), std::move(space)});
  }

  const Variant& variant() const { return v_; }
  const FiniteSpace& space() const {
    return std::visit([](const auto& m) -> const FiniteSpace& { return m.space; }, v_);
  }
  bool is_finite_family() const { return std::holds_alternative<FiniteFamily<T>>(v_); }
  const FiniteFamily<T>& family() const {
    if (auto p = std::get_if<FiniteFamily<T>>(&v_)) return *p;
    throw Error(ErrorCode::invalid_input, "model is not a finite family");
  }

 private:
  explicit StatModel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// ---------------------------------------------------------------------------
// Conditional score functions f(omega; theta)

template <class T>
class ConditionalScoreFn {
 public:
  ConditionalScoreFn(FiniteSpace omega, FiniteSpace theta, std::vector<Extended<T>> values)
      : omega_(std::move(omega)), theta_(std::move(theta)), values_(std::move(values)) {
    if (values_.size() != omega_.size() * theta_.size())
      throw Error(ErrorCode::space_mismatch, "conditional function needs |Omega|*|Theta| values");
    for (const auto& v : values_)
      if (v.is_finite() && v.value() < 0) throw Error(ErrorCode::value_out_of_range, "negative conditional score");
  }

  /// Reads the values off a function on the product space.
  static ConditionalScoreFn from_product(const ScoreFn<T>& f) {
    const auto& s = f.space();
    return ConditionalScoreFn(s.omega_factor(), s.theta_factor(), {f.values().begin(), f.values().end()});
  }

  /// Stacks one function on Omega per theta.
  static ConditionalScoreFn from_slices(const FiniteSpace& theta, const std::vector<ScoreFn<T>>& slices) {
    if (slices.size() != theta.size()) throw Error(ErrorCode::space_mismatch, "one slice per parameter");
    const FiniteSpace omega = slices.front().space();
    std::vector<Extended<T>> v(omega.size() * theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
      require_same_space(slices[j].space(), omega, "slices must share one space");
      for (std::size_t i = 0; i < omega.size(); ++i) v[i * theta.size() + j] = slices[j][i];
    }
    return ConditionalScoreFn(omega, theta, std::move(v));
  }

  const FiniteSpace& omega() const { return omega_; }
  const FiniteSpace& theta() const { return theta_; }
  const Extended<T>& operator()(std::size_t omega, std::size_t theta) const {
    return values_[omega * theta_.size() + theta];
  }
  std::span<const Extended<T>> values() const { return values_; }

  ScoreFn<T> slice(std::size_t theta) const {
    std::vector<Extended<T>> v(omega_.size());
    for (std::size_t i = 0; i < omega_.size(); ++i) v[i] = (*this)(i, theta);
    return ScoreFn<T>(omega_, std::move(v));
  }

  ScoreFn<T> on_product() const { return ScoreFn<T>(FiniteSpace::product(omega_, theta_), values_); }

  friend bool operator==(const ConditionalScoreFn& a, const ConditionalScoreFn& b) {
    return a.omega_ == b.omega_ && a.theta_ == b.theta_ && a.values_ == b.values_;
  }

 private:
  FiniteSpace omega_;
  FiniteSpace theta_;
  std::vector<Extended<T>> values_;
};

// ---------------------------------------------------------------------------
// Upper envelope

template <class T>
struct EnvelopeResult {
  Extended<T> lower;
  Extended<T> upper;
  std::string argmax_hint;            // member label, "p=<value>", or cell
  std::optional<T> argmax_parameter;  // numeric parameter for the Bernoulli/binomial families
  bool certified = false;             // true supremum lies in [lower, upper] and width <= tol
  bool infinite = false;              // supremum is +inf
  NumericsMode mode = mode_of<T>();
  std::size_t subdivisions = 0;
};

namespace detail {

template <class T>
std::string cell_label(const CellPartition& p, std::size_t c) {
  return "cell[" + std::to_string(p.cells[c].first) + ".." + std::to_string(p.cells[c].second) + "]";
}

template <class T>
bool any_infinite(const ScoreFn<T>& f) {
  return std::any_of(f.values().begin(), f.values().end(), [](const auto& v) { return v.is_infinite(); });
}

/// Bernstein coefficients of p -> int f dB_p: level sums divided by C(N,k).
template <class T>
std::vector<T> bernoulli_coefficients(const ScoreFn<T>& f, unsigned N) {
  std::vector<T> sums(N + 1, T(0));
  const auto ones = ones_by_position(N);
  for (std::size_t i = 0; i < f.size(); ++i) sums[ones[i]] += f[i].value();
  for (unsigned k = 0; k <= N; ++k) sums[k] /= binomial_as<T>(N, k);
  return sums;
}

template <class T>
EnvelopeResult<T> envelope_from_coefficients(const std::vector<T>& coeffs, const T& tol, std::optional<T> threshold) {
  BernsteinOptions<T> opt;
  opt.tol = tol;
  opt.threshold = std::move(threshold);
  auto b = bernstein_max<T>(coeffs, opt);
  EnvelopeResult<T> r;
  r.lower = b.lower;
  r.upper = b.upper;
  r.argmax_parameter = b.argmax;
  r.argmax_hint = "p=" + to_text(to_double(b.argmax));
  r.certified = b.certified;
  r.subdivisions = b.subdivisions;
  return r;
}

template <class T>
EnvelopeResult<T> infinite_envelope(std::string hint) {
  EnvelopeResult<T> r;
  r.lower = Extended<T>::infinity();
  r.upper = Extended<T>::infinity();
  r.argmax_hint = std::move(hint);
  r.certified = true;
  r.infinite = true;
  return r;
}

template <class T>
EnvelopeResult<T> envelope_impl(const ScoreFn<T>& f, const StatModel<T>& model, const T& tol,
                                std::optional<T> threshold) {
  require_same_space(f.space(), model.space(), "function and model live on different spaces");
  return std::visit(
      [&](const auto& m) -> EnvelopeResult<T> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FiniteFamily<T>>) {
          EnvelopeResult<T> r;
          r.certified = true;
          for (std::size_t j = 0; j < m.members.size(); ++j) {
            auto v = integrate(f, m.members[j]);
            if (j == 0 || v > r.upper) {
              r.upper = v;
              r.argmax_hint = m.parameters.label(j);
            }
          }
          r.lower = r.upper;
          r.infinite = r.upper.is_infinite();
          return r;
        } else if constexpr (std::is_same_v<M, PartitionUniform>) {
          if (any_infinite(f)) {
            for (std::size_t i = 0; i < f.size(); ++i)
              if (f[i].is_infinite()) return infinite_envelope<T>(cell_label<T>(m.partition, m.partition.cell_of[i]));
          }
          EnvelopeResult<T> r;
          r.certified = true;
          for (std::size_t c = 0; c < m.partition.size(); ++c) {
            T sum(0);
            for (unsigned k = m.partition.cells[c].first; k <= m.partition.cells[c].second; ++k) sum += f[k].value();
            Extended<T> avg(sum / T(static_cast<long>(m.partition.cell_size(c))));
            if (c == 0 || avg > r.upper) {
              r.upper = avg;
              r.argmax_hint = cell_label<T>(m.partition, c);
            }
          }
          r.lower = r.upper;
          return r;
        } else if constexpr (std::is_same_v<M, BernoulliFamily>) {
          if (any_infinite(f)) return infinite_envelope<T>("p=0.5");
          return envelope_from_coefficients<T>(bernoulli_coefficients(f, m.N), tol, threshold);
        } else {
          if (any_infinite(f)) return infinite_envelope<T>("p=0.5");
          std::vector<T> c;
          c.reserve(f.size());
          for (const auto& v : f.values()) c.push_back(v.value());
          return envelope_from_coefficients<T>(c, tol, threshold);
        }
      },
      model.variant());
}

}  // namespace detail

/// Supremum over the model of int f dP_theta. Finite families and partition
/// models are evaluated exactly (lower == upper); the Bernoulli and binomial
/// families return a certified Bernstein bracket of width <= tol.
template <class T>
EnvelopeResult<T> upper_envelope(const ScoreFn<T>& f, const StatModel<T>& model, const T& tol) {
  if (!(tol > 0)) throw Error(ErrorCode::invalid_parameter, "envelope tolerance must be positive");
  return detail::envelope_impl(f, model, tol, std::optional<T>());
}

// ---------------------------------------------------------------------------
// e-functions

namespace detail {

template <class T>
Verdict verdict_from_envelope(const EnvelopeResult<T>& env, const T& bound) {
  Verdict v;
  v.mode = mode_of<T>();
  v.stats["envelope_lower"] = env.lower.to_double();
  v.stats["envelope_upper"] = env.upper.to_double();
  const Extended<T> b(bound);
  v.margin = env.upper.is_infinite() ? -std::numeric_limits<double>::infinity() : to_double(bound - env.upper.value());
  if (env.upper <= b) {
    v.status = Status::accepted;
    return v;
  }
  v.status = env.lower > b ? Status::rejected : Status::inconclusive;
  Witness w;
  w.parameter = env.argmax_hint;
  if (env.argmax_parameter) w.parameter_value = to_double(*env.argmax_parameter);
  w.attained = env.lower.text();
  w.bound = to_text(bound);
  v.witness = std::move(w);
  return v;
}

}  // namespace detail

/// Accepted iff sup_theta int f dP_theta <= 1 is certified, rejected iff the
/// certified lower bound exceeds 1, inconclusive otherwise.
template <class T>
Verdict is_e_function(const ScoreFn<T>& f, const StatModel<T>& model, const T& tol) {
  if (!(tol > 0)) throw Error(ErrorCode::invalid_parameter, "tolerance must be positive");
  auto env = detail::envelope_impl(f, model, tol, std::optional<T>(T(1)));
  auto v = detail::verdict_from_envelope(env, T(1));
  if (v.accepted() && !env.certified) {
    // the threshold stop only shows sup <= 1; refine so margin and stats
    // describe the actual envelope
    auto fine = detail::envelope_impl(f, model, tol, std::optional<T>());
    if (fine.upper < env.upper) {
      v.margin = to_double(T(1) - fine.upper.value());
      v.stats["envelope_upper"] = fine.upper.to_double();
    }
    v.stats["envelope_lower"] = std::max(env.lower, fine.lower).to_double();
  }
  return v;
}

template <class T>
Verdict is_e_function(const ScoreFn<T>& f, const Measure<T>& mu) {
  return is_e_function(f, StatModel<T>::simple(mu), T(1));
}

// ---------------------------------------------------------------------------
// p-functions

namespace detail {

template <class T>
void require_p_candidate(const ScoreFn<T>& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& v = f[i];
    if (v.is_infinite() || v.value() < 0 || v.value() > 1)
      throw Error(ErrorCode::value_out_of_range, "p-function value at '" + f.space().label(i) + "' is outside [0,1]");
  }
}

template <class T>
std::vector<T> distinct_values(const ScoreFn<T>& f) {
  std::vector<T> v;
  v.reserve(f.size());
  for (const auto& x : f.values()) v.push_back(x.value());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Records the tightest constraint P*{f <= eps} <= eps seen so far.
template <class T>
struct PCheck {
  Verdict verdict;
  bool first = true;

  void observe(const T& eps, const Extended<T>& prob_upper, const Extended<T>& prob_lower, const std::string& where,
               std::optional<double> param = std::nullopt) {
    const double slack = to_double(eps) - prob_upper.to_double();
    const bool violated = prob_lower > Extended<T>(eps);
    const bool unsure = !violated && prob_upper > Extended<T>(eps);
    Status s = violated ? Status::rejected : (unsure ? Status::inconclusive : Status::accepted);
    auto rank = [](Status x) { return x == Status::rejected ? 2 : (x == Status::inconclusive ? 1 : 0); };
    const bool worse = first || rank(s) > rank(verdict.status) || (rank(s) == rank(verdict.status) && slack < verdict.margin);
    if (worse) {
      verdict.status = s;
      verdict.margin = slack;
      if (s != Status::accepted) {
        Witness w;
        w.parameter = where;
        w.parameter_value = param;
        w.epsilon = to_text(eps);
        w.attained = prob_lower.text();
        w.bound = to_text(eps);
        verdict.witness = std::move(w);
      } else {
        verdict.witness.reset();
      }
    }
    first = false;
  }
};

/// P{f <= v} for each distinct value v (ascending) under a single measure.
template <class T>
std::vector<T> lower_set_masses(const ScoreFn<T>& f, std::span<const T> weights, const std::vector<T>& values) {
  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a].value() < f[b].value(); });
  std::vector<T> out(values.size(), T(0));
  T acc(0);
  std::size_t pos = 0;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    while (pos < order.size() && f[order[pos]].value() <= values[vi]) acc += weights[order[pos++]];
    out[vi] = acc;
  }
  return out;
}

}  // namespace detail

/// Accepted iff P*{f <= v} <= v for every value v taken by f. The map
/// eps -> P*{f <= eps} is a nondecreasing step function that only jumps at
/// values of f, so these finitely many checks cover every eps > 0.
template <class T>
Verdict is_p_function(const ScoreFn<T>& f, const StatModel<T>& model, const T& tol = from_double<T>(1e-9)) {
  require_same_space(f.space(), model.space(), "function and model live on different spaces");
  detail::require_p_candidate(f);
  const auto values = detail::distinct_values(f);
  detail::PCheck<T> check;
  check.verdict.mode = mode_of<T>();

  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, FiniteFamily<T>>) {
          for (std::size_t j = 0; j < m.members.size(); ++j) {
            auto masses = detail::lower_set_masses(f, m.members[j].weights(), values);
            for (std::size_t vi = 0; vi < values.size(); ++vi)
              check.observe(values[vi], masses[vi], masses[vi], m.parameters.label(j));
          }
        } else if constexpr (std::is_same_v<M, PartitionUniform>) {
          for (std::size_t c = 0; c < m.partition.size(); ++c) {
            const auto [a, b] = m.partition.cells[c];
            const T size(static_cast<long>(b - a + 1));
            for (const auto& v : values) {
              long hits = 0;
              for (unsigned k = a; k <= b; ++k) hits += f[k].value() <= v ? 1 : 0;
              const T mass = T(hits) / size;
              check.observe(v, mass, mass, detail::cell_label<T>(m.partition, c));
            }
          }
        } else {
          constexpr bool bernoulli = std::is_same_v<M, BernoulliFamily>;
          for (const auto& v : values) {
            std::vector<T> coeffs;
            if constexpr (bernoulli) {
              auto ind = ScoreFn<T>::from(f.space(), [&](std::size_t i) { return f[i].value() <= v ? T(1) : T(0); });
              coeffs = detail::bernoulli_coefficients(ind, m.N);
            } else {
              for (const auto& x : f.values()) coeffs.push_back(x.value() <= v ? T(1) : T(0));
            }
            BernsteinOptions<T> opt;
            opt.tol = tol;
            opt.threshold = v;
            auto b = bernstein_max<T>(coeffs, opt);
            check.observe(v, b.upper, b.lower, "p=" + to_text(to_double(b.argmax)), to_double(b.argmax));
          }
        }
      },
      model.variant());
  return check.verdict;
}

template <class T>
Verdict is_p_function(const ScoreFn<T>& f, const Measure<T>& mu) {
  return is_p_function(f, StatModel<T>::simple(mu));
}

// ---------------------------------------------------------------------------
// Conditional functions

template <class T>
Verdict is_conditional_e(const ConditionalScoreFn<T>& f, const StatModel<T>& model) {
  const auto& fam = model.family();
  require_same_space(f.omega(), fam.space, "conditional function and model disagree on Omega");
  require_same_space(f.theta(), fam.parameters, "conditional function and model disagree on Theta");
  Verdict v;
  v.mode = mode_of<T>();
  bool first = true;
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    auto integral = integrate(f.slice(j), fam.members[j]);
    const double slack = integral.is_infinite() ? -std::numeric_limits<double>::infinity()
                                                : to_double(T(1) - integral.value());
    const bool violated = integral > Extended<T>(T(1));
    if (first || slack < v.margin) {
      v.margin = slack;
      if (violated) {
        v.status = Status::rejected;
        Witness w;
        w.parameter = fam.parameters.label(j);
        w.attained = integral.text();
        w.bound = "1";
        v.witness = std::move(w);
      }
    }
    first = false;
  }
  return v;
}

template <class T>
Verdict is_conditional_p(const ConditionalScoreFn<T>& f, const StatModel<T>& model) {
  const auto& fam = model.family();
  require_same_space(f.omega(), fam.space, "conditional function and model disagree on Omega");
  require_same_space(f.theta(), fam.parameters, "conditional function and model disagree on Theta");
  detail::PCheck<T> check;
  check.verdict.mode = mode_of<T>();
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    auto slice = f.slice(j);
    detail::require_p_candidate(slice);
    const auto values = detail::distinct_values(slice);
    auto masses = detail::lower_set_masses(slice, fam.members[j].weights(), values);
    for (std::size_t vi = 0; vi < values.size(); ++vi)
      check.observe(values[vi], masses[vi], masses[vi], fam.parameters.label(j));
  }
  return check.verdict;
}

// ---------------------------------------------------------------------------
// Generators

/// Tail probability of a statistic: f(w) = mu{w' : stat(w') >= stat(w)}.
template <class T>
ScoreFn<T> p_from_statistic(const ScoreFn<T>& stat, const Measure<T>& mu) {
  require_same_space(stat.space(), mu.space(), "statistic and measure live on different spaces");
  std::vector<std::size_t> order(stat.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stat[b] < stat[a]; });
  std::vector<Extended<T>> out(stat.size());
  T acc(0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && stat[order[j]] == stat[order[i]]) acc += mu[order[j++]];
    for (std::size_t t = i; t < j; ++t) out[order[t]] = acc;
    i = j;
  }
  return ScoreFn<T>(stat.space(), std::move(out));
}

/// Pointwise supremum over the model of the tail probabilities, clipped to 1.
/// For the continuous families the certified envelope upper bounds are used,
/// which only enlarge the function and so keep it a p-function.
template <class T>
ScoreFn<T> p_from_statistic(const ScoreFn<T>& stat, const StatModel<T>& model, const T& tol) {
  require_same_space(stat.space(), model.space(), "statistic and model live on different spaces");
  if (model.is_finite_family()) {
    const auto& fam = model.family();
    std::vector<Extended<T>> best(stat.size(), Extended<T>(T(0)));
    for (const auto& mu : fam.members) {
      auto f = p_from_statistic(stat, mu);
      for (std::size_t i = 0; i < f.size(); ++i) best[i] = std::max(best[i], f[i]);
    }
    return ScoreFn<T>(stat.space(), std::move(best));
  }
  std::vector<Extended<T>> out(stat.size());
  for (std::size_t i = 0; i < stat.size(); ++i) {
    auto ind = ScoreFn<T>::from(stat.space(), [&](std::size_t j) { return stat[j] >= stat[i] ? T(1) : T(0); });
    auto env = upper_envelope(ind, model, tol);
    out[i] = env.upper.is_infinite() || env.upper.value() > 1 ? Extended<T>(T(1)) : env.upper;
  }
  return ScoreFn<T>(stat.space(), std::move(out));
}

}  // namespace evidence_kit
