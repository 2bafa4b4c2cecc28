#pragma once

// Binary sequences under Bernoulli and exchangeable models: Bernoulli and
// binomial measures, exchangeable e-functions, configuration (multiset)
// models, factorization of IID e-functions, and the sin^2 net with its
// partition of the counts.

#include "evidence_kit/bayes.hpp"
#include "evidence_kit/core.hpp"
#include "evidence_kit/counts.hpp"
#include "evidence_kit/testing.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace evidence_kit {

namespace detail {

template <class T>
T int_power(const T& base, unsigned e) {
  T r(1);
  for (unsigned i = 0; i < e; ++i) r *= base;
  return r;
}

template <class T>
void require_probability(const T& p) {
  if (p < 0 || p > 1) throw Error(ErrorCode::invalid_parameter, "p must lie in [0,1], got " + to_text(p));
}

}  // namespace detail

/// B_p({w}) = p^(+w) (1-p)^(N-+w) on {0,1}^N.
template <class T>
Measure<T> bernoulli_measure(unsigned N, const T& p) {
  detail::require_probability(p);
  auto space = binary_space(N);
  const auto ones = ones_by_position(N);
  std::vector<T> up(N + 1), down(N + 1);
  for (unsigned k = 0; k <= N; ++k) {
    up[k] = detail::int_power(p, k);
    down[k] = detail::int_power(T(1) - p, k);
  }
  std::vector<T> w(space.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = up[ones[i]] * down[N - ones[i]];
  if constexpr (!is_exact_v<T>) {
    // renormalize away accumulated rounding so the measure validates for large N
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
  }
  return Measure<T>(space, std::move(w));
}

/// bin_p({k}) = C(N,k) p^k (1-p)^(N-k) on {0,...,N}.
template <class T>
Measure<T> binomial_measure(unsigned N, const T& p) {
  if (N < 1) throw Error(ErrorCode::invalid_parameter, "N must be >= 1");
  detail::require_probability(p);
  std::vector<T> w(N + 1);
  for (unsigned k = 0; k <= N; ++k)
    w[k] = binomial_as<T>(N, k) * detail::int_power(p, k) * detail::int_power(T(1) - p, N - k);
  if constexpr (!is_exact_v<T>) {
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
  }
  return Measure<T>(count_space(N), std::move(w));
}

/// binomial pmf in binary64 without forming large powers.
inline double binomial_pmf(unsigned N, unsigned k, double p) {
  if (k > N) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == N ? 1.0 : 0.0;
  const double log_choose = std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0);
  return std::exp(log_choose + k * std::log(p) + (N - k) * std::log1p(-p));
}

// ---------------------------------------------------------------------------
// Exchangeability

/// Averages of f over the level sets {+w = k}; the exchangeable e-class is
/// exactly the set of f whose level averages are all <= 1.
template <class T>
std::vector<Extended<T>> level_averages(const ScoreFn<T>& f) {
  const unsigned N = binary_length(f.space());
  const auto ones = ones_by_position(N);
  std::vector<Extended<T>> sums(N + 1, Extended<T>(T(0)));
  for (std::size_t i = 0; i < f.size(); ++i) sums[ones[i]] += f[i];
  for (unsigned k = 0; k <= N; ++k)
    if (sums[k].is_finite()) sums[k] = Extended<T>(sums[k].value() / binomial_as<T>(N, k));
  return sums;
}

template <class T>
Verdict is_exch_e(const ScoreFn<T>& f) {
  const auto avg = level_averages(f);
  Verdict v;
  v.mode = mode_of<T>();
  for (unsigned k = 0; k < avg.size(); ++k) {
    const double slack = avg[k].is_infinite() ? -std::numeric_limits<double>::infinity() : to_double(T(1) - avg[k].value());
    if (k == 0 || slack < v.margin) {
      v.margin = slack;
      if (avg[k] > Extended<T>(T(1))) {
        v.status = Status::rejected;
        v.witness = Witness{"k=" + std::to_string(k), static_cast<double>(k), std::nullopt, std::nullopt,
                            avg[k].text(), "1"};
      }
    }
  }
  return v;
}

/// p-functions for every exchangeable measure: the supremum over exchangeable
/// measures of P{f <= eps} is attained at a uniform level-set measure.
template <class T>
Verdict is_exch_p(const ScoreFn<T>& f) {
  const unsigned N = binary_length(f.space());
  detail::require_p_candidate(f);
  const auto ones = ones_by_position(N);
  detail::PCheck<T> check;
  check.verdict.mode = mode_of<T>();
  for (unsigned k = 0; k <= N; ++k) {
    std::vector<T> vals;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (ones[i] == k) vals.push_back(f[i].value());
    std::sort(vals.begin(), vals.end());
    const T size = binomial_as<T>(N, k);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i + 1 < vals.size() && vals[i + 1] == vals[i]) continue;
      const T mass = T(static_cast<long>(i + 1)) / size;
      check.observe(vals[i], mass, mass, "k=" + std::to_string(k));
    }
  }
  return check.verdict;
}

// ---------------------------------------------------------------------------
// Configuration models

/// Theta = multisets of size N over the alphabet, P_theta uniform on the
/// orderings of theta. For the alphabet {0,1} the configurations are labelled
/// by their number of ones, so Theta is {0,...,N}.
template <class T>
struct ConfigurationModel {
  FiniteSpace alphabet;
  unsigned N;
  FiniteSpace omega;
  FiniteSpace theta;
  std::vector<std::size_t> conf_of;       // omega index -> theta index
  std::vector<std::size_t> orderings;     // theta index -> number of sequences
  std::vector<std::vector<unsigned>> counts;  // theta index -> symbol multiplicities
  std::vector<Measure<T>> kernel;

  bool binary() const { return alphabet.size() == 2 && alphabet.label(0) == "0" && alphabet.label(1) == "1"; }

  /// Pushforward of pi^N under the configuration map.
  Measure<T> configuration_measure(const Measure<T>& pi) const {
    require_same_space(pi.space(), alphabet, "IID component must live on the alphabet");
    const std::size_t m = alphabet.size();
    std::vector<T> w(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
      T prod(1);
      std::size_t code = i;
      for (unsigned pos = 0; pos < N; ++pos) {
        prod *= pi[code % m];
        code /= m;
      }
      w[i] = prod;
    }
    Measure<T> iid(omega, std::move(w));
    return pushforward<T>(iid, theta, std::function<std::size_t(std::size_t)>([this](std::size_t i) {
                            return conf_of[i];
                          }));
  }

  ParaBayesModel<T> with_iid_components(const FiniteSpace& labels, const std::vector<Measure<T>>& pis) const {
    std::vector<Measure<T>> priors;
    priors.reserve(pis.size());
    for (const auto& pi : pis) priors.push_back(configuration_measure(pi));
    return ParaBayesModel<T>(omega, theta, kernel, labels, std::move(priors));
  }
};

template <class T>
ConfigurationModel<T> configuration_model(const FiniteSpace& alphabet, unsigned N, std::size_t budget = 1u << 20) {
  const std::size_t m = alphabet.size();
  if (m < 2) throw Error(ErrorCode::invalid_alphabet, "alphabet needs at least two symbols");
  if (N < 1) throw Error(ErrorCode::invalid_parameter, "N must be >= 1");
  double total = std::pow(static_cast<double>(m), static_cast<double>(N));
  if (total > static_cast<double>(budget))
    throw Error(ErrorCode::budget_exceeded, std::to_string(m) + "^" + std::to_string(N) + " sequences exceed the budget");
  const auto size = static_cast<std::size_t>(total);

  const bool single_char = std::all_of(alphabet.labels().begin(), alphabet.labels().end(),
                                       [](const std::string& s) { return s.size() == 1; });
  const bool binary = m == 2 && alphabet.label(0) == "0" && alphabet.label(1) == "1";

  // Sequences in lexicographic order; position 0 is the most significant digit.
  std::vector<std::string> seq_labels(size);
  std::vector<std::vector<unsigned>> seq_counts(size, std::vector<unsigned>(m, 0));
  for (std::size_t i = 0; i < size; ++i) {
    std::vector<std::size_t> digits(N);
    std::size_t code = i;
    for (unsigned pos = 0; pos < N; ++pos) {
      digits[N - 1 - pos] = code % m;
      code /= m;
    }
    std::string label;
    for (unsigned pos = 0; pos < N; ++pos) {
      if (!single_char && pos > 0) label += ',';
      label += alphabet.label(digits[pos]);
      ++seq_counts[i][digits[pos]];
    }
    seq_labels[i] = std::move(label);
  }

  // Configurations: nondecreasing symbol-index sequences in lexicographic order.
  std::vector<std::vector<unsigned>> confs;
  {
    std::vector<std::size_t> idx(N, 0);
    for (;;) {
      std::vector<unsigned> c(m, 0);
      for (auto s : idx) ++c[s];
      confs.push_back(std::move(c));
      int pos = static_cast<int>(N) - 1;
      while (pos >= 0 && idx[pos] == m - 1) --pos;
      if (pos < 0) break;
      const auto v = idx[pos] + 1;
      for (auto q = static_cast<std::size_t>(pos); q < N; ++q) idx[q] = v;
    }
  }
  if (binary) {
    // order by number of ones: {0^N}, {0^(N-1) 1}, ...
    std::sort(confs.begin(), confs.end(), [](const auto& a, const auto& b) { return a[1] < b[1]; });
  }
  std::vector<std::string> conf_labels;
  std::map<std::vector<unsigned>, std::size_t> conf_index;
  for (std::size_t t = 0; t < confs.size(); ++t) {
    conf_index.emplace(confs[t], t);
    if (binary) {
      conf_labels.push_back(std::to_string(confs[t][1]));
    } else {
      std::string label = "{";
      bool first = true;
      for (std::size_t s = 0; s < m; ++s)
        for (unsigned r = 0; r < confs[t][s]; ++r) {
          if (!first) label += ',';
          label += alphabet.label(s);
          first = false;
        }
      conf_labels.push_back(label + "}");
    }
  }

  FiniteSpace omega(std::move(seq_labels));
  FiniteSpace theta(std::move(conf_labels));
  std::vector<std::size_t> conf_of(size);
  std::vector<std::size_t> orderings(confs.size(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    conf_of[i] = conf_index.at(seq_counts[i]);
    ++orderings[conf_of[i]];
  }
  std::vector<Measure<T>> kernel;
  kernel.reserve(confs.size());
  for (std::size_t t = 0; t < confs.size(); ++t) {
    std::vector<T> w(size, T(0));
    const T mass = T(1) / T(static_cast<long>(orderings[t]));
    for (std::size_t i = 0; i < size; ++i)
      if (conf_of[i] == t) w[i] = mass;
    kernel.emplace_back(omega, std::move(w));
  }
  return ConfigurationModel<T>{alphabet, N, omega, theta, std::move(conf_of), std::move(orderings), std::move(confs),
                               std::move(kernel)};
}

inline FiniteSpace binary_alphabet() { return FiniteSpace({"0", "1"}); }

/// Factorization f = g * h(conf) of an IID e-function.
template <class T>
struct IidDecomposition {
  ScoreFn<T> g;       // on Omega; g = f / h(conf) with 0/0 := 0
  ScoreFn<T> h;       // on Theta; h(theta) = average of f over the orderings of theta
  Verdict g_verdict;  // exchangeable e-class
  Verdict h_verdict;  // configuration (binomial when binary) e-class
  bool product_identity = false;         // g * h(conf) == f on the support
  std::vector<std::size_t> off_support;  // omega indices null under every IID component
};

namespace detail {

template <class T>
Verdict configuration_exch_verdict(const ScoreFn<T>& g, const ConfigurationModel<T>& model) {
  std::vector<ScoreFn<T>> slices(model.theta.size(), g);
  return is_conditional_e(ConditionalScoreFn<T>::from_slices(model.theta, slices),
                          StatModel<T>::finite_family(model.theta, model.kernel));
}

template <class T>
IidDecomposition<T> decompose_iid_common(const ScoreFn<T>& f, const ConfigurationModel<T>& model) {
  require_same_space(f.space(), model.omega, "function must live on the sequence space");
  std::vector<Extended<T>> sums(model.theta.size(), Extended<T>(T(0)));
  for (std::size_t i = 0; i < f.size(); ++i) sums[model.conf_of[i]] += f[i];
  for (std::size_t t = 0; t < sums.size(); ++t)
    if (sums[t].is_finite()) sums[t] = Extended<T>(sums[t].value() / T(static_cast<long>(model.orderings[t])));
  std::vector<Extended<T>> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = divide(f[i], sums[model.conf_of[i]]);
  IidDecomposition<T> d{ScoreFn<T>(model.omega, std::move(g)), ScoreFn<T>(model.theta, std::move(sums)), {}, {}, false, {}};
  d.g_verdict = model.binary() ? is_exch_e(d.g) : configuration_exch_verdict(d.g, model);
  return d;
}

template <class T>
bool iid_identity(const IidDecomposition<T>& d, const ScoreFn<T>& f, const ConfigurationModel<T>& model) {
  std::size_t next_off = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (next_off < d.off_support.size() && d.off_support[next_off] == i) {
      ++next_off;
      continue;
    }
    if (!(d.g[i] * d.h[model.conf_of[i]] == f[i])) return false;
  }
  return true;
}

}  // namespace detail

/// Binary case against the full Bernoulli family: h is checked against every
/// binomial measure with a certified envelope (bracket width `tol`).
template <class T>
IidDecomposition<T> decompose_iid_e(const ScoreFn<T>& f, const ConfigurationModel<T>& model, const T& tol) {
  if (!model.binary()) throw Error(ErrorCode::invalid_alphabet, "the full IID family is only available for {0,1}");
  auto d = detail::decompose_iid_common(f, model);
  d.h_verdict = is_e_function(d.h, StatModel<T>::binomial(model.N), tol);
  d.product_identity = detail::iid_identity(d, f, model);  // every sequence has positive B_p mass
  return d;
}

/// General alphabet against a finite set of IID components pi (measures on
/// the alphabet); h is checked against the configuration measures of the pis.
template <class T>
IidDecomposition<T> decompose_iid_e(const ScoreFn<T>& f, const ConfigurationModel<T>& model, const FiniteSpace& labels,
                                    const std::vector<Measure<T>>& pis) {
  auto d = detail::decompose_iid_common(f, model);
  std::vector<Measure<T>> priors;
  for (const auto& pi : pis) priors.push_back(model.configuration_measure(pi));
  d.h_verdict = is_e_function(d.h, StatModel<T>::finite_family(labels, priors), T(1));
  // support: sequences with positive pi^N mass for some component
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool on = false;
    for (const auto& q : priors) on = on || q[model.conf_of[i]] != 0;
    if (!on) d.off_support.push_back(i);
  }
  d.product_identity = detail::iid_identity(d, f, model);
  return d;
}

/// w -> g(w) h(conf(w)).
template <class T>
ScoreFn<T> compose_iid(const ScoreFn<T>& g, const ScoreFn<T>& h, const ConfigurationModel<T>& model) {
  require_same_space(g.space(), model.omega, "g must live on the sequence space");
  require_same_space(h.space(), model.theta, "h must live on the configurations");
  return ScoreFn<T>::from(model.omega, [&](std::size_t i) { return g[i] * h[model.conf_of[i]]; });
}

// ---------------------------------------------------------------------------
// sin^2 net

struct SinNet {
  unsigned N = 0;
  unsigned n_star = 0;          // floor((pi/2) sqrt(N))
  std::vector<double> points;   // sin^2(a / sqrt(N)), a = 1..n_star-1
};

inline SinNet sin_net(unsigned N) {
  if (N < 2) throw Error(ErrorCode::n_too_small, "the sin^2 net needs N >= 2");
  SinNet net;
  net.N = N;
  const double root = std::sqrt(static_cast<double>(N));
  net.n_star = static_cast<unsigned>(std::floor(std::numbers::pi / 2.0 * root));
  for (unsigned a = 1; a < net.n_star; ++a) {
    const double s = std::sin(a / root);
    net.points.push_back(s * s);
  }
  return net;
}

/// Index (0-based, so a - 1) of the net point chosen for count k: the largest
/// point <= k/N, or the first point when none is.
inline std::size_t sin_estimator_index(const SinNet& net, unsigned k, bool* near_tie = nullptr) {
  if (k > net.N) throw Error(ErrorCode::out_of_range, "count exceeds N");
  const double freq = static_cast<double>(k) / static_cast<double>(net.N);
  std::size_t chosen = 0;
  for (std::size_t a = 0; a < net.points.size(); ++a) {
    if (near_tie && std::abs(net.points[a] - freq) < 1e-13) *near_tie = true;
    if (net.points[a] <= freq) chosen = a;
  }
  return chosen;
}

inline double sin_estimator(const SinNet& net, unsigned k) { return net.points[sin_estimator_index(net, k)]; }
inline double sin_estimator(unsigned N, unsigned k) { return sin_estimator(sin_net(N), k); }

/// Preimages of the estimator; contiguous because the estimator is monotone.
inline CellPartition sin_partition(const SinNet& net) {
  std::vector<std::pair<unsigned, unsigned>> cells;
  bool tie = false;
  std::size_t prev = 0;
  for (unsigned k = 0; k <= net.N; ++k) {
    const std::size_t a = sin_estimator_index(net, k, &tie);
    if (k == 0 || a != prev) {
      cells.emplace_back(k, k);
    } else {
      cells.back().second = k;
    }
    prev = a;
  }
  auto p = CellPartition::from_cells(net.N, std::move(cells));
  p.near_tie = tie;
  return p;
}

inline CellPartition sin_partition(unsigned N) { return sin_partition(sin_net(N)); }

template <class T>
StatModel<T> sin_model(unsigned N) {
  return StatModel<T>::partition_uniform(sin_partition(N));
}

/// Membership in the e-class of the uniform-on-cell model: every cell average <= 1.
template <class T>
Verdict is_sin_e(const ScoreFn<T>& h) {
  const unsigned N = count_length(h.space());
  return is_e_function(h, sin_model<T>(N), T(1));
}

}  // namespace evidence_kit
