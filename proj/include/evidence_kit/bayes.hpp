#pragma once

// Bayesian and para-Bayesian models: joint measures T_pi(w, t) = P_t(w) Q_pi(t),
// marginals, the factorization of joint e-functions into a conditional
// e-function times an e-function on the parameter, and inf/sup projections.

#include "evidence_kit/core.hpp"
#include "evidence_kit/testing.hpp"

#include <string>
#include <vector>

namespace evidence_kit {

template <class T>
struct BayesModel {
  std::vector<Measure<T>> kernel;  // P_theta, indexed like prior.space()
  Measure<T> prior;
};

/// Kernel theta -> P_theta on Omega plus a finite family of priors on Theta.
template <class T>
class ParaBayesModel {
 public:
  ParaBayesModel(FiniteSpace omega, FiniteSpace theta, std::vector<Measure<T>> kernel, FiniteSpace pis,
                 std::vector<Measure<T>> priors)
      : omega_(std::move(omega)),
        theta_(std::move(theta)),
        pis_(std::move(pis)),
        kernel_(std::move(kernel)),
        priors_(std::move(priors)) {
    if (kernel_.size() != theta_.size()) throw Error(ErrorCode::space_mismatch, "one kernel row per parameter");
    for (const auto& row : kernel_) require_same_space(row.space(), omega_, "kernel rows must live on Omega");
    if (priors_.empty() || priors_.size() != pis_.size())
      throw Error(ErrorCode::invalid_input, "one prior per prior label is required");
    for (const auto& q : priors_) require_same_space(q.space(), theta_, "priors must live on Theta");
  }

  /// A Bayesian model is the para-Bayesian model with a single prior.
  static ParaBayesModel from_bayes(const BayesModel<T>& m) {
    if (m.kernel.empty()) throw Error(ErrorCode::invalid_input, "empty kernel");
    return ParaBayesModel(m.kernel.front().space(), m.prior.space(), m.kernel, FiniteSpace({"Q"}), {m.prior});
  }

  const FiniteSpace& omega() const { return omega_; }
  const FiniteSpace& theta() const { return theta_; }
  const FiniteSpace& prior_labels() const { return pis_; }
  const std::vector<Measure<T>>& kernel() const { return kernel_; }
  const std::vector<Measure<T>>& priors() const { return priors_; }

  StatModel<T> kernel_model() const { return StatModel<T>::finite_family(theta_, kernel_); }
  StatModel<T> prior_model() const { return StatModel<T>::finite_family(pis_, priors_); }
  FiniteSpace product_space() const { return FiniteSpace::product(omega_, theta_); }

 private:
  FiniteSpace omega_;
  FiniteSpace theta_;
  FiniteSpace pis_;
  std::vector<Measure<T>> kernel_;
  std::vector<Measure<T>> priors_;
};

template <class T>
Measure<T> joint_measure(const ParaBayesModel<T>& model, std::size_t pi) {
  const auto space = model.product_space();
  const auto& q = model.priors().at(pi);
  std::vector<T> w(space.size());
  for (std::size_t i = 0; i < model.omega().size(); ++i)
    for (std::size_t j = 0; j < model.theta().size(); ++j) w[space.pair_index(i, j)] = model.kernel()[j][i] * q[j];
  return Measure<T>(space, std::move(w));
}

/// One joint measure per prior, all on Omega x Theta (pairs ordered
/// lexicographically, Omega major).
template <class T>
std::vector<Measure<T>> joint(const ParaBayesModel<T>& model) {
  std::vector<Measure<T>> out;
  out.reserve(model.priors().size());
  for (std::size_t p = 0; p < model.priors().size(); ++p) out.push_back(joint_measure(model, p));
  return out;
}

template <class T>
Measure<T> joint(const BayesModel<T>& model) {
  return joint_measure(ParaBayesModel<T>::from_bayes(model), 0);
}

template <class T>
StatModel<T> joint_model(const ParaBayesModel<T>& model) {
  return StatModel<T>::finite_family(model.prior_labels(), joint(model));
}

/// Marginal on Omega: pushforward under the first projection.
template <class T>
Measure<T> marginal(const Measure<T>& t) {
  const auto& space = t.space();
  if (!space.is_product()) throw Error(ErrorCode::not_a_product_space, "marginal needs a measure on a product space");
  const std::size_t nt = space.theta_factor().size();
  return pushforward<T>(t, space.omega_factor(), std::function<std::size_t(std::size_t)>([nt](std::size_t i) {
                          return i / nt;
                        }));
}

// ---------------------------------------------------------------------------
// Factorization

template <class T>
struct Decomposition {
  ConditionalScoreFn<T> g;  // g(w; t) = f(w, t) / h(t)
  ScoreFn<T> h;             // h(t) = int f(., t) dP_t
  Verdict g_verdict;        // g in the conditional e-class of the kernel
  Verdict h_verdict;        // h in the e-class of the priors
  /// Pairs (omega, theta) outside the support of every T_pi; g there is set by
  /// the division conventions and carries no meaning.
  std::vector<std::pair<std::size_t, std::size_t>> off_support;
};

namespace detail {

template <class T>
std::vector<bool> joint_support(const ParaBayesModel<T>& model) {
  const std::size_t no = model.omega().size();
  const std::size_t nt = model.theta().size();
  std::vector<bool> on(no * nt, false);
  for (const auto& q : model.priors())
    for (std::size_t j = 0; j < nt; ++j) {
      if (q[j] == 0) continue;
      for (std::size_t i = 0; i < no; ++i)
        if (model.kernel()[j][i] != 0) on[i * nt + j] = true;
    }
  return on;
}

}  // namespace detail

/// h(t) := int f(w, t) P_t(dw), g := f / h with 0/0 := 0 and x/0 := inf.
/// Verdicts certify h against the priors and g against the kernel.
template <class T>
Decomposition<T> decompose_e(const ScoreFn<T>& f, const ParaBayesModel<T>& model) {
  const auto space = model.product_space();
  require_same_space(f.space(), space, "decompose_e: function must live on Omega x Theta");
  const std::size_t no = model.omega().size();
  const std::size_t nt = model.theta().size();

  std::vector<Extended<T>> h(nt, Extended<T>(T(0)));
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t i = 0; i < no; ++i) h[j] += f[space.pair_index(i, j)] * Extended<T>(model.kernel()[j][i]);

  std::vector<Extended<T>> g(no * nt);
  for (std::size_t i = 0; i < no; ++i)
    for (std::size_t j = 0; j < nt; ++j) g[i * nt + j] = divide(f[space.pair_index(i, j)], h[j]);

  Decomposition<T> d{ConditionalScoreFn<T>(model.omega(), model.theta(), std::move(g)),
                     ScoreFn<T>(model.theta(), std::move(h)),
                     {},
                     {},
                     {}};
  d.g_verdict = is_conditional_e(d.g, model.kernel_model());
  d.h_verdict = is_e_function(d.h, model.prior_model(), T(1));
  const auto on = detail::joint_support(model);
  for (std::size_t i = 0; i < no; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      if (!on[i * nt + j]) d.off_support.emplace_back(i, j);
  return d;
}

/// True when g(w;t) h(t) == f(w,t) wherever some T_pi puts positive mass.
template <class T>
bool product_identity_holds(const ConditionalScoreFn<T>& g, const ScoreFn<T>& h, const ScoreFn<T>& f,
                            const ParaBayesModel<T>& model) {
  const auto on = detail::joint_support(model);
  const std::size_t nt = model.theta().size();
  for (std::size_t i = 0; i < model.omega().size(); ++i)
    for (std::size_t j = 0; j < nt; ++j)
      if (on[i * nt + j] && !(g(i, j) * h[j] == f[i * nt + j])) return false;
  return true;
}

template <class T>
struct ProductResult {
  ScoreFn<T> f;
  Verdict verdict;  // int f dT_pi <= 1 for every pi, checked directly
};

/// f(w, t) = g(w; t) h(t), verified against every joint measure.
template <class T>
ProductResult<T> product_e(const ConditionalScoreFn<T>& g, const ScoreFn<T>& h, const ParaBayesModel<T>& model) {
  require_same_space(g.omega(), model.omega(), "product_e: g disagrees with the model on Omega");
  require_same_space(g.theta(), model.theta(), "product_e: g disagrees with the model on Theta");
  require_same_space(h.space(), model.theta(), "product_e: h must live on Theta");
  const auto space = model.product_space();
  std::vector<Extended<T>> v(space.size());
  for (std::size_t i = 0; i < model.omega().size(); ++i)
    for (std::size_t j = 0; j < model.theta().size(); ++j) v[space.pair_index(i, j)] = g(i, j) * h[j];
  ScoreFn<T> f(space, std::move(v));
  auto verdict = is_e_function(f, joint_model(model), T(1));
  return {std::move(f), std::move(verdict)};
}

namespace detail {

template <class T, class Pick>
ScoreFn<T> project(const ScoreFn<T>& f, Pick pick) {
  const auto& space = f.space();
  if (!space.is_product()) throw Error(ErrorCode::not_a_product_space, "projection needs a function on a product space");
  const auto& omega = space.omega_factor();
  const std::size_t nt = space.theta_factor().size();
  std::vector<Extended<T>> out(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    Extended<T> best = f[i * nt];
    for (std::size_t j = 1; j < nt; ++j) best = pick(best, f[i * nt + j]);
    out[i] = best;
  }
  return ScoreFn<T>(omega, std::move(out));
}

}  // namespace detail

/// w -> min_t f(w, t).
template <class T>
ScoreFn<T> inf_project(const ScoreFn<T>& f) {
  return detail::project(f, [](const Extended<T>& a, const Extended<T>& b) { return b < a ? b : a; });
}

/// w -> max_t f(w, t).
template <class T>
ScoreFn<T> sup_project(const ScoreFn<T>& f) {
  return detail::project(f, [](const Extended<T>& a, const Extended<T>& b) { return a < b ? b : a; });
}

/// The function on Omega x Theta that ignores theta.
template <class T>
ScoreFn<T> lift(const ScoreFn<T>& g, const FiniteSpace& theta) {
  const auto space = FiniteSpace::product(g.space(), theta);
  std::vector<Extended<T>> v(space.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < theta.size(); ++j) v[space.pair_index(i, j)] = g[i];
  return ScoreFn<T>(space, std::move(v));
}

}  // namespace evidence_kit
