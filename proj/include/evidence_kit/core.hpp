#pragma once

// Finite outcome spaces, probability measures, score functions and the
// verdict records shared by every module.

#include "evidence_kit/errors.hpp"
#include "evidence_kit/extended.hpp"
#include "evidence_kit/rational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace evidence_kit {

// ---------------------------------------------------------------------------
// FiniteSpace

/// Ordered set of distinct outcome labels. Cheap to copy (shared immutable
/// storage). Product spaces remember their two factors; the pair (i, j) sits
/// at position i * |theta| + j.
class FiniteSpace {
 public:
  explicit FiniteSpace(std::vector<std::string> labels);

  static FiniteSpace product(const FiniteSpace& omega, const FiniteSpace& theta);

  std::size_t size() const { return impl_->labels.size(); }
  const std::string& label(std::size_t i) const { return impl_->labels.at(i); }
  std::span<const std::string> labels() const { return impl_->labels; }

  std::optional<std::size_t> find(std::string_view label) const {
    auto it = impl_->index.find(std::string(label));
    if (it == impl_->index.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(std::string_view label) const {
    if (auto i = find(label)) return *i;
    throw Error(ErrorCode::invalid_input, "unknown outcome label '" + std::string(label) + "'");
  }

  bool is_product() const { return impl_->factors != nullptr; }
  const FiniteSpace& omega_factor() const;
  const FiniteSpace& theta_factor() const;
  std::size_t pair_index(std::size_t omega, std::size_t theta) const {
    return omega * theta_factor().size() + theta;
  }

  friend bool operator==(const FiniteSpace& a, const FiniteSpace& b) {
    return a.impl_ == b.impl_ || a.impl_->labels == b.impl_->labels;
  }

 private:
  struct Factors;
  struct Impl {
    std::vector<std::string> labels;
    std::unordered_map<std::string, std::size_t> index;
    std::shared_ptr<const Factors> factors;
  };
  std::shared_ptr<const Impl> impl_;
};

struct FiniteSpace::Factors {
  FiniteSpace omega;
  FiniteSpace theta;
};

inline FiniteSpace::FiniteSpace(std::vector<std::string> labels) {
  if (labels.empty()) throw Error(ErrorCode::invalid_input, "a finite space needs at least one outcome");
  auto impl = std::make_shared<Impl>();
  impl->index.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!impl->index.emplace(labels[i], i).second)
      throw Error(ErrorCode::invalid_input, "duplicate outcome label '" + labels[i] + "'");
  }
  impl->labels = std::move(labels);
  impl_ = std::move(impl);
}

inline FiniteSpace FiniteSpace::product(const FiniteSpace& omega, const FiniteSpace& theta) {
  std::vector<std::string> labels;
  labels.reserve(omega.size() * theta.size());
  for (const auto& w : omega.labels())
    for (const auto& t : theta.labels()) labels.push_back("(" + w + "," + t + ")");
  FiniteSpace space(std::move(labels));
  auto impl = std::make_shared<Impl>(*space.impl_);
  impl->factors = std::make_shared<const Factors>(Factors{omega, theta});
  space.impl_ = std::move(impl);
  return space;
}

inline const FiniteSpace& FiniteSpace::omega_factor() const {
  if (!impl_->factors) throw Error(ErrorCode::not_a_product_space, "space is not a product");
  return impl_->factors->omega;
}
inline const FiniteSpace& FiniteSpace::theta_factor() const {
  if (!impl_->factors) throw Error(ErrorCode::not_a_product_space, "space is not a product");
  return impl_->factors->theta;
}

inline void require_same_space(const FiniteSpace& a, const FiniteSpace& b, std::string_view what) {
  if (!(a == b)) throw Error(ErrorCode::space_mismatch, std::string(what));
}

// ---------------------------------------------------------------------------
// Numerics policy

struct NumericsPolicy {
  NumericsMode mode = NumericsMode::binary64;
  double tolerance = 1e-9;

  /// Exact mode cannot represent irrational model parameters such as the
  /// sin^2 net points.
  void require_representable(bool irrational, std::string_view what) const {
    if (tolerance < 0) throw Error(ErrorCode::invalid_parameter, "negative tolerance");
    if (irrational && mode == NumericsMode::exact_rational)
      throw Error(ErrorCode::invalid_parameter,
                  std::string(what) + " is irrational and cannot be used in exact-rational mode");
  }
};

/// Weights of a float-mode measure must sum to 1 within this.
inline constexpr double measure_sum_tolerance = 1e-12;

// ---------------------------------------------------------------------------
// Measure

template <class T>
class Measure {
 public:
  /// Validating constructor; weights are indexed by space position.
  Measure(FiniteSpace space, std::vector<T> weights) : space_(std::move(space)), weights_(std::move(weights)) {
    if (weights_.size() != space_.size())
      throw Error(ErrorCode::space_mismatch, "weight vector size differs from the space size");
    T total(0);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] < 0)
        throw Error(ErrorCode::negative_weight, "weight of '" + space_.label(i) + "' is negative");
      if constexpr (!is_exact_v<T>) {
        if (!std::isfinite(weights_[i])) throw Error(ErrorCode::invalid_input, "non-finite weight");
      }
      total += weights_[i];
    }
    if constexpr (is_exact_v<T>) {
      if (total != 1) throw Error(ErrorCode::weights_do_not_sum_to_one, "total mass " + to_text(total));
    } else {
      if (std::abs(total - 1.0) > measure_sum_tolerance)
        throw Error(ErrorCode::weights_do_not_sum_to_one, "total mass " + to_text(total));
    }
  }

  static Measure point_mass(const FiniteSpace& space, std::size_t at) {
    std::vector<T> w(space.size(), T(0));
    w.at(at) = T(1);
    return Measure(space, std::move(w));
  }
  static Measure uniform(const FiniteSpace& space) {
    std::vector<T> w(space.size(), T(1) / T(static_cast<long>(space.size())));
    return Measure(space, std::move(w));
  }

  const FiniteSpace& space() const { return space_; }
  std::size_t size() const { return weights_.size(); }
  const T& operator[](std::size_t i) const { return weights_[i]; }
  const T& at(std::string_view label) const { return weights_[space_.index_of(label)]; }
  std::span<const T> weights() const { return weights_; }

  friend bool operator==(const Measure& a, const Measure& b) {
    return a.space_ == b.space_ && a.weights_ == b.weights_;
  }

 private:
  FiniteSpace space_;
  std::vector<T> weights_;
};

/// Builds a measure from a label-keyed map that must cover exactly the
/// space's labels.
template <class T>
Measure<T> make_measure(const FiniteSpace& space, const std::map<std::string, T>& weights) {
  if (weights.size() != space.size())
    throw Error(ErrorCode::space_mismatch, "weights must be keyed exactly by the space labels");
  std::vector<T> w(space.size());
  for (const auto& [label, value] : weights) {
    auto i = space.find(label);
    if (!i) throw Error(ErrorCode::space_mismatch, "weight for unknown label '" + label + "'");
    w[*i] = value;
  }
  return Measure<T>(space, std::move(w));
}

// ---------------------------------------------------------------------------
// ScoreFn

template <class T>
class ScoreFn {
 public:
  using value_type = Extended<T>;

  ScoreFn(FiniteSpace space, std::vector<Extended<T>> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (values_.size() != space_.size())
      throw Error(ErrorCode::space_mismatch, "value vector size differs from the space size");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i].is_finite() && values_[i].value() < 0)
        throw Error(ErrorCode::value_out_of_range, "score of '" + space_.label(i) + "' is negative");
      if constexpr (!is_exact_v<T>) {
        if (values_[i].is_finite() && std::isnan(values_[i].value()))
          throw Error(ErrorCode::value_out_of_range, "score of '" + space_.label(i) + "' is NaN");
      }
    }
  }

  static ScoreFn constant(const FiniteSpace& space, Extended<T> value) {
    return ScoreFn(space, std::vector<Extended<T>>(space.size(), value));
  }

  template <class Fn>
  static ScoreFn from(const FiniteSpace& space, Fn&& fn) {
    std::vector<Extended<T>> v;
    v.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) v.push_back(Extended<T>(fn(i)));
    return ScoreFn(space, std::move(v));
  }

  const FiniteSpace& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  const Extended<T>& operator[](std::size_t i) const { return values_[i]; }
  const Extended<T>& at(std::string_view label) const { return values_[space_.index_of(label)]; }
  std::span<const Extended<T>> values() const { return values_; }

  bool is_p_candidate() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](const Extended<T>& v) { return v.is_finite() && v.value() <= 1; });
  }

  template <class Fn>
  ScoreFn map(Fn&& fn) const {
    std::vector<Extended<T>> v;
    v.reserve(values_.size());
    for (const auto& x : values_) v.push_back(fn(x));
    return ScoreFn(space_, std::move(v));
  }

  friend bool operator==(const ScoreFn& a, const ScoreFn& b) {
    return a.space_ == b.space_ && a.values_ == b.values_;
  }

 private:
  FiniteSpace space_;
  std::vector<Extended<T>> values_;
};

template <class T>
ScoreFn<T> make_score_fn(const FiniteSpace& space, const std::map<std::string, Extended<T>>& values) {
  if (values.size() != space.size())
    throw Error(ErrorCode::space_mismatch, "values must be keyed exactly by the space labels");
  std::vector<Extended<T>> v(space.size());
  for (const auto& [label, value] : values) {
    auto i = space.find(label);
    if (!i) throw Error(ErrorCode::space_mismatch, "value for unknown label '" + label + "'");
    v[*i] = value;
  }
  return ScoreFn<T>(space, std::move(v));
}

/// Sum of f(w) mu(w) with inf * 0 = 0.
template <class T>
Extended<T> integrate(const ScoreFn<T>& f, const Measure<T>& mu) {
  require_same_space(f.space(), mu.space(), "integrate: function and measure live on different spaces");
  Extended<T> total(T(0));
  for (std::size_t i = 0; i < f.size(); ++i) total += f[i] * Extended<T>(mu[i]);
  return total;
}

/// Image measure under an index map into `target`.
template <class T>
Measure<T> pushforward(const Measure<T>& mu, const FiniteSpace& target,
                       const std::function<std::size_t(std::size_t)>& map) {
  std::vector<T> w(target.size(), T(0));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const std::size_t j = map(i);
    if (j >= target.size()) throw Error(ErrorCode::invalid_input, "pushforward map leaves the target space");
    w[j] += mu[i];
  }
  return Measure<T>(target, std::move(w));
}

/// Image measure under a label map.
template <class T>
Measure<T> pushforward(const Measure<T>& mu, const FiniteSpace& target,
                       const std::function<std::string(const std::string&)>& map) {
  return pushforward<T>(mu, target, std::function<std::size_t(std::size_t)>([&](std::size_t i) {
                          return target.index_of(map(mu.space().label(i)));
                        }));
}

// ---------------------------------------------------------------------------
// Verdicts

enum class Status { accepted, rejected, inconclusive };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::accepted: return "accepted";
    case Status::rejected: return "rejected";
    case Status::inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// Where a membership constraint failed and by how much.
struct Witness {
  std::string parameter;                  // violating member label, cell, or "p=..."
  std::optional<double> parameter_value;  // numeric parameter (Bernoulli p) when there is one
  std::optional<std::string> outcome;
  std::optional<std::string> epsilon;     // exact text of the p-function threshold
  std::string attained;                   // exact text of the offending integral/probability
  std::string bound;                      // the constraint's right-hand side
};

struct Verdict {
  Status status = Status::accepted;
  std::optional<Witness> witness;
  double margin = 0.0;  // slack of the binding constraint; negative when violated
  NumericsMode mode = NumericsMode::exact_rational;
  std::map<std::string, double> stats;

  bool accepted() const { return status == Status::accepted; }
  bool rejected() const { return status == Status::rejected; }
};

}  // namespace evidence_kit
