#pragma once

// JSON documents for measures, score functions, models and results.
// Numbers are either strings ("3", "-1/4", "0.125", "inf") read exactly, or
// JSON numbers read as binary64. A document is handled in exact mode when it
// contains no JSON floating-point numbers.

#include "evidence_kit/bayes.hpp"
#include "evidence_kit/bernoulli.hpp"
#include "evidence_kit/constant_search.hpp"
#include "evidence_kit/core.hpp"
#include "evidence_kit/testing.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace evidence_kit {

using Json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "evidence-kit/1";

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_input, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::invalid_input, "'" + path + "' is not valid JSON: " + e.what());
  }
}

/// True when no numeric leaf is a JSON float.
inline bool is_exact_document(const Json& j) {
  if (j.is_number_float()) return false;
  if (j.is_structured())
    for (const auto& v : j) {
      if (!is_exact_document(v)) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Scalars

namespace detail {

inline bool is_infinity_text(const std::string& s) {
  return s == "inf" || s == "+inf" || s == "infinity" || s == "Infinity" || s == "∞";
}

}  // namespace detail

template <class T>
Extended<T> read_extended(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (detail::is_infinity_text(s)) return Extended<T>::infinity();
    const Rational q = parse_rational(s);
    if constexpr (is_exact_v<T>) {
      return Extended<T>(q);
    } else {
      return Extended<T>(to_double(q));
    }
  }
  if (j.is_number_integer()) return Extended<T>(T(j.get<long long>()));
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isinf(x) && x > 0) return Extended<T>::infinity();
    return Extended<T>(from_double<T>(x));
  }
  throw Error(ErrorCode::invalid_input, "expected a number, got " + j.dump());
}

template <class T>
T read_scalar(const Json& j) {
  auto x = read_extended<T>(j);
  if (x.is_infinite()) throw Error(ErrorCode::invalid_input, "infinite value where a finite number is required");
  return x.value();
}

inline Json write_scalar(const Rational& q) { return q.str(); }
inline Json write_scalar(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

template <class T>
Json write_extended(const Extended<T>& x) {
  if (x.is_infinite()) return "inf";
  return write_scalar(x.value());
}

// ---------------------------------------------------------------------------
// Spaces, measures, functions

inline FiniteSpace read_space(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::invalid_input, "\"space\" must be a nonempty array of labels");
  std::vector<std::string> labels;
  for (const auto& v : j) labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  return FiniteSpace(std::move(labels));
}

inline Json write_space(const FiniteSpace& s) {
  Json a = Json::array();
  for (const auto& l : s.labels()) a.push_back(l);
  return a;
}

namespace detail {

inline const Json& require_field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name))
    throw Error(ErrorCode::invalid_input, std::string("missing field \"") + name + "\"");
  return j.at(name);
}

/// Values either keyed by label or listed in space order.
template <class T>
std::vector<Extended<T>> read_values(const FiniteSpace& space, const Json& j) {
  std::vector<Extended<T>> v(space.size());
  if (j.is_array()) {
    if (j.size() != space.size()) throw Error(ErrorCode::space_mismatch, "value array length differs from the space");
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = read_extended<T>(j[i]);
    return v;
  }
  if (!j.is_object() || j.size() != space.size())
    throw Error(ErrorCode::space_mismatch, "values must be keyed exactly by the space labels");
  for (auto it = j.begin(); it != j.end(); ++it) v[space.index_of(it.key())] = read_extended<T>(it.value());
  return v;
}

}  // namespace detail

template <class T>
Measure<T> read_measure(const Json& j) {
  auto space = read_space(detail::require_field(j, "space"));
  const Json& values = j.contains("values") ? j.at("values") : detail::require_field(j, "weights");
  auto ext = detail::read_values<T>(space, values);
  std::vector<T> w;
  for (const auto& x : ext) {
    if (x.is_infinite()) throw Error(ErrorCode::invalid_input, "measure weights must be finite");
    w.push_back(x.value());
  }
  return Measure<T>(space, std::move(w));
}

template <class T>
Json write_measure(const Measure<T>& m) {
  Json values = Json::object();
  for (std::size_t i = 0; i < m.space().size(); ++i) values[m.space().label(i)] = write_scalar(m[i]);
  return Json{{"space", write_space(m.space())}, {"values", values}};
}

/// Accepted layouts:
///   {"space": [...], "values": {label: v} | [v, ...]}
///   {"omega": [...], "theta": [...], "values": {omega: {theta: v}}}   (product space)
///   {"by_count": [v_0, ..., v_N]}   a function of the number of ones; lives on
///   {0,1}^N when `target` is a binary space and on {0,...,N} otherwise.
template <class T>
ScoreFn<T> read_score_fn(const Json& j, const FiniteSpace* target = nullptr) {
  if (j.is_object() && j.contains("by_count")) {
    const Json& bc = j.at("by_count");
    if (!bc.is_array() || bc.size() < 2) throw Error(ErrorCode::invalid_input, "\"by_count\" needs N+1 >= 2 values");
    const auto N = static_cast<unsigned>(bc.size() - 1);
    std::vector<Extended<T>> by(bc.size());
    for (std::size_t k = 0; k < bc.size(); ++k) by[k] = read_extended<T>(bc[k]);
    bool binary = !target;
    if (target) {
      try {
        binary = binary_length(*target) == N;
      } catch (const Error&) {
        binary = false;
      }
    }
    if (!binary) return ScoreFn<T>(count_space(N), std::move(by));
    const auto ones = ones_by_position(N);
    return ScoreFn<T>::from(binary_space(N), [&](std::size_t i) { return by[ones[i]]; });
  }
  if (j.is_object() && j.contains("omega") && j.contains("theta")) {
    auto omega = read_space(j.at("omega"));
    auto theta = read_space(j.at("theta"));
    auto space = FiniteSpace::product(omega, theta);
    const Json& values = detail::require_field(j, "values");
    std::vector<Extended<T>> v(space.size());
    std::vector<bool> seen(space.size(), false);
    for (auto it = values.begin(); it != values.end(); ++it) {
      const auto i = omega.index_of(it.key());
      for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
        const auto k = space.pair_index(i, theta.index_of(jt.key()));
        v[k] = read_extended<T>(jt.value());
        seen[k] = true;
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw Error(ErrorCode::space_mismatch, "product-space function must give a value for every (omega, theta)");
    return ScoreFn<T>(space, std::move(v));
  }
  auto space = read_space(detail::require_field(j, "space"));
  return ScoreFn<T>(space, detail::read_values<T>(space, detail::require_field(j, "values")));
}

template <class T>
Json write_score_fn(const ScoreFn<T>& f) {
  const auto& s = f.space();
  if (s.is_product()) {
    const auto& omega = s.omega_factor();
    const auto& theta = s.theta_factor();
    Json values = Json::object();
    for (std::size_t i = 0; i < omega.size(); ++i) {
      Json row = Json::object();
      for (std::size_t t = 0; t < theta.size(); ++t) row[theta.label(t)] = write_extended(f[s.pair_index(i, t)]);
      values[omega.label(i)] = row;
    }
    return Json{{"omega", write_space(omega)}, {"theta", write_space(theta)}, {"values", values}};
  }
  Json values = Json::object();
  for (std::size_t i = 0; i < s.size(); ++i) values[s.label(i)] = write_extended(f[i]);
  return Json{{"space", write_space(s)}, {"values", values}};
}

template <class T>
Json write_conditional(const ConditionalScoreFn<T>& g) {
  return write_score_fn(g.on_product());
}

// ---------------------------------------------------------------------------
// Models

namespace detail {

template <class T>
std::pair<FiniteSpace, std::vector<Measure<T>>> read_rows(const FiniteSpace& space, const Json& rows) {
  if (!rows.is_object() || rows.empty()) throw Error(ErrorCode::invalid_input, "expected an object of measures");
  std::vector<std::string> labels;
  std::vector<Measure<T>> members;
  for (auto it = rows.begin(); it != rows.end(); ++it) {
    labels.push_back(it.key());
    auto ext = read_values<T>(space, it.value());
    std::vector<T> w;
    for (const auto& x : ext) {
      if (x.is_infinite()) throw Error(ErrorCode::invalid_input, "measure weights must be finite");
      w.push_back(x.value());
    }
    members.emplace_back(space, std::move(w));
  }
  return {FiniteSpace(std::move(labels)), std::move(members)};
}

}  // namespace detail

/// {"space": [...], "members": {theta: {omega: w}}}
template <class T>
StatModel<T> read_family(const Json& j) {
  auto space = read_space(detail::require_field(j, "space"));
  auto [params, members] = detail::read_rows<T>(space, detail::require_field(j, "members"));
  return StatModel<T>::finite_family(std::move(params), std::move(members));
}

template <class T>
Json write_family(const FiniteFamily<T>& fam) {
  Json members = Json::object();
  for (std::size_t j = 0; j < fam.members.size(); ++j) members[fam.parameters.label(j)] = write_measure(fam.members[j])["values"];
  return Json{{"space", write_space(fam.space)}, {"members", members}};
}

/// {"omega": [...], "theta": [...], "kernel": {theta: {omega: w}},
///  "priors": {pi: {theta: w}}}  ("prior": {theta: w} for a Bayesian model)
template <class T>
ParaBayesModel<T> read_para_bayes(const Json& j) {
  auto omega = read_space(detail::require_field(j, "omega"));
  auto theta = read_space(detail::require_field(j, "theta"));
  auto [kernel_labels, kernel_rows] = detail::read_rows<T>(omega, detail::require_field(j, "kernel"));
  std::vector<Measure<T>> kernel;
  for (std::size_t t = 0; t < theta.size(); ++t) {
    auto idx = kernel_labels.find(theta.label(t));
    if (!idx) throw Error(ErrorCode::space_mismatch, "kernel has no row for parameter '" + theta.label(t) + "'");
    kernel.push_back(kernel_rows[*idx]);
  }
  if (kernel_labels.size() != theta.size()) throw Error(ErrorCode::space_mismatch, "kernel rows must match theta");
  if (j.contains("priors")) {
    auto [pis, priors] = detail::read_rows<T>(theta, j.at("priors"));
    return ParaBayesModel<T>(omega, theta, std::move(kernel), std::move(pis), std::move(priors));
  }
  auto ext = detail::read_values<T>(theta, detail::require_field(j, "prior"));
  std::vector<T> w;
  for (const auto& x : ext) w.push_back(x.value());
  return ParaBayesModel<T>::from_bayes(BayesModel<T>{std::move(kernel), Measure<T>(theta, std::move(w))});
}

template <class T>
Json write_para_bayes(const ParaBayesModel<T>& m) {
  Json kernel = Json::object();
  for (std::size_t t = 0; t < m.theta().size(); ++t) kernel[m.theta().label(t)] = write_measure(m.kernel()[t])["values"];
  Json priors = Json::object();
  for (std::size_t p = 0; p < m.priors().size(); ++p)
    priors[m.prior_labels().label(p)] = write_measure(m.priors()[p])["values"];
  return Json{{"omega", write_space(m.omega())}, {"theta", write_space(m.theta())}, {"kernel", kernel}, {"priors", priors}};
}

// ---------------------------------------------------------------------------
// Results

inline Json write_witness(const Witness& w) {
  Json j = Json::object();
  j["parameter"] = w.parameter;
  if (w.parameter_value) j["parameter_value"] = *w.parameter_value;
  if (w.outcome) j["outcome"] = *w.outcome;
  if (w.epsilon) j["epsilon"] = *w.epsilon;
  j["attained"] = w.attained;
  j["bound"] = w.bound;
  return j;
}

inline Witness read_witness(const Json& j) {
  Witness w;
  w.parameter = detail::require_field(j, "parameter").get<std::string>();
  if (j.contains("parameter_value")) w.parameter_value = j.at("parameter_value").get<double>();
  if (j.contains("outcome")) w.outcome = j.at("outcome").get<std::string>();
  if (j.contains("epsilon")) w.epsilon = j.at("epsilon").get<std::string>();
  w.attained = detail::require_field(j, "attained").get<std::string>();
  w.bound = detail::require_field(j, "bound").get<std::string>();
  return w;
}

inline Json write_verdict(const Verdict& v) {
  Json j = Json::object();
  j["status"] = std::string(to_string(v.status));
  j["accepted"] = v.accepted();
  j["margin"] = write_scalar(v.margin);
  j["mode"] = std::string(to_string(v.mode));
  if (v.witness) j["witness"] = write_witness(*v.witness);
  if (!v.stats.empty()) {
    Json stats = Json::object();
    for (const auto& [k, x] : v.stats) stats[k] = write_scalar(x);
    j["stats"] = stats;
  }
  return j;
}

inline Status parse_status(const std::string& s) {
  if (s == "accepted") return Status::accepted;
  if (s == "rejected") return Status::rejected;
  if (s == "inconclusive") return Status::inconclusive;
  throw Error(ErrorCode::invalid_input, "unknown verdict status '" + s + "'");
}

inline NumericsMode parse_mode(const std::string& s) {
  if (s == to_string(NumericsMode::exact_rational)) return NumericsMode::exact_rational;
  if (s == to_string(NumericsMode::binary64)) return NumericsMode::binary64;
  throw Error(ErrorCode::invalid_input, "unknown numerics mode '" + s + "'");
}

inline Verdict read_verdict(const Json& j) {
  Verdict v;
  v.status = parse_status(detail::require_field(j, "status").get<std::string>());
  v.margin = read_scalar<double>(detail::require_field(j, "margin"));
  v.mode = parse_mode(detail::require_field(j, "mode").get<std::string>());
  if (j.contains("witness")) v.witness = read_witness(j.at("witness"));
  if (j.contains("stats"))
    for (auto it = j.at("stats").begin(); it != j.at("stats").end(); ++it) v.stats[it.key()] = read_scalar<double>(it.value());
  if (v.rejected() && !v.witness) throw Error(ErrorCode::invalid_input, "rejected verdict without witness");
  return v;
}

template <class T>
Json write_envelope(const EnvelopeResult<T>& e) {
  Json j = Json::object();
  j["lower"] = write_extended(e.lower);
  j["upper"] = write_extended(e.upper);
  j["argmax_hint"] = e.argmax_hint;
  if (e.argmax_parameter) j["argmax_parameter"] = write_scalar(*e.argmax_parameter);
  j["certified"] = e.certified;
  j["infinite"] = e.infinite;
  j["mode"] = std::string(to_string(e.mode));
  j["subdivisions"] = e.subdivisions;
  return j;
}

template <class T>
Json write_decomposition(const Decomposition<T>& d, bool identity) {
  Json off = Json::array();
  for (auto [i, t] : d.off_support) off.push_back(Json::array({d.g.omega().label(i), d.g.theta().label(t)}));
  return Json{{"g", write_conditional(d.g)},       {"h", write_score_fn(d.h)},
              {"g_verdict", write_verdict(d.g_verdict)}, {"h_verdict", write_verdict(d.h_verdict)},
              {"product_identity", identity},        {"off_support", off}};
}

template <class T>
Json write_iid_decomposition(const IidDecomposition<T>& d) {
  Json off = Json::array();
  for (auto i : d.off_support) off.push_back(d.g.space().label(i));
  return Json{{"g", write_score_fn(d.g)},
              {"h", write_score_fn(d.h)},
              {"g_verdict", write_verdict(d.g_verdict)},
              {"h_verdict", write_verdict(d.h_verdict)},
              {"product_identity", d.product_identity},
              {"off_support", off}};
}

inline Json write_cells(const CellPartition& p) {
  Json cells = Json::array();
  for (auto [a, b] : p.cells) cells.push_back(Json::array({a, b}));
  return cells;
}

inline Json write_sin_net(const SinNet& net, const CellPartition& part) {
  Json points = Json::array();
  for (double x : net.points) points.push_back(x);
  return Json{{"N", net.N}, {"n_star", net.n_star}, {"points", points}, {"cells", write_cells(part)},
              {"near_tie", part.near_tie}};
}

inline Json write_bracket(const ConstantBracket& b) {
  Json j = Json::object();
  j["N"] = b.N;
  j["direction"] = to_string(b.direction);
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  if (b.p) j["p"] = *b.p;
  j["rounds"] = b.rounds;
  j["mode"] = std::string(to_string(b.mode));
  j["witness"] = write_score_fn(b.witness);
  return j;
}

inline ConstantBracket read_bracket(const Json& j) {
  ConstantBracket b;
  b.N = detail::require_field(j, "N").get<unsigned>();
  b.direction = parse_direction(detail::require_field(j, "direction").get<std::string>());
  b.lower = detail::require_field(j, "lower").get<double>();
  b.upper = detail::require_field(j, "upper").get<double>();
  if (j.contains("p")) b.p = j.at("p").get<double>();
  b.rounds = detail::require_field(j, "rounds").get<std::size_t>();
  b.mode = parse_mode(detail::require_field(j, "mode").get<std::string>());
  b.witness = read_score_fn<double>(detail::require_field(j, "witness"));
  if (!(1.0 <= b.lower && b.lower <= b.upper)) throw Error(ErrorCode::invalid_input, "bracket violates 1 <= lower <= upper");
  return b;
}

/// Wraps a payload into a versioned document.
inline Json document(Json payload) {
  Json doc = Json::object();
  doc["schema"] = schema_version;
  for (auto it = payload.begin(); it != payload.end(); ++it) doc[it.key()] = it.value();
  return doc;
}

/// Parses a document and checks its schema version.
inline Json parse_document(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::invalid_input, std::string("not a JSON document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema") || doc.at("schema") != schema_version)
    throw Error(ErrorCode::invalid_input, "document lacks schema \"" + std::string(schema_version) + "\"");
  return doc;
}

}  // namespace evidence_kit
