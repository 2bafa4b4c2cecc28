#pragma once

// Command-line front end. run() parses argv, dispatches, and writes one JSON
// document (or a TSV table) to `out`. Exit status: 0 accepted / done,
// 1 rejected, 2 usage or input error, 3 inconclusive.

#include "evidence_kit/bayes.hpp"
#include "evidence_kit/bernoulli.hpp"
#include "evidence_kit/calibration.hpp"
#include "evidence_kit/constant_search.hpp"
#include "evidence_kit/json_io.hpp"
#include "evidence_kit/testing.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

namespace evidence_kit::cli {

enum ExitCode : int { ok = 0, rejected = 1, usage_error = 2, inconclusive = 3 };

inline int exit_code(Status s) {
  switch (s) {
    case Status::accepted: return ok;
    case Status::rejected: return rejected;
    case Status::inconclusive: return inconclusive;
  }
  return usage_error;
}

/// Worst of two statuses: rejected > inconclusive > accepted.
inline Status combine(Status a, Status b) {
  auto rank = [](Status s) { return s == Status::rejected ? 2 : (s == Status::inconclusive ? 1 : 0); };
  return rank(a) >= rank(b) ? a : b;
}

struct ModelSpec {
  enum Kind { bernoulli, binomial, sin, family } kind = family;
  unsigned N = 0;
  Json doc;
};

inline ModelSpec parse_model(const std::string& text) {
  ModelSpec m;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto head = text.substr(0, colon);
    const auto tail = text.substr(colon + 1);
    if (head == "bernoulli" || head == "binomial" || head == "sin") {
      std::size_t used = 0;
      unsigned long n = 0;
      try {
        n = std::stoul(tail, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tail.size() || tail.empty())
        throw Error(ErrorCode::invalid_input, "model descriptor '" + text + "' needs an integer N");
      m.N = static_cast<unsigned>(n);
      m.kind = head == "bernoulli" ? ModelSpec::bernoulli : (head == "binomial" ? ModelSpec::binomial : ModelSpec::sin);
      return m;
    }
  }
  m.kind = ModelSpec::family;
  m.doc = load_json_file(text);
  return m;
}

template <class T>
StatModel<T> build_model(const ModelSpec& m) {
  switch (m.kind) {
    case ModelSpec::bernoulli:
      if (m.N < 1) throw Error(ErrorCode::invalid_parameter, "bernoulli:N needs N >= 1");
      return StatModel<T>::bernoulli(m.N);
    case ModelSpec::binomial:
      if (m.N < 1) throw Error(ErrorCode::invalid_parameter, "binomial:N needs N >= 1");
      return StatModel<T>::binomial(m.N);
    case ModelSpec::sin: return sin_model<T>(m.N);
    case ModelSpec::family: return read_family<T>(m.doc);
  }
  throw Error(ErrorCode::invalid_input, "unknown model");
}

enum class ModeFlag { automatic, exact, binary64 };

inline bool use_exact(ModeFlag flag, std::initializer_list<const Json*> docs) {
  if (flag != ModeFlag::automatic) return flag == ModeFlag::exact;
  for (const Json* d : docs)
    if (d && !is_exact_document(*d)) return false;
  return true;
}

namespace detail {

inline void emit(std::ostream& out, const Json& payload) { out << document(payload).dump(2) << '\n'; }

template <class T>
int check(const std::string& command, const Json& fdoc, const ModelSpec& spec, double tol, std::ostream& out) {
  auto model = build_model<T>(spec);
  auto f = read_score_fn<T>(fdoc, &model.space());
  const T t = from_double<T>(tol);
  Json payload{{"command", command}};
  int code = ok;
  if (command == "check-e") {
    auto v = is_e_function(f, model, t);
    payload["verdict"] = write_verdict(v);
    payload["envelope"] = write_envelope(upper_envelope(f, model, t));
    code = exit_code(v.status);
  } else if (command == "check-p") {
    auto v = is_p_function(f, model, t);
    payload["verdict"] = write_verdict(v);
    code = exit_code(v.status);
  } else {
    payload["envelope"] = write_envelope(upper_envelope(f, model, t));
  }
  emit(out, payload);
  return code;
}

template <class T>
int decompose(const Json& fdoc, const Json& mdoc, std::ostream& out) {
  auto model = read_para_bayes<T>(mdoc);
  auto f = read_score_fn<T>(fdoc);
  auto d = decompose_e(f, model);
  const bool identity = product_identity_holds(d.g, d.h, f, model);
  emit(out, Json{{"command", "decompose"}, {"decomposition", write_decomposition(d, identity)}});
  return exit_code(combine(d.g_verdict.status, d.h_verdict.status));
}

template <class T>
int project(const Json& fdoc, const std::string& dir, const Json* mdoc, std::ostream& out) {
  auto f = read_score_fn<T>(fdoc);
  auto g = dir == "inf" ? inf_project(f) : sup_project(f);
  Json payload{{"command", "project"}, {"direction", dir}, {"function", write_score_fn(g)}};
  int code = ok;
  if (mdoc) {
    // membership of the projection in the class of the marginals Y_pi
    auto model = read_para_bayes<T>(*mdoc);
    std::vector<Measure<T>> ys;
    for (const auto& t : joint(model)) ys.push_back(marginal(t));
    auto family = StatModel<T>::finite_family(model.prior_labels(), ys);
    auto v = dir == "inf" ? is_e_function(g, family, T(1)) : is_p_function(g, family, T(1));
    payload["verdict"] = write_verdict(v);
    code = exit_code(v.status);
  }
  emit(out, payload);
  return code;
}

template <class T>
int decompose_bernoulli(const Json& fdoc, unsigned N, double tol, std::ostream& out) {
  auto model = configuration_model<T>(binary_alphabet(), N);
  auto f = read_score_fn<T>(fdoc, &model.omega);
  auto d = decompose_iid_e(f, model, from_double<T>(tol));
  emit(out, Json{{"command", "decompose-bernoulli"}, {"N", N}, {"decomposition", write_iid_decomposition(d)}});
  return exit_code(combine(d.g_verdict.status, d.h_verdict.status));
}

inline std::pair<unsigned, unsigned> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto n = static_cast<unsigned>(std::stoul(text));
      return {n, n};
    }
    return {static_cast<unsigned>(std::stoul(text.substr(0, dots))),
            static_cast<unsigned>(std::stoul(text.substr(dots + 2)))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_input, "--table expects N1..N2, got '" + text + "'");
  }
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-space e-values and p-values: calibration, membership tests, decompositions, "
               "and Bernoulli/exchangeability constants.",
               "evidence-kit"};
  app.require_subcommand(1, 1);

  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads for constant-search")
      ->envname("EVIDENCE_KIT_THREADS")
      ->check(CLI::PositiveNumber);
  ModeFlag mode = ModeFlag::automatic;
  app.add_option("--mode", mode, "numerics: auto (exact when inputs have no floats), exact, float")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, ModeFlag>{{"auto", ModeFlag::automatic}, {"exact", ModeFlag::exact},
                                          {"float", ModeFlag::binary64}},
          CLI::ignore_case));

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "apply a p-to-e (power, log) or e-to-p (inverse) calibrator");
  std::string kind;
  double kappa = 0.0;
  std::string value_text;
  bool certify = false;
  std::size_t subdivisions = 1024;
  double cal_tol = 1e-9;
  cal->add_option("--kind", kind, "power | log | inverse")->required()->check(CLI::IsMember({"power", "log", "inverse"}));
  auto* kappa_opt = cal->add_option("--kappa", kappa, "calibrator parameter");
  cal->add_option("--value", value_text, "p-value (power, log) or e-value (inverse); 'inf' allowed")->required();
  cal->add_flag("--certify", certify, "also certify that the calibrator integrates to at most 1");
  cal->add_option("--subdivisions", subdivisions, "quadrature interval budget (>= 16)");
  cal->add_option("--tolerance", cal_tol, "admissibility tolerance");

  // check-e / check-p / envelope
  std::string function_path;
  std::string model_text;
  double tol = 1e-9;
  std::vector<CLI::App*> checks;
  for (const char* name : {"check-e", "check-p", "envelope"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "check-e"   ? "test e-function membership"
                                         : std::string(name) == "check-p" ? "test p-function membership"
                                                                          : "upper envelope sup_theta int f dP_theta");
    sub->add_option("--function", function_path, "function JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--model", model_text, "bernoulli:N | binomial:N | sin:N | family.json")->required();
    sub->add_option("--tol", tol, "bracket width for continuous families")->check(CLI::PositiveNumber);
    checks.push_back(sub);
  }

  // decompose
  auto* dec = app.add_subcommand("decompose", "factor a joint e-function as g(w;t) h(t)");
  std::string pb_path;
  dec->add_option("--function", function_path, "function on Omega x Theta")->required()->check(CLI::ExistingFile);
  dec->add_option("--model", pb_path, "para-Bayesian model JSON")->required()->check(CLI::ExistingFile);

  // project
  auto* proj = app.add_subcommand("project", "inf- or sup-projection onto Omega");
  std::string dir = "inf";
  proj->add_option("--function", function_path, "function on Omega x Theta")->required()->check(CLI::ExistingFile);
  proj->add_option("--dir", dir, "inf | sup")->check(CLI::IsMember({"inf", "sup"}));
  auto* proj_model = proj->add_option("--model", pb_path, "para-Bayesian model to test the projection against")
                         ->check(CLI::ExistingFile);

  // sin-net
  auto* net = app.add_subcommand("sin-net", "the sin^2 net and its partition of {0,...,N}");
  unsigned net_n = 0;
  bool net_table = false;
  net->add_option("N", net_n, "sequence length")->required();
  net->add_flag("--table", net_table, "print the net as TSV");

  // decompose-bernoulli
  auto* db = app.add_subcommand("decompose-bernoulli", "factor a Bernoulli e-function as exchangeable times binomial");
  unsigned db_n = 0;
  db->add_option("--function", function_path, "function on {0,1}^N (per string or by_count)")
      ->required()
      ->check(CLI::ExistingFile);
  db->add_option("--N", db_n, "sequence length")->required();
  db->add_option("--tol", tol, "envelope bracket width")->check(CLI::PositiveNumber);

  // constant-search
  auto* cs = app.add_subcommand("constant-search", "bracket the smallest c with E_sin in c E_bin or E_bin in c E_sin");
  unsigned cs_n = 0;
  std::string direction;
  double cs_tol = 1e-6;
  std::string table;
  auto* cs_n_opt = cs->add_option("--N", cs_n, "sequence length");
  cs->add_option("--direction", direction, "sin2bin | bin2sin")->required()->check(CLI::IsMember({"sin2bin", "bin2sin"}));
  cs->add_option("--tol", cs_tol, "absolute width (sin2bin) or relative width (bin2sin)")->check(CLI::PositiveNumber);
  auto* table_opt = cs->add_option("--table", table, "N1..N2: one TSV row per N");

  std::vector<const char*> argv;
  argv.push_back("evidence-kit");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return ok;
    err << app.help();
    detail::emit(out, Json{{"error", {{"code", "UsageError"}, {"message", e.what()}}}});
    return usage_error;
  }

  try {
    if (*cal) {
      if (kind != "inverse" && !kappa_opt->count()) throw Error(ErrorCode::invalid_kappa, "--kappa is required");
      const Calibrator c = kind == "power" ? Calibrator::power(kappa)
                           : kind == "log" ? Calibrator::log(kappa)
                                           : Calibrator::inverse();
      const auto value = read_extended<double>(Json(value_text));
      Json payload{{"command", "calibrate"}, {"kind", kind}};
      if (c.kind() != CalibratorKind::inverse) payload["kappa"] = kappa;
      int code = ok;
      if (c.kind() == CalibratorKind::inverse) {
        payload["e"] = write_extended(value);
        payload["p"] = calibrate_e_to_p(value);
        if (certify) throw Error(ErrorCode::invalid_input, "--certify applies to the power and log calibrators");
      } else {
        if (value.is_infinite()) throw Error(ErrorCode::value_out_of_range, "p must lie in [0,1]");
        payload["p"] = value.value();
        payload["e"] = write_extended(calibrate_p_to_e(c, value.value()));
        if (certify) {
          auto v = admissibility_check(c, subdivisions, cal_tol);
          payload["admissibility"] = write_verdict(v);
          code = exit_code(v.status);
        }
      }
      detail::emit(out, payload);
      return code;
    }
    for (auto* sub : checks) {
      if (!*sub) continue;
      const auto fdoc = load_json_file(function_path);
      const auto spec = parse_model(model_text);
      const bool exact = use_exact(mode, {&fdoc, spec.kind == ModelSpec::family ? &spec.doc : nullptr});
      return exact ? detail::check<Rational>(sub->get_name(), fdoc, spec, tol, out)
                   : detail::check<double>(sub->get_name(), fdoc, spec, tol, out);
    }
    if (*dec) {
      const auto fdoc = load_json_file(function_path);
      const auto mdoc = load_json_file(pb_path);
      return use_exact(mode, {&fdoc, &mdoc}) ? detail::decompose<Rational>(fdoc, mdoc, out)
                                             : detail::decompose<double>(fdoc, mdoc, out);
    }
    if (*proj) {
      const auto fdoc = load_json_file(function_path);
      Json mdoc;
      const bool with_model = proj_model->count() > 0;
      if (with_model) mdoc = load_json_file(pb_path);
      const Json* m = with_model ? &mdoc : nullptr;
      return use_exact(mode, {&fdoc, m}) ? detail::project<Rational>(fdoc, dir, m, out)
                                         : detail::project<double>(fdoc, dir, m, out);
    }
    if (*net) {
      const auto sn = sin_net(net_n);
      const auto part = sin_partition(sn);
      if (net_table) {
        out << "a\tp\n" << std::setprecision(17);
        for (std::size_t a = 0; a < sn.points.size(); ++a) out << a + 1 << '\t' << sn.points[a] << '\n';
        return ok;
      }
      detail::emit(out, Json{{"command", "sin-net"}, {"net", write_sin_net(sn, part)}});
      return ok;
    }
    if (*db) {
      const auto fdoc = load_json_file(function_path);
      return use_exact(mode, {&fdoc}) ? detail::decompose_bernoulli<Rational>(fdoc, db_n, tol, out)
                                      : detail::decompose_bernoulli<double>(fdoc, db_n, tol, out);
    }
    if (*cs) {
      ConstantSearchOptions opt;
      opt.threads = threads;
      const auto dirn = parse_direction(direction);
      if (table_opt->count()) {
        const auto [n1, n2] = detail::parse_range(table);
        if (n1 > n2) throw Error(ErrorCode::invalid_input, "--table range is empty");
        out << "N\tdirection\tlower\tupper\trounds\n" << std::setprecision(12);
        for (unsigned n = n1; n <= n2; ++n) {
          auto b = constant_search(n, dirn, cs_tol, opt);
          out << n << '\t' << to_string(dirn) << '\t' << b.lower << '\t' << b.upper << '\t' << b.rounds << '\n';
        }
        return ok;
      }
      if (!cs_n_opt->count()) throw Error(ErrorCode::invalid_input, "constant-search needs --N or --table");
      auto b = constant_search(cs_n, dirn, cs_tol, opt);
      detail::emit(out, Json{{"command", "constant-search"}, {"bracket", write_bracket(b)}});
      return ok;
    }
  } catch (const Error& e) {
    detail::emit(out, Json{{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}});
    return usage_error;
  } catch (const std::exception& e) {
    detail::emit(out, Json{{"error", {{"code", "InvalidInput"}, {"message", e.what()}}}});
    return usage_error;
  }
  return usage_error;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

}  // namespace evidence_kit::cli
