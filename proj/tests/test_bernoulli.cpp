#include "evidence_kit/bernoulli.hpp"
#include "evidence_kit/calibration.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace evidence_kit;

namespace {

using Q = Rational;
using EQ = Extended<Rational>;

EQ q(long n, long d = 1) { return EQ(Q(n, d)); }

ScoreFn<Q> as_score(const FiniteSpace& s, const std::vector<Q>& v) { return ScoreFn<Q>(s, {v.begin(), v.end()}); }

ScoreFn<Q> on_strings(unsigned N, const std::map<std::string, Q>& values) {
  const auto space = binary_space(N);
  return ScoreFn<Q>::from(space, [&](std::size_t i) {
    auto it = values.find(space.label(i));
    return it == values.end() ? Q(0) : it->second;
  });
}

std::vector<Q> rationals(const ScoreFn<Q>& f) {
  std::vector<Q> v;
  for (const auto& x : f.values()) v.push_back(x.value());
  return v;
}

// Worst Bernoulli integral of f on a dense grid, from level sums.
double grid_envelope(const std::vector<Q>& f, unsigned N, std::size_t points = 20001) {
  auto S = oracle::level_sums(f, N);
  std::vector<double> s;
  for (const auto& x : S) s.push_back(to_double(x));
  return oracle::dense_grid_max([&](double p) { return oracle::level_polynomial(s, p); }, points).value;
}

// Worst binomial integral of h on a dense grid.
double grid_binomial_envelope(const std::vector<Q>& h, std::size_t points = 20001) {
  const auto N = static_cast<unsigned>(h.size() - 1);
  std::vector<double> s;
  for (unsigned k = 0; k <= N; ++k) s.push_back(to_double(h[k]) * oracle::choose(N, k));
  return oracle::dense_grid_max([&](double p) { return oracle::level_polynomial(s, p); }, points).value;
}

const Q gen_pad(1, 1000000);
const Q check_tol(1, 1000000000);

// Random element of E_Bern: divide by the certified envelope plus a pad, so
// a later check at a finer tolerance is never left inconclusive.
std::vector<Q> random_bern_e(oracle::Rng& rng, unsigned N) {
  const auto space = binary_space(N);
  for (;;) {
    std::vector<Q> f(space.size());
    for (auto& x : f) x = oracle::random_sparse_rational(rng);
    auto env = upper_envelope(as_score(space, f), StatModel<Q>::bernoulli(N), gen_pad);
    if (env.upper.value() == 0) continue;
    const Q scale = env.upper.value() + gen_pad;
    for (auto& x : f) x /= scale;
    return f;
  }
}

std::vector<Q> random_bin_e(oracle::Rng& rng, unsigned N) {
  const auto space = count_space(N);
  for (;;) {
    std::vector<Q> h(N + 1);
    for (auto& x : h) x = oracle::random_sparse_rational(rng);
    auto env = upper_envelope(as_score(space, h), StatModel<Q>::binomial(N), gen_pad);
    if (env.upper.value() == 0) continue;
    const Q scale = env.upper.value() + gen_pad;
    for (auto& x : h) x /= scale;
    return h;
  }
}

// Random element of E_exch: each level rescaled to average at most 1.
std::vector<Q> random_exch_e(oracle::Rng& rng, unsigned N) {
  std::vector<Q> g(std::size_t{1} << N);
  for (auto& x : g) x = oracle::random_rational(rng, 10, 3);
  auto S = oracle::level_sums(g, N);
  for (std::size_t code = 0; code < g.size(); ++code) {
    const auto k = static_cast<unsigned>(__builtin_popcountll(code));
    if (S[k] != 0) g[code] = g[code] * Q(static_cast<long>(oracle::choose(N, k))) / S[k];
  }
  return g;
}

Q p_up(double x) { return x >= 1.0 ? Q(1) : rational_from_double(round_up(x, 8)); }
Q e_down(double x) { return rational_from_double(x * (1.0 - 1e-12)); }

}  // namespace

TEST(BernoulliMeasure, Examples) {
  auto u = bernoulli_measure<Q>(2, Q(1, 2));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(u[i], Q(1, 4));
  EXPECT_EQ(bernoulli_measure<Q>(2, Q(0)), Measure<Q>::point_mass(binary_space(2), 0));
  auto t = bernoulli_measure<Q>(2, Q(1, 3));
  EXPECT_EQ(t.at("00"), Q(4, 9));
  EXPECT_EQ(t.at("01"), Q(2, 9));
  EXPECT_EQ(t.at("10"), Q(2, 9));
  EXPECT_EQ(t.at("11"), Q(1, 9));
}

TEST(BernoulliMeasure, InvalidParameter) {
  for (auto bad : {Q(-1, 2), Q(3, 2)}) {
    try {
      bernoulli_measure<Q>(2, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
    }
  }
  EXPECT_THROW(binomial_measure<double>(3, 1.5), Error);
  EXPECT_THROW(bernoulli_measure<Q>(0, Q(1, 2)), Error);
}

TEST(BinomialMeasure, Examples) {
  EXPECT_EQ(binomial_measure<Q>(2, Q(1, 2)), Measure<Q>(count_space(2), {Q(1, 4), Q(1, 2), Q(1, 4)}));
  EXPECT_EQ(binomial_measure<Q>(4, Q(0)), Measure<Q>::point_mass(count_space(4), 0));
  EXPECT_EQ(binomial_measure<Q>(3, Q(1, 3)), Measure<Q>(count_space(3), {Q(8, 27), Q(12, 27), Q(6, 27), Q(1, 27)}));
}

TEST(BinomialMeasure, EqualsPushforwardOfBernoulli) {
  for (unsigned N = 1; N <= 12; ++N) {
    const auto counts = count_space(N);
    for (auto p : {Q(0), Q(1, 3), Q(2, 7), Q(1, 2), Q(9, 10), Q(1)}) {
      auto pushed = pushforward<Q>(bernoulli_measure<Q>(N, p), counts,
                                   std::function<std::string(const std::string&)>(
                                       [](const std::string& s) { return std::to_string(count_ones(s)); }));
      auto bin = binomial_measure<Q>(N, p);
      EXPECT_EQ(pushed, bin) << N;
      for (unsigned k = 0; k <= N; ++k) EXPECT_EQ(bin[k], oracle::binomial_pmf(N, k, p));
    }
  }
}

TEST(BinomialMeasure, FloatingPmfMatchesExact) {
  for (unsigned N : {5u, 40u, 200u})
    for (double p : {0.1, 0.5, 0.77}) {
      double total = 0.0;
      for (unsigned k = 0; k <= N; ++k) {
        const double v = binomial_pmf(N, k, p);
        total += v;
        EXPECT_NEAR(v, oracle::choose(N, k) * std::pow(p, k) * std::pow(1 - p, N - k), 1e-12);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Exchangeable, Examples) {
  EXPECT_TRUE(is_exch_e(ScoreFn<Q>::constant(binary_space(3), q(1))).accepted());
  auto ok = is_exch_e(on_strings(2, {{"00", Q(1)}, {"01", Q(2)}, {"11", Q(1)}}));
  EXPECT_TRUE(ok.accepted());
  EXPECT_EQ(ok.margin, 0.0);
  auto bad = is_exch_e(on_strings(2, {{"00", Q(1)}, {"01", Q(2)}, {"10", Q(1)}, {"11", Q(1)}}));
  EXPECT_TRUE(bad.rejected());
  ASSERT_TRUE(bad.witness);
  EXPECT_EQ(bad.witness->parameter, "k=1");
  EXPECT_EQ(bad.witness->attained, "3/2");
}

TEST(Exchangeable, SpaceMismatch) {
  EXPECT_THROW(is_exch_e(ScoreFn<Q>::constant(FiniteSpace({"a", "b"}), q(1))), Error);
}

TEST(Exchangeable, PFunctionWithinLevels) {
  // rank within each level: 1/C(N,k), 2/C(N,k), ...
  auto f = on_strings(2, {{"00", Q(1)}, {"01", Q(1, 2)}, {"10", Q(1)}, {"11", Q(1)}});
  EXPECT_TRUE(is_exch_p(f).accepted());
  auto g = on_strings(2, {{"00", Q(1)}, {"01", Q(1, 3)}, {"10", Q(1, 3)}, {"11", Q(1)}});
  EXPECT_TRUE(is_exch_p(g).rejected());
}

TEST(Configuration, BinaryTwo) {
  auto m = configuration_model<Q>(binary_alphabet(), 2);
  ASSERT_EQ(m.theta.size(), 3u);
  EXPECT_EQ(m.theta.label(1), "1");
  EXPECT_EQ(m.kernel[1].at("01"), Q(1, 2));
  EXPECT_EQ(m.kernel[1].at("10"), Q(1, 2));
  EXPECT_EQ(m.kernel[1].at("00"), Q(0));
}

TEST(Configuration, ThreeSymbols) {
  auto m = configuration_model<Q>(FiniteSpace({"a", "b", "c"}), 2);
  EXPECT_EQ(m.theta.size(), 6u);
  const auto ab = m.theta.index_of("{a,b}");
  EXPECT_EQ(m.kernel[ab].at("ab"), Q(1, 2));
  EXPECT_EQ(m.kernel[ab].at("ba"), Q(1, 2));
  EXPECT_EQ(m.kernel[ab].at("aa"), Q(0));
  EXPECT_EQ(m.kernel[m.theta.index_of("{a,a}")].at("aa"), Q(1));
}

TEST(Configuration, BinaryPushforwardIsBinomial) {
  auto m = configuration_model<Q>(binary_alphabet(), 3);
  auto qpi = m.configuration_measure(Measure<Q>::uniform(binary_alphabet()));
  EXPECT_EQ(qpi, Measure<Q>(m.theta, {Q(1, 8), Q(3, 8), Q(3, 8), Q(1, 8)}));
  for (auto p : {Q(1, 5), Q(2, 3)})
    for (unsigned k = 0; k <= 3; ++k)
      EXPECT_EQ(m.configuration_measure(Measure<Q>(binary_alphabet(), {1 - p, p}))[k], oracle::binomial_pmf(3, k, p));
}

TEST(Configuration, BudgetExceeded) {
  try {
    configuration_model<Q>(FiniteSpace({"a", "b", "c"}), 8, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::budget_exceeded);
  }
}

TEST(DecomposeIid, ConstantOne) {
  auto m = configuration_model<Q>(binary_alphabet(), 3);
  auto d = decompose_iid_e(ScoreFn<Q>::constant(m.omega, q(1)), m, check_tol);
  for (const auto& v : d.g.values()) EXPECT_EQ(v, q(1));
  for (const auto& v : d.h.values()) EXPECT_EQ(v, q(1));
  EXPECT_TRUE(d.g_verdict.accepted());
  EXPECT_TRUE(d.h_verdict.accepted());
  EXPECT_TRUE(d.product_identity);
}

TEST(DecomposeIid, IndicatorOfOneString) {
  auto m = configuration_model<Q>(binary_alphabet(), 2);
  auto f = on_strings(2, {{"01", Q(2)}});
  auto d = decompose_iid_e(f, m, check_tol);
  EXPECT_EQ(d.h, ScoreFn<Q>(m.theta, {q(0), q(1), q(0)}));
  EXPECT_TRUE(d.h_verdict.accepted());
  EXPECT_NEAR(d.h_verdict.margin, 0.5, 1e-6);
  auto env = upper_envelope(d.h, StatModel<Q>::binomial(2), check_tol);
  EXPECT_LE(env.lower, q(1, 2));
  EXPECT_GE(env.upper, q(1, 2));
  EXPECT_LE(env.upper.value() - env.lower.value(), check_tol);
  EXPECT_EQ(d.g, f);
  EXPECT_TRUE(d.g_verdict.accepted());
  EXPECT_TRUE(d.product_identity);
  EXPECT_EQ(compose_iid(d.g, d.h, m), f);
}

TEST(DecomposeIid, NotInBernoulliClass) {
  auto m = configuration_model<Q>(binary_alphabet(), 2);
  auto f = on_strings(2, {{"00", Q(2)}, {"01", Q(1)}, {"10", Q(1)}});
  auto d = decompose_iid_e(f, m, check_tol);
  EXPECT_EQ(d.h, ScoreFn<Q>(m.theta, {q(2), q(1), q(0)}));
  EXPECT_TRUE(d.h_verdict.rejected());
  ASSERT_TRUE(d.h_verdict.witness);
  ASSERT_TRUE(d.h_verdict.witness->parameter_value);
  EXPECT_EQ(*d.h_verdict.witness->parameter_value, 0.0);
  EXPECT_TRUE(d.g_verdict.accepted());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(d.g[i], q(1));
  EXPECT_TRUE(is_e_function(f, StatModel<Q>::bernoulli(2), check_tol).rejected());
}

// E_Bern = E_exch E_bin, direction "contained in".
TEST(DecomposeIid, RandomBernoulliEFunctionsFactor) {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const unsigned N = 2 + static_cast<unsigned>(trial % 7);
    auto fv = random_bern_e(rng, N);
    ASSERT_LE(grid_envelope(fv, N), 1.0 + 1e-12);
    auto m = configuration_model<Q>(binary_alphabet(), N);
    auto f = as_score(m.omega, fv);
    auto d = decompose_iid_e(f, m, check_tol);
    ASSERT_TRUE(d.g_verdict.accepted()) << trial;
    ASSERT_TRUE(d.h_verdict.accepted()) << trial;
    EXPECT_TRUE(d.product_identity);
    EXPECT_EQ(compose_iid(d.g, d.h, m), f);

    // oracle: h is the level average, g averages to 0 or 1 per level
    auto S = oracle::level_sums(fv, N);
    std::vector<Q> h;
    for (unsigned k = 0; k <= N; ++k) h.push_back(S[k] / Q(static_cast<long>(oracle::choose(N, k))));
    EXPECT_EQ(rationals(d.h), h);
    EXPECT_LE(grid_binomial_envelope(h), 1.0 + 1e-12);
    auto G = oracle::level_sums(rationals(d.g), N);
    for (unsigned k = 0; k <= N; ++k) EXPECT_LE(G[k], Q(static_cast<long>(oracle::choose(N, k))));
  }
}

// E_exch E_bin is contained in E_Bern.
TEST(DecomposeIid, ProductsOfAcceptedFactorsAreBernoulliE) {
  oracle::Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const unsigned N = 2 + static_cast<unsigned>(trial % 7);
    auto m = configuration_model<Q>(binary_alphabet(), N);
    auto g = as_score(m.omega, random_exch_e(rng, N));
    auto h = as_score(m.theta, random_bin_e(rng, N));
    ASSERT_TRUE(is_exch_e(g).accepted());
    ASSERT_TRUE(is_e_function(h, StatModel<Q>::binomial(N), check_tol).accepted());
    auto f = compose_iid(g, h, m);
    EXPECT_TRUE(is_e_function(f, StatModel<Q>::bernoulli(N), check_tol).accepted()) << trial;
    EXPECT_LE(grid_envelope(rationals(f), N), 1.0 + 1e-12);
  }
}

// Alphabet of size 3 with a finite set of IID components.
TEST(DecomposeIid, ThreeSymbolConfigurations) {
  oracle::Rng rng(41);
  const FiniteSpace abc({"a", "b", "c"});
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned N = 1 + static_cast<unsigned>(trial % 5);
    auto m = configuration_model<Q>(abc, N);
    const std::size_t np = 1 + oracle::random_index(rng, 3);
    std::vector<Measure<Q>> pis;
    std::vector<std::vector<Q>> joint;  // pi^N on sequences, by direct products
    std::vector<std::string> names;
    for (std::size_t r = 0; r < np; ++r) {
      auto w = oracle::random_weights(rng, 3, 0.2);
      pis.emplace_back(abc, w);
      names.push_back("pi" + std::to_string(r));
      std::vector<Q> seq(m.omega.size());
      for (std::size_t i = 0; i < seq.size(); ++i) {
        Q mass(1);
        for (char c : m.omega.label(i)) mass *= w[static_cast<std::size_t>(c - 'a')];
        seq[i] = mass;
      }
      joint.push_back(seq);
    }
    const FiniteSpace labels(names);

    std::vector<Q> fv(m.omega.size());
    Q worst(0);
    do {
      for (auto& x : fv) x = oracle::random_rational(rng, 20, 3);
      worst = 0;
      for (const auto& w : joint) worst = std::max(worst, oracle::integral(fv, w));
    } while (worst == 0);
    for (auto& x : fv) x /= worst;
    auto f = as_score(m.omega, fv);
    auto d = decompose_iid_e(f, m, labels, pis);
    EXPECT_TRUE(d.g_verdict.accepted()) << trial;
    EXPECT_TRUE(d.h_verdict.accepted()) << trial;
    EXPECT_TRUE(d.product_identity);

    // reverse direction: configuration-average-one g times an accepted h
    std::vector<Q> gv(m.omega.size());
    for (auto& x : gv) x = oracle::random_rational(rng, 10, 3);
    std::vector<Q> sums(m.theta.size(), Q(0));
    for (std::size_t i = 0; i < gv.size(); ++i) sums[m.conf_of[i]] += gv[i];
    for (std::size_t i = 0; i < gv.size(); ++i) {
      const auto t = m.conf_of[i];
      if (sums[t] != 0) gv[i] = gv[i] * Q(static_cast<long>(m.orderings[t])) / sums[t];
    }
    std::vector<Q> hv(m.theta.size());
    for (auto& x : hv) x = oracle::random_rational(rng, 10, 3);
    Q hw(0);
    for (const auto& pi : pis) {
      auto qpi = m.configuration_measure(pi);
      hw = std::max(hw, oracle::integral(hv, std::vector<Q>(qpi.weights().begin(), qpi.weights().end())));
    }
    if (hw != 0)
      for (auto& x : hv) x /= hw;
    auto prod = compose_iid(as_score(m.omega, gv), as_score(m.theta, hv), m);
    for (const auto& w : joint) EXPECT_LE(oracle::integral(rationals(prod), w), Q(1));
  }
}

TEST(SinNet, Examples) {
  auto n100 = sin_net(100);
  EXPECT_EQ(n100.n_star, 15u);
  EXPECT_EQ(n100.points.size(), 14u);
  auto n4 = sin_net(4);
  EXPECT_EQ(n4.n_star, 3u);
  ASSERT_EQ(n4.points.size(), 2u);
  EXPECT_NEAR(n4.points[0], 0.229849, 1e-6);
  EXPECT_NEAR(n4.points[1], 0.708073, 1e-6);
  auto n2 = sin_net(2);
  EXPECT_EQ(n2.n_star, 2u);
  ASSERT_EQ(n2.points.size(), 1u);
  EXPECT_NEAR(n2.points[0], 0.422028, 1e-6);
  EXPECT_DOUBLE_EQ(n2.points[0], std::pow(std::sin(1 / std::sqrt(2.0)), 2));
  try {
    sin_net(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::n_too_small);
  }
}

TEST(SinNet, PointsIncreaseInsideUnitInterval) {
  for (unsigned N = 2; N <= 400; ++N) {
    auto net = sin_net(N);
    EXPECT_EQ(net.n_star, static_cast<unsigned>(std::floor(std::numbers::pi / 2 * std::sqrt(N))));
    EXPECT_GE(net.n_star, 2u);
    for (std::size_t a = 0; a < net.points.size(); ++a) {
      EXPECT_GT(net.points[a], 0.0);
      EXPECT_LT(net.points[a], 1.0);
      if (a) EXPECT_GT(net.points[a], net.points[a - 1]);
    }
  }
}

TEST(SinEstimator, Examples) {
  EXPECT_NEAR(sin_estimator(4, 0), 0.229849, 1e-6);
  EXPECT_NEAR(sin_estimator(4, 2), 0.229849, 1e-6);
  EXPECT_NEAR(sin_estimator(4, 3), 0.708073, 1e-6);
  try {
    sin_estimator(4, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::out_of_range);
  }
}

TEST(SinPartition, Examples) {
  auto p4 = sin_partition(4);
  ASSERT_EQ(p4.cells.size(), 2u);
  EXPECT_EQ(p4.cells[0], std::make_pair(0u, 2u));
  EXPECT_EQ(p4.cells[1], std::make_pair(3u, 4u));
  // one net point: the fallback sends k=0 to p(1) as well, so one cell
  auto p2 = sin_partition(2);
  ASSERT_EQ(p2.cells.size(), 1u);
  EXPECT_EQ(p2.cells[0], std::make_pair(0u, 2u));
  EXPECT_THROW(sin_partition(1), Error);
}

TEST(SinPartition, CellsAreEstimatorPreimages) {
  for (unsigned N = 2; N <= 300; ++N) {
    auto net = sin_net(N);
    auto part = sin_partition(net);
    unsigned next = 0;
    for (std::size_t c = 0; c < part.cells.size(); ++c) {
      EXPECT_EQ(part.cells[c].first, next);
      next = part.cells[c].second + 1;
    }
    EXPECT_EQ(next, N + 1);
    EXPECT_FALSE(part.near_tie) << N;
    for (unsigned k = 0; k <= N; ++k)
      for (unsigned j = 0; j <= N; ++j) {
        const bool same = sin_estimator(net, k) == sin_estimator(net, j);
        EXPECT_EQ(same, part.cell_of[k] == part.cell_of[j]);
      }
  }
}

TEST(SinE, Examples) {
  EXPECT_TRUE(is_sin_e(ScoreFn<Q>::constant(count_space(4), q(1))).accepted());
  EXPECT_TRUE(is_sin_e(ScoreFn<Q>(count_space(4), {q(3), q(0), q(0), q(2), q(0)})).accepted());
  EXPECT_TRUE(is_sin_e(ScoreFn<Q>(count_space(4), {q(4), q(0), q(0), q(0), q(0)})).rejected());
  EXPECT_THROW(is_sin_e(ScoreFn<Q>::constant(binary_space(2), q(1))), Error);
}

// kappa^-1 P_Bern^(1-kappa) lies above P_exch P_bin, and P_exch P_bin lies in
// kappa^(2/(1-kappa)) P_Bern^(1/(1-kappa)).
TEST(PCorollaries, BernoulliEqualsExchangeableTimesBinomial) {
  oracle::Rng rng(43);
  for (double kappa : {0.1, 0.5}) {
    for (int trial = 0; trial < 12; ++trial) {
      const unsigned N = 2 + static_cast<unsigned>(trial % 4);
      auto m = configuration_model<Q>(binary_alphabet(), N);
      std::vector<EQ> stat(m.omega.size());
      for (auto& x : stat) x = EQ(Q(static_cast<long>(oracle::random_index(rng, 5))));
      auto p = p_from_statistic(ScoreFn<Q>(m.omega, stat), StatModel<Q>::bernoulli(N), Q(1, 1000000));
      ASSERT_TRUE(is_p_function(p, StatModel<Q>::bernoulli(N)).accepted());

      std::vector<EQ> e(m.omega.size());
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double pi = to_double(p[i].value());
        e[i] = pi == 0.0 ? EQ::infinity() : EQ(e_down(kappa * std::pow(pi, kappa - 1.0)));
      }
      auto d = decompose_iid_e(ScoreFn<Q>(m.omega, e), m, check_tol);
      ASSERT_TRUE(d.g_verdict.accepted());
      ASSERT_TRUE(d.h_verdict.accepted());
      auto G = e_to_p(d.g);
      auto H = e_to_p(d.h);
      EXPECT_TRUE(is_exch_p(G).accepted());
      EXPECT_TRUE(is_p_function(H, StatModel<Q>::binomial(N)).accepted());
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double bound = std::min(1.0, std::pow(to_double(p[i].value()), 1.0 - kappa) / kappa);
        EXPECT_LE(to_double((G[i] * H[m.conf_of[i]]).value()), bound * (1 + 1e-9));
      }

      // right inclusion from random exchangeable and binomial p-functions
      std::vector<EQ> gp(m.omega.size());
      for (unsigned k = 0; k <= N; ++k) {
        std::vector<Q> level(m.omega.size(), Q(0));
        std::vector<EQ> s(m.omega.size());
        for (std::size_t i = 0; i < level.size(); ++i) {
          if (count_ones(m.omega.label(i)) == k) level[i] = Q(1) / Q(static_cast<long>(oracle::choose(N, k)));
          s[i] = EQ(Q(static_cast<long>(oracle::random_index(rng, 3))));
        }
        auto tail = p_from_statistic(ScoreFn<Q>(m.omega, s), Measure<Q>(m.omega, level));
        for (std::size_t i = 0; i < level.size(); ++i)
          if (level[i] != 0) gp[i] = tail[i];
      }
      ScoreFn<Q> G2(m.omega, gp);
      ASSERT_TRUE(is_exch_p(G2).accepted());
      std::vector<EQ> hs(N + 1);
      for (auto& x : hs) x = EQ(Q(static_cast<long>(oracle::random_index(rng, 4))));
      auto H2 = p_from_statistic(ScoreFn<Q>(m.theta, hs), StatModel<Q>::binomial(N), Q(1, 1000000));
      std::vector<EQ> pb(m.omega.size());
      for (std::size_t i = 0; i < pb.size(); ++i) {
        const double gh = to_double((G2[i] * H2[m.conf_of[i]]).value());
        pb[i] = EQ(p_up(std::pow(gh, 1.0 - kappa) / (kappa * kappa)));
      }
      EXPECT_TRUE(is_p_function(ScoreFn<Q>(m.omega, pb), StatModel<Q>::bernoulli(N)).accepted());
    }
  }
}
