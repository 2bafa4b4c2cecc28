#include "evidence_kit/bernstein.hpp"
#include "evidence_kit/testing.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace evidence_kit;

namespace {

using Q = Rational;
using EQ = Extended<Q>;

ScoreFn<Q> binary_fn(unsigned N, std::vector<long> num, long den = 1) {
  auto s = binary_space(N);
  std::vector<EQ> v;
  for (long x : num) v.emplace_back(Q(x, den));
  return ScoreFn<Q>(s, v);
}

const FiniteSpace ab({"a", "b"});
const FiniteSpace coin({"0", "1"});

StatModel<Q> two_member_family() {
  return StatModel<Q>::finite_family(FiniteSpace({"P1", "P2"}),
                                     {Measure<Q>(ab, {Q(1), Q(0)}), Measure<Q>(ab, {Q(1, 2), Q(1, 2)})});
}

}  // namespace

// ---------------------------------------------------------------------------
// Bernstein subdivision

TEST(Bernstein, ConstantAndLinear) {
  auto b = bernstein_max<Q>(std::vector<Q>{Q(2), Q(2), Q(2)}, {});
  EXPECT_EQ(b.lower, Q(2));
  EXPECT_EQ(b.upper, Q(2));
  // binary64 brackets are widened by the rounding allowance on both sides
  auto l = bernstein_max<double>(std::vector<double>{0.0, 1.0}, {1e-12});
  EXPECT_LE(l.lower, 1.0);
  EXPECT_GE(l.upper, 1.0);
  EXPECT_LT(l.upper - l.lower, 1e-12);
  EXPECT_DOUBLE_EQ(l.argmax, 1.0);
}

TEST(Bernstein, InteriorMaximumExact) {
  // 2p(1-p) in degree-2 Bernstein form
  BernsteinOptions<Q> opt;
  opt.tol = Q(1, 1000000000);
  auto b = bernstein_max<Q>(std::vector<Q>{Q(0), Q(1), Q(0)}, opt);
  EXPECT_EQ(b.lower, Q(1, 2));
  EXPECT_LE(b.upper - b.lower, opt.tol);
  EXPECT_TRUE(b.certified);
}

TEST(Bernstein, EvaluationMatchesPowerBasis) {
  std::vector<double> c{0.3, -1.0, 2.5, 0.7};
  for (double p : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    double direct = 0;
    for (unsigned k = 0; k < 4; ++k) direct += c[k] * oracle::choose(3, k) * std::pow(p, k) * std::pow(1 - p, 3 - k);
    EXPECT_NEAR(bernstein_eval<double>(c, p), direct, 1e-14);
  }
}

TEST(Bernstein, ThresholdStopsEarly) {
  BernsteinOptions<double> opt;
  opt.tol = 1e-12;
  opt.threshold = 10.0;
  auto b = bernstein_max<double>(std::vector<double>{0.0, 1.0, 0.0}, opt);
  EXPECT_LE(b.upper, 10.0);
  EXPECT_EQ(b.subdivisions, 0u);
}

TEST(Bernstein, SubdivisionCapLeavesUncertifiedBracket) {
  BernsteinOptions<double> opt;
  opt.tol = 1e-300;
  opt.max_subdivisions = 10;
  auto b = bernstein_max<double>(std::vector<double>{0.0, 3.0, -1.0, 2.0, 0.5}, opt);
  EXPECT_FALSE(b.certified);
  EXPECT_LE(b.lower, b.upper);
  EXPECT_EQ(b.subdivisions, 10u);
}

// ---------------------------------------------------------------------------
// Envelopes

TEST(Envelope, EndpointMaximum) {
  auto env = upper_envelope(binary_fn(2, {2, 0, 0, 2}), StatModel<Q>::bernoulli(2), Q(1, 1000000000));
  EXPECT_EQ(env.lower, EQ(Q(2)));
  EXPECT_EQ(env.upper, EQ(Q(2)));
  EXPECT_TRUE(env.certified);
  ASSERT_TRUE(env.argmax_parameter);
  EXPECT_TRUE(*env.argmax_parameter == 0 || *env.argmax_parameter == 1);
}

TEST(Envelope, InteriorMaximumAtHalf) {
  auto env = upper_envelope(binary_fn(2, {0, 1, 1, 0}), StatModel<Q>::bernoulli(2), Q(1, 1000000000));
  EXPECT_EQ(env.lower, EQ(Q(1, 2)));
  EXPECT_LE(env.upper.value() - env.lower.value(), Q(1, 1000000000));
  EXPECT_EQ(*env.argmax_parameter, Q(1, 2));
}

TEST(Envelope, FiniteFamily) {
  auto env = upper_envelope(ScoreFn<Q>(ab, {EQ(Q(1)), EQ(Q(2))}), two_member_family(), Q(1));
  EXPECT_EQ(env.upper, EQ(Q(3, 2)));
  EXPECT_EQ(env.lower, env.upper);
  EXPECT_EQ(env.argmax_hint, "P2");
}

TEST(Envelope, PartitionUniformTakesMaxCellAverage) {
  auto model = StatModel<Q>::partition_uniform(CellPartition::from_cells(4, {{0, 2}, {3, 4}}));
  std::vector<EQ> h{EQ(Q(3)), EQ(Q(0)), EQ(Q(0)), EQ(Q(4)), EQ(Q(0))};
  auto env = upper_envelope(ScoreFn<Q>(count_space(4), h), model, Q(1));
  EXPECT_EQ(env.upper, EQ(Q(2)));
}

TEST(Envelope, InfiniteValueWithPositiveMass) {
  std::vector<EQ> v{EQ(Q(0)), EQ::infinity(), EQ(Q(0)), EQ(Q(0))};
  ScoreFn<Q> f(binary_space(2), v);
  auto env = upper_envelope(f, StatModel<Q>::bernoulli(2), Q(1, 1000));
  EXPECT_TRUE(env.infinite);
  EXPECT_TRUE(is_e_function(f, StatModel<Q>::bernoulli(2), Q(1, 1000)).rejected());
}

TEST(Envelope, InfiniteValueOnNullOutcomeOfFiniteFamily) {
  ScoreFn<Q> f(ab, {EQ(Q(1, 2)), EQ::infinity()});
  auto model = StatModel<Q>::simple(Measure<Q>::point_mass(ab, 0));
  EXPECT_TRUE(is_e_function(f, model, Q(1)).accepted());
}

TEST(Envelope, SpaceMismatch) {
  try {
    upper_envelope(binary_fn(2, {1, 1, 1, 1}), StatModel<Q>::bernoulli(3), Q(1, 1000));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::space_mismatch);
  }
}

TEST(Envelope, BracketContainsGridMaximum) {
  oracle::Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned N = 2 + static_cast<unsigned>(oracle::random_index(rng, 9));
    std::vector<double> f(std::size_t{1} << N);
    for (auto& x : f) x = u(rng);
    std::vector<Extended<double>> ext(f.begin(), f.end());
    auto env = upper_envelope(ScoreFn<double>(binary_space(N), ext), StatModel<double>::bernoulli(N), 1e-9);
    ASSERT_TRUE(env.certified);
    EXPECT_LE(env.upper.value() - env.lower.value(), 1e-9);
    const auto S = oracle::level_sums(f, N);
    auto grid = oracle::dense_grid_max([&](double p) { return oracle::level_polynomial(S, p); }, 100001);
    EXPECT_LE(grid.value, env.upper.value() + 1e-12);
    // grid spacing 1e-5: discretization error is at most |P''| h^2 / 8
    EXPECT_GE(grid.value, env.lower.value() - 1e-6 * N * N * (1 << N));
  }
}

// ---------------------------------------------------------------------------
// e-functions

TEST(IsE, ConstantOneAcceptedWithZeroMargin) {
  auto v = is_e_function(ScoreFn<Q>::constant(binary_space(3), EQ(Q(1))), StatModel<Q>::bernoulli(3), Q(1, 1000));
  EXPECT_TRUE(v.accepted());
  EXPECT_EQ(v.margin, 0.0);
  auto w = is_e_function(ScoreFn<Q>::constant(ab, EQ(Q(1))), two_member_family(), Q(1));
  EXPECT_TRUE(w.accepted());
  EXPECT_EQ(w.margin, 0.0);
}

TEST(IsE, IndicatorTimesTwo) {
  EXPECT_TRUE(is_e_function(binary_fn(2, {0, 2, 0, 0}), StatModel<Q>::bernoulli(2), Q(1, 1000000000)).accepted());
}

TEST(IsE, RejectedAtEndpointWithWitness) {
  auto v = is_e_function(binary_fn(2, {2, 1, 1, 0}), StatModel<Q>::bernoulli(2), Q(1, 1000000000));
  EXPECT_TRUE(v.rejected());
  ASSERT_TRUE(v.witness);
  ASSERT_TRUE(v.witness->parameter_value);
  EXPECT_EQ(*v.witness->parameter_value, 0.0);
  // the witness recomputes: int f dB_0 = f(00) = 2 > 1
  auto env = upper_envelope(binary_fn(2, {2, 1, 1, 0}), StatModel<Q>::bernoulli(2), Q(1, 1000000000));
  EXPECT_EQ(env.lower, EQ(Q(2)));
}

TEST(IsE, MaximumExactlyOneIsAccepted) {
  // 4 p (1-p) has maximum exactly 1 at p = 1/2
  EXPECT_TRUE(is_e_function(binary_fn(2, {0, 2, 2, 0}), StatModel<Q>::bernoulli(2), Q(1, 1000000000)).accepted());
}

TEST(IsE, AgreesWithExhaustiveEvaluationOnFiniteFamilies) {
  oracle::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + oracle::random_index(rng, 6);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    FiniteSpace s(labels);
    std::vector<std::vector<Q>> raw;
    std::vector<Measure<Q>> ms;
    for (std::size_t m = 0; m < 1 + oracle::random_index(rng, 3); ++m) {
      raw.push_back(oracle::random_weights(rng, n, 0.3));
      ms.emplace_back(s, raw.back());
    }
    std::vector<Q> f;
    std::vector<EQ> fe;
    for (std::size_t i = 0; i < n; ++i) {
      f.push_back(oracle::random_rational(rng, 6, 4));
      fe.emplace_back(f.back());
    }
    auto model = StatModel<Q>::finite_family(ms);
    EXPECT_EQ(is_e_function(ScoreFn<Q>(s, fe), model, Q(1)).accepted(), oracle::is_e_function(f, raw));
    if (std::all_of(f.begin(), f.end(), [](const Q& x) { return x <= 1; }))
      EXPECT_EQ(is_p_function(ScoreFn<Q>(s, fe), model).accepted(), oracle::is_p_function(f, raw));
  }
}

TEST(IsE, AgainstSingleMeasure) {
  auto mu = Measure<Q>::uniform(ab);
  EXPECT_TRUE(is_e_function(ScoreFn<Q>(ab, {EQ(Q(2)), EQ(Q(0))}), mu).accepted());
  EXPECT_TRUE(is_e_function(ScoreFn<Q>(ab, {EQ(Q(2)), EQ(Q(1, 100))}), mu).rejected());
}

// ---------------------------------------------------------------------------
// p-functions

TEST(IsP, FairCoinAccepted) {
  auto mu = Measure<Q>::uniform(coin);
  EXPECT_TRUE(is_p_function(ScoreFn<Q>(coin, {EQ(Q(1, 2)), EQ(Q(1))}), mu).accepted());
}

TEST(IsP, FairCoinRejectedAtPointFour) {
  auto mu = Measure<Q>::uniform(coin);
  auto v = is_p_function(ScoreFn<Q>(coin, {EQ(Q(2, 5)), EQ(Q(1))}), mu);
  EXPECT_TRUE(v.rejected());
  ASSERT_TRUE(v.witness);
  EXPECT_EQ(v.witness->epsilon, "2/5");
  EXPECT_EQ(v.witness->attained, "1/2");
}

TEST(IsP, ConstantOneAlwaysAccepted) {
  EXPECT_TRUE(is_p_function(ScoreFn<Q>::constant(ab, EQ(Q(1))), two_member_family()).accepted());
  EXPECT_TRUE(is_p_function(ScoreFn<Q>::constant(binary_space(3), EQ(Q(1))), StatModel<Q>::bernoulli(3)).accepted());
}

TEST(IsP, ValueOutOfRange) {
  try {
    is_p_function(ScoreFn<Q>(coin, {EQ(Q(3, 2)), EQ(Q(1))}), Measure<Q>::uniform(coin));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::value_out_of_range);
  }
}

TEST(IsP, BernoulliFamily) {
  // f(w) = 1/4 on 00 only: P*{f <= 1/4} = sup (1-p)^2 = 1 > 1/4
  auto v = is_p_function(binary_fn(2, {1, 4, 4, 4}, 4), StatModel<Q>::bernoulli(2));
  EXPECT_TRUE(v.rejected());
  // tail p-function of the count under every B_p: 00 and 11 can never be small
  auto w = is_p_function(binary_fn(2, {1, 1, 1, 1}), StatModel<Q>::bernoulli(2));
  EXPECT_TRUE(w.accepted());
}

// ---------------------------------------------------------------------------
// Conditional functions

TEST(Conditional, EExamples) {
  const FiniteSpace theta({"A", "B"});
  auto model = StatModel<Q>::finite_family(theta, {Measure<Q>(ab, {Q(1), Q(0)}), Measure<Q>(ab, {Q(1, 2), Q(1, 2)})});
  auto ones = ConditionalScoreFn<Q>(ab, theta, std::vector<EQ>(4, EQ(Q(1))));
  EXPECT_TRUE(is_conditional_e(ones, model).accepted());
  auto f = ConditionalScoreFn<Q>::from_slices(
      theta, {ScoreFn<Q>(ab, {EQ(Q(1)), EQ(Q(3))}), ScoreFn<Q>(ab, {EQ(Q(2, 5)), EQ(Q(8, 5))})});
  EXPECT_TRUE(is_conditional_e(f, model).accepted());
  auto g = ConditionalScoreFn<Q>::from_slices(
      theta, {ScoreFn<Q>(ab, {EQ(Q(3, 2)), EQ(Q(0))}), ScoreFn<Q>(ab, {EQ(Q(2, 5)), EQ(Q(8, 5))})});
  auto v = is_conditional_e(g, model);
  EXPECT_TRUE(v.rejected());
  EXPECT_EQ(v.witness->parameter, "A");
}

TEST(Conditional, PExamples) {
  const FiniteSpace theta({"A", "B"});
  auto mu = Measure<Q>::uniform(coin);
  auto model = StatModel<Q>::finite_family(theta, {mu, mu});
  auto good = ScoreFn<Q>(coin, {EQ(Q(1, 2)), EQ(Q(1))});
  auto bad = ScoreFn<Q>(coin, {EQ(Q(2, 5)), EQ(Q(1))});
  EXPECT_TRUE(is_conditional_p(ConditionalScoreFn<Q>(coin, theta, std::vector<EQ>(4, EQ(Q(1)))), model).accepted());
  EXPECT_TRUE(is_conditional_p(ConditionalScoreFn<Q>::from_slices(theta, {good, good}), model).accepted());
  auto v = is_conditional_p(ConditionalScoreFn<Q>::from_slices(theta, {good, bad}), model);
  EXPECT_TRUE(v.rejected());
  EXPECT_EQ(v.witness->parameter, "B");
  EXPECT_EQ(v.witness->epsilon, "2/5");
}

// ---------------------------------------------------------------------------
// p_from_statistic

TEST(PFromStatistic, Examples) {
  auto mu = Measure<Q>::uniform(coin);
  auto constant = p_from_statistic(ScoreFn<Q>::constant(coin, EQ(Q(7))), mu);
  EXPECT_EQ(constant, ScoreFn<Q>::constant(coin, EQ(Q(1))));
  auto f = p_from_statistic(ScoreFn<Q>(coin, {EQ(Q(0)), EQ(Q(1))}), mu);
  EXPECT_EQ(f[0], EQ(Q(1)));
  EXPECT_EQ(f[1], EQ(Q(1, 2)));
  const FiniteSpace four({"a", "b", "c", "d"});
  auto g = p_from_statistic(ScoreFn<Q>(four, {EQ(Q(3)), EQ(Q(1)), EQ(Q(4)), EQ(Q(2))}), Measure<Q>::uniform(four));
  EXPECT_EQ(g[0], EQ(Q(1, 2)));
  EXPECT_EQ(g[1], EQ(Q(1)));
  EXPECT_EQ(g[2], EQ(Q(1, 4)));
  EXPECT_EQ(g[3], EQ(Q(3, 4)));
  EXPECT_TRUE(is_p_function(g, Measure<Q>::uniform(four)).accepted());
}

TEST(PFromStatistic, SpaceMismatch) {
  EXPECT_THROW(p_from_statistic(ScoreFn<Q>::constant(ab, EQ(Q(1))), Measure<Q>::uniform(coin)), Error);
}

TEST(PFromStatistic, BernoulliFamilyGivesPFunction) {
  const auto space = binary_space(4);
  std::vector<EQ> stat;
  for (const auto& l : space.labels()) stat.emplace_back(Q(static_cast<long>(count_ones(l))));
  auto f = p_from_statistic(ScoreFn<Q>(space, stat), StatModel<Q>::bernoulli(4), Q(1, 1000000));
  EXPECT_TRUE(is_p_function(f, StatModel<Q>::bernoulli(4)).accepted());
}
