// Walks through the library on small hand-sized inputs.

#include "evidence_kit/bayes.hpp"
#include "evidence_kit/bernoulli.hpp"
#include "evidence_kit/calibration.hpp"
#include "evidence_kit/constant_search.hpp"
#include "evidence_kit/testing.hpp"

#include <iomanip>
#include <iostream>

using namespace evidence_kit;
using Q = Rational;
using EQ = Extended<Rational>;

int main() {
  // p = 0.04 through the power calibrator with kappa = 1/2
  const auto e = calibrate_p_to_e(Calibrator::power(0.5), 0.04);
  std::cout << "power calibrator: p=0.04 -> e=" << e.value() << '\n';

  // 2 on the string 01, 0 elsewhere, tested against every Bernoulli(p) on {0,1}^2
  const ScoreFn<Q> f(binary_space(2), {EQ(Q(0)), EQ(Q(2)), EQ(Q(0)), EQ(Q(0))});
  const auto bern = StatModel<Q>::bernoulli(2);
  const auto env = upper_envelope(f, bern, Q(1, 1000000000));
  std::cout << "sup_p E_p[f] in [" << env.lower.value() << ", " << env.upper.value() << "], e-function: "
            << (is_e_function(f, bern, Q(1, 1000000000)).accepted() ? "yes" : "no") << '\n';

  // the same function split into an exchangeable part and a function of the count
  auto model = configuration_model<Q>(binary_alphabet(), 2);
  auto d = decompose_iid_e(f, model, Q(1, 1000000000));
  std::cout << "h(count) =";
  for (const auto& x : d.h.values()) std::cout << ' ' << x.value();
  std::cout << ", product identity: " << (d.product_identity ? "holds" : "fails") << '\n';

  // a two-point Bayesian model and a joint e-function on Omega x Theta
  const FiniteSpace omega({"0", "1"}), theta({"A", "B"});
  auto pb = ParaBayesModel<Q>::from_bayes({{Measure<Q>(omega, {Q(1), Q(0)}), Measure<Q>(omega, {Q(1, 2), Q(1, 2)})},
                                            Measure<Q>(theta, {Q(1, 2), Q(1, 2)})});
  const ScoreFn<Q> joint_f(FiniteSpace::product(omega, theta), {EQ(Q(1)), EQ(Q(2, 5)), EQ(Q(3)), EQ(Q(8, 5))});
  auto dec = decompose_e(joint_f, pb);
  std::cout << "h(theta) = " << dec.h[0].value() << ", " << dec.h[1].value() << '\n';

  // the sin^2 net at N = 4 and the constant bracket for E_sin into E_bin
  const auto part = sin_partition(4);
  std::cout << "N=4 cells:";
  for (auto [a, b] : part.cells) std::cout << " {" << a << ".." << b << '}';
  const auto bracket = constant_search(4, Direction::sin_into_bin, 1e-6);
  std::cout << std::setprecision(10) << "\nsin-into-bin constant at N=4 in [" << bracket.lower << ", " << bracket.upper << "]\n";
}
