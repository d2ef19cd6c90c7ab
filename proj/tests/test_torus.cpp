#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "pnormal/errors.hpp"
#include "pnormal/torus.hpp"

using namespace pnormal;

TEST_CASE("polarization types validate divisibility") {
  CHECK(h0_of_type(PolarizationType({3})) == 3);
  CHECK(h0_of_type(PolarizationType({1, 9})) == 9);
  CHECK(h0_of_type(PolarizationType({2, 4})) == 8);
  CHECK_THROWS_AS(PolarizationType({2, 3}), InvalidParameter);
  CHECK_THROWS_AS(PolarizationType({0}), InvalidParameter);
  CHECK_THROWS_AS(PolarizationType(std::vector<long>{}), InvalidParameter);
  CHECK(PolarizationType::principal(3).is_principal());
  CHECK(PolarizationType({1, 1, 49}).exponent() == 49);
}

TEST_CASE("bound 2^g g! is strict") {
  CHECK(theorem_bound_rhs(1) == 2);
  CHECK(theorem_bound_rhs(2) == 8);
  CHECK(theorem_bound_rhs(3) == 48);
  CHECK(theorem_bound_holds(2, PolarizationType({1, 9})));
  CHECK(theorem_bound_holds(1, PolarizationType({3})));
  CHECK_FALSE(theorem_bound_holds(2, PolarizationType({1, 8})));
  CHECK_FALSE(theorem_bound_holds(1, PolarizationType({2})));
  CHECK(theorem_bound_holds(3, PolarizationType({1, 1, 49})));
  CHECK_THROWS_AS(theorem_bound_holds(3, PolarizationType({1, 9})), InvalidParameter);
}

TEST_CASE("sample_tau is deterministic and positive") {
  const RiemannMatrix a = sample_tau(1, 7, 1.0), b = sample_tau(1, 7, 1.0);
  CHECK(a.tau() == b.tau());
  CHECK(a.imag_part()(0, 0) >= 1.0);

  const RiemannMatrix t2 = sample_tau(2, 1, 1.0);
  CHECK(t2.symmetry_residual() == 0.0);
  CHECK(t2.lambda_min() >= 1.0 - 1e-12);

  const RiemannMatrix t3 = sample_tau(3, 3, 0.5);
  const Eigen::SelfAdjointEigenSolver<RMatrix> es(t3.imag_part());
  CHECK(es.eigenvalues().minCoeff() >= 0.5 - 1e-12);
  CHECK(t3.symmetry_residual() < 1e-15);
  CHECK(std::abs(es.eigenvalues().minCoeff() - t3.lambda_min()) < 1e-12);
  CHECK_FALSE(t3.is_diagonal());
  CHECK(sample_diagonal_tau(3, 3).is_diagonal());

  CHECK_THROWS_AS(sample_tau(0, 1), InvalidParameter);
  CHECK_THROWS_AS(sample_tau(2, 1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(sample_tau(2, 1, -1.0), InvalidParameter);
}

TEST_CASE("Riemann matrix rejects asymmetric or indefinite input") {
  CMatrix t(2, 2);
  t << cplx(0, 1), cplx(0.1, 0), cplx(0.2, 0), cplx(0, 1);
  CHECK_THROWS_AS(RiemannMatrix{t}, InvalidInput);
  t << cplx(0, 1), cplx(0, 2), cplx(0, 2), cplx(0, 1);
  CHECK_THROWS_AS(RiemannMatrix{t}, InvalidInput);
}

TEST_CASE("torus point reduction") {
  TorusPoint z = TorusPoint::zero(2);
  z.p << 1.25, -0.5;
  z.q << 3.75, -2.0;
  const TorusPoint r = z.reduced();
  CHECK(r.p(0) == doctest::Approx(0.25));
  CHECK(r.p(1) == doctest::Approx(0.5));
  CHECK(r.q(0) == doctest::Approx(0.75));
  CHECK(r.q(1) == doctest::Approx(0.0));
  const TorusPoint rr = r.reduced();
  CHECK(rr.p == r.p);
  CHECK(rr.q == r.q);
  CHECK(same_point(z, r));

  const RiemannMatrix tau = sample_tau(2, 4);
  const PolarizationType D({1, 3});
  const CVector w = r.complex_value(tau, D);
  const CVector expect = tau.tau() * r.p.cast<cplx>() + CVector(Eigen::Vector2cd(1.0 * r.q(0), 3.0 * r.q(1)));
  CHECK((w - expect).norm() < 1e-14);
}

TEST_CASE("torsion points and subgroups") {
  const TorsionPoint a(6, {2}, {3});
  CHECK(a.order() == 6);
  CHECK(TorsionPoint(4, {2}, {0}).order() == 2);
  CHECK(TorsionPoint(3, {4}, {-1}) == TorsionPoint(3, {1}, {2}));

  const std::vector<TorsionPoint> gens{TorsionPoint(3, {0}, {1})};
  const auto G = generate_subgroup(gens);
  CHECK(G.size() == 3);
  CHECK(G.front() == TorsionPoint::zero(1));
  CHECK(is_subgroup(G));
  const std::vector<TorsionPoint> bad{TorsionPoint::zero(1), TorsionPoint(3, {0}, {1})};
  CHECK_FALSE(is_subgroup(bad));

  const std::vector<TorsionPoint> two{TorsionPoint(2, {1}, {0}), TorsionPoint(2, {0}, {1})};
  CHECK(generate_subgroup(two).size() == 4);
}

TEST_CASE("Weil pairing examples") {
  const PolarizationType D4({4});
  const auto x = make_k_element({1}, {0}, D4), y = make_k_element({0}, {1}, D4);
  const cplx e = weil_pairing(x, y, D4);
  CHECK(std::abs(e - cplx(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(weil_pairing(x, x, D4) - 1.0) < 1e-12);

  const PolarizationType D19({1, 9});
  const auto u = make_k_element({0, 1}, {0, 0}, D19), v = make_k_element({0, 0}, {0, 1}, D19);
  const cplx expect = std::polar(1.0, 2.0 * std::numbers::pi / 9.0);
  CHECK(std::abs(weil_pairing(u, v, D19) - expect) < 1e-12);
}

TEST_CASE("Weil pairing is bimultiplicative and alternating") {
  for (const auto& divs : std::vector<std::vector<long>>{{4}, {1, 9}, {2, 4}, {2, 6}, {1, 1, 5}}) {
    const PolarizationType D(divs);
    const auto K = k_group(D);
    CHECK(static_cast<long>(K.size()) == h0_of_type(D) * h0_of_type(D));
    std::mt19937_64 rng(static_cast<std::uint64_t>(divs.back()));
    std::uniform_int_distribution<std::size_t> pick(0, K.size() - 1);
    for (int t = 0; t < 100; ++t) {
      const auto& x = K[pick(rng)];
      const auto& x2 = K[pick(rng)];
      const auto& y = K[pick(rng)];
      const cplx lhs = weil_pairing(add(x, x2, D), y, D);
      const cplx rhs = weil_pairing(x, y, D) * weil_pairing(x2, y, D);
      CHECK(std::abs(lhs - rhs) < 1e-10);
      CHECK(std::abs(weil_pairing(x, y, D) * weil_pairing(y, x, D) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("descent data") {
  const RiemannMatrix tau = sample_tau(1, 2);
  const DescentData dd = descent_data(PolarizationType({3}), tau);
  REQUIRE(dd.H.size() == 3);
  REQUIRE(dd.H_prime.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(dd.H[i].a == std::vector<long>{0});
    CHECK(dd.H[i].q == std::vector<long>{static_cast<long>(i)});
    // tau c / 3 on B = C / (tau Z + Z)
    const TorusPoint b = dd.H_prime[i].to_point();
    CHECK(b.p(0) == doctest::Approx(static_cast<double>(i) / 3.0));
    CHECK(b.q(0) == doctest::Approx(0.0));
  }
  CHECK(is_subgroup(dd.H_prime));

  for (const auto& divs : std::vector<std::vector<long>>{{1, 9}, {2, 4}, {1, 1, 49}}) {
    const PolarizationType D(divs);
    const DescentData d = descent_data(D, sample_tau(D.genus(), 5));
    CHECK(static_cast<long>(d.H.size()) == h0_of_type(D));
    CHECK(static_cast<long>(d.H_prime.size()) == h0_of_type(D));
    CHECK(d.H.size() * d.H.size() == k_group(D).size());
    CHECK(is_subgroup(d.H_prime));
    for (const auto& x : d.H)
      for (const auto& y : d.H) CHECK(std::abs(weil_pairing(x, y, D) - 1.0) < 1e-12);
    for (std::size_t i = 0; i < d.H_prime.size(); ++i) {
      const auto& pn = d.H_prime[i].p_numerators();
      std::vector<long> c(pn.size());
      for (std::size_t k = 0; k < c.size(); ++k)
        c[k] = static_cast<long>(std::lround(d.H_prime[i].to_point().p(static_cast<Eigen::Index>(k)) *
                                             static_cast<double>(divs[k])));
      CHECK(d.sigma_index(c) == i);
    }
  }
  CHECK_THROWS_AS(descent_data(PolarizationType({1, 9}), sample_tau(1, 1)), InvalidInput);
}

TEST_CASE("residue enumeration") {
  const std::vector<long> moduli{2, 3};
  const auto r = enumerate_residues(moduli);
  REQUIRE(r.size() == 6);
  CHECK(r[0] == std::vector<long>{0, 0});
  CHECK(r[1] == std::vector<long>{0, 1});
  CHECK(r[5] == std::vector<long>{1, 2});
  std::set<std::vector<long>> uniq(r.begin(), r.end());
  CHECK(uniq.size() == 6);
}
