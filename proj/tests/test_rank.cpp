#include <doctest.h>

#include <algorithm>
#include <random>

#include "pnormal/errors.hpp"
#include "pnormal/normality.hpp"
#include "pnormal/rank.hpp"

using namespace pnormal;

namespace {

EvaluationMatrix from_values(const CMatrix& v) {
  EvaluationMatrix m;
  m.values = v;
  m.requested = static_cast<std::size_t>(v.cols());
  m.exhaustive = true;
  return m;
}

}  // namespace

TEST_CASE("numeric rank of explicit matrices") {
  const RankReport id = numeric_rank(from_values(CMatrix::Identity(3, 3)));
  CHECK(id.rank == 3);
  CHECK(std::isinf(id.margin));
  CHECK(id.verdict_stable);

  CMatrix dup(3, 4);
  dup << 1, 2, 3, 4, 1, 2, 3, 4, 0, 1, 0, -1;
  const RankReport d = numeric_rank(from_values(dup));
  CHECK(d.rank == 2);
  CHECK(d.margin > 1e10);

  const RankReport z = numeric_rank(from_values(CMatrix::Zero(2, 3)));
  CHECK(z.rank == 0);
  CHECK(z.degenerate);
  CHECK(std::isinf(z.margin));

  CHECK_THROWS_AS(numeric_rank(from_values(dup), 0.0), InvalidParameter);
  CHECK_THROWS_AS(numeric_rank(from_values(dup), 1.5), InvalidParameter);
}

TEST_CASE("multisets") {
  CHECK(multisets(2, 2).size() == 3);
  CHECK(multisets(9, 2).size() == 45);
  CHECK(multisets(9, 3).size() == 165);
  CHECK(multisets(49, 2).size() == 1225);
  const auto m = multisets(3, 2);
  CHECK(m.front() == std::vector<std::size_t>{0, 0});
  CHECK(m.back() == std::vector<std::size_t>{2, 2});
}

TEST_CASE("evaluation matrices of theta families") {
  const auto torus = make_torus(sample_tau(1, 2), PolarizationType({3}));
  const auto basis = basis_L_power(torus, 1);
  const auto pts = sample_points(1, 10, 5);
  const EvaluationMatrix m = eval_matrix(ProductFamily::of_sections(basis), pts);
  CHECK(m.values.rows() == 3);
  CHECK(m.values.cols() == 10);
  CHECK(m.values.allFinite());
  const RankReport r = numeric_rank(m);
  CHECK(r.rank == 3);
  CHECK(r.singular_values.back() / r.singular_values.front() > 1e-6);

  const std::vector<TorusPoint> five(pts.begin(), pts.begin() + 5);
  CHECK(numeric_rank(eval_matrix(ProductFamily::of_sections({basis[1]}), five)).rank == 1);

  const std::vector<TorusPoint> same(3, pts[0]);
  CHECK_THROWS_AS(eval_matrix(ProductFamily::of_sections(basis), same), InvalidInput);
  std::vector<TorusPoint> shifted{pts[0], pts[0]};
  shifted[1].q(0) += 2.0;
  CHECK_THROWS_AS(eval_matrix(ProductFamily::of_sections(basis), shifted), InvalidInput);
}

TEST_CASE("Sym^2 of a pencil has rank 3") {
  const auto torus = make_torus(sample_tau(1, 4), PolarizationType({2}));
  const ProductFamily fam = multiplication_family(MultiplicationMapSpec{torus, 2, {}});
  CHECK(fam.size() == 3);
  const RankReport r = numeric_rank(eval_matrix(fam, sample_points(1, 12, 4)));
  CHECK(r.rank == 3);
  CHECK(r.rank < h0_of_power(torus->type, 2));
}

TEST_CASE("row scaling does not change ranks") {
  const auto torus = make_torus(sample_tau(2, 7), PolarizationType({1, 4}));
  const ProductFamily fam = multiplication_family(MultiplicationMapSpec{torus, 2, {}});
  const EvaluationMatrix base = eval_matrix(fam, sample_points(2, 40, 7));
  const RankReport r0 = numeric_rank(base);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> expo(-6.0, 6.0);
  EvaluationMatrix scaled = base;
  for (Eigen::Index i = 0; i < scaled.values.rows(); ++i) scaled.values.row(i) *= std::pow(10.0, expo(rng));
  normalize_rows(scaled);
  const RankReport r1 = numeric_rank(scaled);
  CHECK(r1.rank == r0.rank);
  for (std::size_t i = 0; i < r0.singular_values.size(); ++i)
    CHECK(std::abs(r1.singular_values[i] - r0.singular_values[i]) < 1e-10 * r0.singular_values[0]);
}

TEST_CASE("permuting sections or points leaves the report unchanged") {
  const auto torus = make_torus(sample_tau(2, 3), PolarizationType({1, 3}));
  ProductFamily fam = multiplication_family(MultiplicationMapSpec{torus, 2, {}});
  auto pts = sample_points(2, 30, 3);
  const RankReport r0 = numeric_rank(eval_matrix(fam, pts));

  std::mt19937_64 rng(3);
  std::shuffle(fam.monomials.begin(), fam.monomials.end(), rng);
  std::shuffle(pts.begin(), pts.end(), rng);
  const RankReport r1 = numeric_rank(eval_matrix(fam, pts));
  CHECK(r1.rank == r0.rank);
  CHECK(r1.rank == 6);
  for (std::size_t i = 0; i < r0.singular_values.size(); ++i)
    CHECK(std::abs(r1.singular_values[i] - r0.singular_values[i]) < 1e-10 * r0.singular_values[0]);
}

TEST_CASE("appending points never lowers the rank") {
  const auto torus = make_torus(sample_tau(2, 5), PolarizationType({1, 5}));
  const ProductFamily fam = multiplication_family(MultiplicationMapSpec{torus, 2, {}});
  const auto pts = sample_points(2, 60, 5);
  long prev = 0;
  for (std::size_t n = 2; n <= 60; n += 4) {
    const RankReport r = numeric_rank(eval_matrix(fam, pts, kDefaultThetaEpsilon, n));
    CHECK(r.extended_rank >= r.rank);
    CHECK(r.rank >= prev);
    prev = r.rank;
  }
  CHECK(prev == 15);
}

TEST_CASE("stability gate") {
  // rank 1 on the requested columns, rank 2 once the extra column is added
  CMatrix v(2, 3);
  v << 1, 1, 0, 1, 1, 1;
  EvaluationMatrix m = from_values(v);
  m.exhaustive = false;
  m.requested = 2;
  const RankReport r = numeric_rank(m);
  CHECK(r.rank == 1);
  CHECK(r.extended_rank == 2);
  CHECK_FALSE(r.verdict_stable);
  CHECK_THROWS_AS(require_conclusive(r, Tolerances{}, "test"), Inconclusive);
  try {
    require_conclusive(r, Tolerances{}, "block sigma_index=3");
  } catch (const Inconclusive& e) {
    CHECK(e.component() == "block sigma_index=3");
  }

  // a sampled matrix with no extra columns cannot vouch for itself
  m.requested = 3;
  CHECK_FALSE(numeric_rank(m).verdict_stable);

  CMatrix close(2, 2);
  close << 1, 0, 0, 1e-7;
  const RankReport c = numeric_rank(from_values(close), 1e-8);
  CHECK(c.rank == 2);
  CMatrix thin(3, 3);
  thin << 1, 0, 0, 0, 2e-8, 0, 0, 0, 5e-9;
  const RankReport t = numeric_rank(from_values(thin), 1e-8);
  CHECK(t.rank == 2);
  CHECK(t.margin < 10.0);
  CHECK_THROWS_AS(require_conclusive(t, Tolerances{}, "thin"), Inconclusive);
}

TEST_CASE("span_rank") {
  const auto A = make_torus(sample_tau(1, 11), PolarizationType({4}));
  const auto basis = basis_L_power(A, 1);
  const SpanResult full = span_rank(ProductFamily::of_sections(basis), 4, sample_points(1, 16, 1), Tolerances{}, 2);
  CHECK(full.spanning);
  const SpanResult one = span_rank(ProductFamily::of_sections({basis[0]}), 2, sample_points(1, 16, 1), Tolerances{}, 2);
  CHECK_FALSE(one.spanning);
  CHECK(one.report.rank == 1);
  CHECK_THROWS_AS(span_rank(ProductFamily::of_sections(basis), 4, sample_points(1, 8, 1), Tolerances{}, 2),
                  InvalidParameter);

  // theta(z - b) theta(z + b) over the 3-torsion of B in the tau direction
  const auto B = make_torus(sample_tau(1, 11), PolarizationType::principal(1));
  const ThetaSection theta(B, 1, {0});
  std::vector<SectionProduct> prods;
  for (long j = 0; j < 3; ++j) {
    const TorusPoint b = TorsionPoint(3, {j}, {0}).to_point();
    prods.emplace_back(std::vector<ThetaSection>{translate_section(theta, -b), translate_section(theta, b)});
  }
  const SpanResult k = span_rank(ProductFamily::of_products(prods), 2, sample_points(1, 12, 3), Tolerances{}, 4);
  CHECK(k.spanning);
  CHECK(k.report.rank == 2);
}

TEST_CASE("certified ranks are reproducible") {
  const auto torus = make_torus(sample_tau(2, 2), PolarizationType({1, 7}));
  const ProductFamily fam = multiplication_family(MultiplicationMapSpec{torus, 2, {}});
  const RankReport a = certified_rank(fam, 28, Tolerances{}, 99);
  const RankReport b = certified_rank(fam, 28, Tolerances{}, 99);
  CHECK(a.singular_values == b.singular_values);
  CHECK(a.rank == 28);
  CHECK(a.full());
  CHECK(a.verdict_stable);
  CHECK(a.sample_count == default_sample_count(28));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
}
