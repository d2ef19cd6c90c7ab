#include "pnormal/normality.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pnormal/errors.hpp"

namespace pnormal {

namespace {

// Seed streams for independent sub-computations of full_check.
enum Stream : std::uint64_t { kRho = 1, kBlock = 2 };

long int_pow(long b, int e) {
  long v = 1;
  for (int i = 0; i < e; ++i) v *= b;
  return v;
}

long factorial(int g) {
  long v = 1;
  for (int i = 2; i <= g; ++i) v *= i;
  return v;
}

std::vector<std::vector<std::size_t>> ordered_tuples(std::size_t n, int r) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(static_cast<std::size_t>(r), 0);
  for (;;) {
    out.push_back(cur);
    auto i = static_cast<std::ptrdiff_t>(r) - 1;
    while (i >= 0 && ++cur[static_cast<std::size_t>(i)] == n) cur[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) return out;
  }
}

bool all_equal(const std::vector<TorusPoint>& pts) {
  for (const auto& p : pts)
    if (p.p != pts.front().p || p.q != pts.front().q) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// rho_r

long multiplication_target_dim(const MultiplicationMapSpec& spec) { return h0_of_power(spec.torus->type, spec.r); }

ProductFamily multiplication_family(const MultiplicationMapSpec& spec) {
  if (!spec.torus) throw InvalidInput("multiplication map without a torus");
  if (spec.r < 2) throw InvalidParameter("multiplication map needs r >= 2");
  if (!spec.translations.empty() && static_cast<int>(spec.translations.size()) != spec.r)
    throw InvalidInput("multiplication map needs exactly r translations");

  const auto basis = basis_L_power(spec.torus, 1);
  const std::size_t h0 = basis.size();
  ProductFamily family;
  if (spec.translations.empty() || all_equal(spec.translations)) {
    for (const auto& s : basis)
      family.factors.push_back(spec.translations.empty() ? s : translate_section(s, spec.translations.front()));
    family.monomials = multisets(h0, spec.r);
    return family;
  }
  // factor block i holds the basis translated by translations[i]
  for (const auto& x : spec.translations)
    for (const auto& s : basis) family.factors.push_back(translate_section(s, x));
  for (auto tuple : ordered_tuples(h0, spec.r)) {
    for (std::size_t i = 0; i < tuple.size(); ++i) tuple[i] += i * h0;
    family.monomials.push_back(std::move(tuple));
  }
  return family;
}

RankReport rho_rank(const MultiplicationMapSpec& spec, const Tolerances& tol, std::uint64_t seed) {
  return certified_rank(multiplication_family(spec), multiplication_target_dim(spec), tol, seed);
}

RankReport translated_rho_rank(const TorusHandle& torus, const TorusPoint& x, const Tolerances& tol,
                               std::uint64_t seed) {
  MultiplicationMapSpec spec{torus, 2, {TorusPoint::zero(torus->genus()), x}};
  return rho_rank(spec, tol, seed);
}

long quadric_dim(long h0, const RankReport& rho2, const Tolerances& tol) {
  require_conclusive(rho2, tol, "quadric_dim");
  return h0 * (h0 + 1) / 2 - rho2.rank;
}

// ---------------------------------------------------------------------------
// Blocks over H'

TorusHandle quotient_torus(const DescentData& dd) {
  return make_torus(dd.tau, PolarizationType::principal(dd.tau.genus()));
}

ProductFamily block_family(const DescentData& dd, const TorusHandle& quotient, std::size_t sigma_index) {
  if (sigma_index >= dd.H_prime.size()) throw InvalidParameter("sigma index out of range");
  const int g = dd.tau.genus();
  const ThetaSection theta(quotient, 1, std::vector<long>(static_cast<std::size_t>(g), 0));
  const TorusPoint sigma = dd.H_prime[sigma_index].to_point();
  ProductFamily family;
  for (const auto& bt : dd.H_prime) {
    const TorusPoint b = bt.to_point();
    family.factors.push_back(translate_section(theta, -b));
    family.factors.push_back(translate_section(theta, b - sigma));
    family.monomials.push_back({family.factors.size() - 2, family.factors.size() - 1});
  }
  return family;
}

RankReport block_rho_rank(const DescentData& dd, std::size_t sigma_index, const Tolerances& tol,
                          std::uint64_t seed) {
  const auto quotient = quotient_torus(dd);
  return certified_rank(block_family(dd, quotient, sigma_index), int_pow(2, dd.tau.genus()), tol, seed);
}

std::vector<RankReport> block_rho_ranks(const DescentData& dd, const Tolerances& tol, std::uint64_t seed) {
  const auto quotient = quotient_torus(dd);
  const long expected = int_pow(2, dd.tau.genus());
  std::vector<RankReport> out;
  out.reserve(dd.H_prime.size());
  for (std::size_t i = 0; i < dd.H_prime.size(); ++i)
    out.push_back(certified_rank(block_family(dd, quotient, i), expected, tol, derive_seed(seed, kBlock, i)));
  return out;
}

// ---------------------------------------------------------------------------
// Kummer images and finite point sets

KummerSpan kummer_image_span(const TorusHandle& quotient, std::span<const TorsionPoint> points,
                             const TorsionPoint& sigma, const Tolerances& tol) {
  if (!quotient->type.is_principal()) throw InvalidInput("Kummer images live on a principally polarized torus");
  if (points.empty()) throw InvalidInput("kummer_image_span: no points");
  // a fixed half of the chosen representative of sigma
  const TorsionPoint half(2 * sigma.denominator(), sigma.p_numerators(), sigma.q_numerators());
  std::vector<TorusPoint> shifted;
  shifted.reserve(points.size());
  for (const auto& b : points) shifted.push_back(b.to_point() - half.to_point());

  const auto second_order = basis_L_power(quotient, 2);
  EvaluationMatrix m = eval_matrix(ProductFamily::of_sections(second_order), shifted, tol.theta_epsilon);
  m.exhaustive = true;
  KummerSpan out;
  out.report = numeric_rank(m, tol.rank_rel_tol);
  out.report.expected = static_cast<long>(second_order.size());
  out.spanning = out.report.rank == out.report.expected;
  return out;
}

KummerSpan kummer_span_check(const DescentData& dd, std::size_t sigma_index, const Tolerances& tol) {
  if (sigma_index >= dd.H_prime.size()) throw InvalidParameter("sigma index out of range");
  return kummer_image_span(quotient_torus(dd), dd.H_prime, dd.H_prime[sigma_index], tol);
}

SubgroupSpan subgroup_span_check(const TorusHandle& torus, int level, std::span<const TorsionPoint> G,
                                 const Tolerances& tol) {
  if (G.empty() || !is_subgroup(G)) throw InvalidInput("subgroup_span_check: point set is not a subgroup");
  const int g = torus->genus();
  for (const auto& t : G)
    if (t.genus() != g) throw InvalidInput("subgroup_span_check: point has the wrong dimension");

  const auto basis = basis_L_power(torus, level);
  const auto family = ProductFamily::of_sections(basis);
  std::vector<TorusPoint> pts;
  for (const auto& t : G) pts.push_back(t.to_point());

  // Base locus: columns where every section is negligible against the largest entry.
  EvaluationMatrix probe = eval_matrix(family, pts, tol.theta_epsilon);
  CMatrix unscaled = probe.values;
  for (Eigen::Index i = 0; i < unscaled.rows(); ++i) unscaled.row(i) *= probe.row_scale[static_cast<std::size_t>(i)];
  const double global = unscaled.cwiseAbs().maxCoeff();
  std::vector<TorusPoint> kept;
  for (Eigen::Index j = 0; j < unscaled.cols(); ++j)
    if (unscaled.col(j).cwiseAbs().maxCoeff() >= tol.zero_tol * global) kept.push_back(pts[static_cast<std::size_t>(j)]);

  SubgroupSpan out;
  out.h0 = static_cast<long>(basis.size());
  out.order = static_cast<long>(G.size());
  out.base_points_excluded = static_cast<long>(pts.size() - kept.size());
  out.hypothesis_holds = out.order > out.h0 * factorial(g);
  if (kept.empty()) throw DegenerateInput("subgroup_span_check: every point of G is in the base locus");

  EvaluationMatrix m = eval_matrix(family, kept, tol.theta_epsilon);
  m.exhaustive = true;
  out.report = numeric_rank(m, tol.rank_rel_tol);
  out.report.expected = out.h0;
  out.spanning = out.report.rank == out.h0;
  return out;
}

DivisorProbe divisor_subgroup_probe(const SectionProduct& s, std::span<const TorsionPoint> G, const Tolerances& tol,
                                    std::uint64_t seed) {
  if (G.empty() || !is_subgroup(G)) throw InvalidInput("divisor_subgroup_probe: point set is not a subgroup");
  const PolarizedTorus& torus = *s.torus();
  const int g = torus.genus();

  auto norm_at = [&](const TorusPoint& t) {
    return std::abs(s.eval_scaled(t.complex_value(torus.tau, torus.type), tol.theta_epsilon).value);
  };
  std::vector<double> on_g;
  double sup = 0.0;
  for (const auto& t : G) {
    on_g.push_back(norm_at(t.to_point()));
    sup = std::max(sup, on_g.back());
  }
  for (const auto& t : sample_points(g, 64, seed)) sup = std::max(sup, norm_at(t));

  DivisorProbe out;
  out.order = static_cast<long>(G.size());
  out.h0 = s.h0();
  for (double v : on_g) {
    if (v < tol.zero_tol * sup)
      ++out.count_on_divisor;
    else if (v < tol.zero_guard * sup)
      ++out.ambiguous;
  }
  out.bound_ok = out.count_on_divisor < out.order || out.order <= out.h0 * factorial(g);
  out.calibration_alarm = !out.bound_ok;
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

NormalityVerdict full_check(const PolarizationType& type, const RiemannMatrix& tau, std::span<const int> r_list,
                            const Tolerances& tol, std::uint64_t seed, bool genericity_assumed) {
  const int g = type.genus();
  if (tau.genus() != g) throw InvalidInput("type and tau have different dimension");
  std::vector<int> rs{2};
  for (int r : r_list) {
    if (r < 2 || r > 4) throw InvalidParameter("r must be one of 2, 3, 4");
    if (std::find(rs.begin(), rs.end(), r) == rs.end()) rs.push_back(r);
  }
  std::sort(rs.begin(), rs.end());

  NormalityVerdict v{type};
  v.h0 = h0_of_type(type);
  v.bound_rhs = theorem_bound_rhs(g);
  v.bound_holds = theorem_bound_holds(g, type);
  v.genericity_assumed = genericity_assumed;

  const auto torus = make_torus(tau, type);
  for (int r : rs) {
    RankReport rep = rho_rank(MultiplicationMapSpec{torus, r, {}}, tol, derive_seed(seed, kRho, static_cast<std::uint64_t>(r)));
    require_conclusive(rep, tol, "rho_" + std::to_string(r));
    v.r_normal[r] = rep.full();
    v.r_reports.emplace(r, std::move(rep));
  }
  v.rho2 = v.r_reports.at(2);
  v.two_normal = v.r_normal.at(2);
  v.dim_I2 = quadric_dim(v.h0, v.rho2, tol);

  const DescentData dd = descent_data(type, tau);
  v.block_ranks = block_rho_ranks(dd, tol, seed);
  for (std::size_t i = 0; i < v.block_ranks.size(); ++i) {
    require_conclusive(v.block_ranks[i], tol, "block sigma_index=" + std::to_string(i));
    v.kummer.push_back(kummer_span_check(dd, i, tol));
    require_conclusive(v.kummer.back().report, tol, "kummer sigma_index=" + std::to_string(i));
  }

  std::ostringstream problems;
  long block_sum = 0;
  bool all_blocks_full = true, all_kummer = true;
  for (std::size_t i = 0; i < v.block_ranks.size(); ++i) {
    block_sum += v.block_ranks[i].rank;
    all_blocks_full = all_blocks_full && v.block_ranks[i].full();
    all_kummer = all_kummer && v.kummer[i].spanning;
    if (v.block_ranks[i].full() != v.kummer[i].spanning)
      problems << "block " << i << " rank " << v.block_ranks[i].rank << " disagrees with its Kummer span check; ";
  }
  if (block_sum != v.rho2.rank)
    problems << "rank rho_2 = " << v.rho2.rank << " but the blocks sum to " << block_sum << "; ";
  if (v.two_normal != all_blocks_full) problems << "2-normality disagrees with the block verdicts; ";
  if (v.two_normal != all_kummer) problems << "2-normality disagrees with the Kummer span checks; ";
  if (genericity_assumed && v.bound_holds && !v.two_normal)
    problems << "h0 = " << v.h0 << " > " << v.bound_rhs << " on a generic tau but rho_2 has rank " << v.rho2.rank
             << " < " << v.rho2.expected << "; ";
  if (v.two_normal)
    for (const auto& [r, ok] : v.r_normal)
      if (!ok) problems << "2-normal but rho_" << r << " is not surjective; ";
  if (!problems.str().empty())
    throw ConsistencyError("full_check " + type.to_string() + ": " + problems.str());
  return v;
}

}  // namespace pnormal
