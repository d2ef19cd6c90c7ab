#pragma once

// Multiplication maps H^0(L)^{(x) r} -> H^0(L^r), their block decomposition over the
// dual subgroup H' of the descent A -> B = A / H, the Kummer-image span criterion, and
// the finite-subgroup span and divisor probes.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pnormal/rank.hpp"
#include "pnormal/torus.hpp"

namespace pnormal {

struct MultiplicationMapSpec {
  TorusHandle torus;  ///< A with its polarization type
  int r = 2;
  /// Either empty (plain rho_r) or r points; factor i is translated by translations[i].
  std::vector<TorusPoint> translations;
};

/// h0(L^r) = r^g prod d_i.
long multiplication_target_dim(const MultiplicationMapSpec& spec);

/// Rows of the multiplication map: symmetric monomials of the level-1 basis when all
/// translations agree, every ordered tuple otherwise.
ProductFamily multiplication_family(const MultiplicationMapSpec& spec);

/// Rank of rho_r; surjective iff rank == h0(L^r). Not gated: callers check conclusiveness.
RankReport rho_rank(const MultiplicationMapSpec& spec, const Tolerances& tol, std::uint64_t seed);

/// H^0(L) . H^0(t_x^* L) -> H^0(L^2 (x) alpha), the Pic^0 twist realized as a translation.
RankReport translated_rho_rank(const TorusHandle& torus, const TorusPoint& x, const Tolerances& tol,
                               std::uint64_t seed);

/// dim I_2 = h0 (h0 + 1) / 2 - rank rho_2. Requires a conclusive report.
long quadric_dim(long h0, const RankReport& rho2, const Tolerances& tol = {});

/// The principally polarized quotient B = C^g / (tau Z^g + Z^g).
TorusHandle quotient_torus(const DescentData& dd);

/// { theta(z - b) theta(z + b - sigma) : b in H' } on B.
ProductFamily block_family(const DescentData& dd, const TorusHandle& quotient, std::size_t sigma_index);

RankReport block_rho_rank(const DescentData& dd, std::size_t sigma_index, const Tolerances& tol,
                          std::uint64_t seed);

/// Block ranks for every sigma in H' (residue order). Expected value 2^g each.
std::vector<RankReport> block_rho_ranks(const DescentData& dd, const Tolerances& tol, std::uint64_t seed);

struct KummerSpan {
  RankReport report;
  bool spanning = false;
};

/// Span of the Kummer images b |-> t_b^* theta + t_{sigma - b}^* theta for b in `points`, read in
/// the second-order theta basis: by the addition formula
///   theta(z - b) theta(z + b - sigma) = sum_a Theta_a(2z - sigma) Theta_a(2b - sigma),
/// so the images span |t_sigma^* M^2| iff the matrix [Theta_a(2b - sigma)] has rank 2^g.
KummerSpan kummer_image_span(const TorusHandle& quotient, std::span<const TorsionPoint> points,
                             const TorsionPoint& sigma, const Tolerances& tol);

/// kummer_image_span over the whole of H' for one sigma in H'.
KummerSpan kummer_span_check(const DescentData& dd, std::size_t sigma_index, const Tolerances& tol);

struct SubgroupSpan {
  RankReport report;
  long h0 = 0;
  long order = 0;
  long base_points_excluded = 0;
  /// |G| > h0 g!
  bool hypothesis_holds = false;
  bool spanning = false;
};

/// Does the finite subgroup G span the system |L^k|? Evaluates the full basis at the points
/// of G outside the base locus and compares the rank with h0(L^k).
SubgroupSpan subgroup_span_check(const TorusHandle& torus, int level, std::span<const TorsionPoint> G,
                                 const Tolerances& tol);

struct DivisorProbe {
  long order = 0;
  long count_on_divisor = 0;
  long ambiguous = 0;  ///< points in the guard band [zero_tol, zero_guard)
  long h0 = 0;
  bool bound_ok = true;
  /// Full containment with |G| > h0 g!: impossible on a simple torus, so a tolerance problem.
  bool calibration_alarm = false;
};

/// Counts points of G on the zero divisor of s, using the translation-invariant norm
/// |s(z)| exp(-pi k |Im z|^2_{Y^{-1}}) relative to its maximum over a seeded sample.
DivisorProbe divisor_subgroup_probe(const SectionProduct& s, std::span<const TorsionPoint> G,
                                    const Tolerances& tol, std::uint64_t seed);

struct NormalityVerdict {
  PolarizationType type;
  long h0 = 0;
  long bound_rhs = 0;
  bool bound_holds = false;
  RankReport rho2{};
  bool two_normal = false;
  std::map<int, RankReport> r_reports{};
  std::map<int, bool> r_normal{};
  long dim_I2 = 0;
  std::vector<RankReport> block_ranks{};  ///< indexed by sigma in H'
  std::vector<KummerSpan> kummer{};       ///< indexed by sigma in H'
  bool genericity_assumed = true;
};

/// The whole pipeline. r_list must be drawn from {2, 3, 4}; r = 2 is always computed.
/// Throws Inconclusive naming the component whose rank could not be certified, and
/// ConsistencyError when stable verdicts contradict each other (block additivity,
/// block/Kummer agreement, the h0 > 2^g g! implication under genericity, or 2-normal
/// without r-normal).
NormalityVerdict full_check(const PolarizationType& type, const RiemannMatrix& tau, std::span<const int> r_list,
                            const Tolerances& tol, std::uint64_t seed, bool genericity_assumed = true);

}  // namespace pnormal
