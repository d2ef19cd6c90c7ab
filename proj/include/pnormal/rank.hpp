#pragma once

// Numeric ranks of families of sections, with singular-value margins and a
// re-sampling stability gate.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnormal/theta.hpp"

namespace pnormal {

struct Tolerances {
  double theta_epsilon = kDefaultThetaEpsilon;
  double rank_rel_tol = 1e-8;
  double zero_tol = 1e-6;
  /// Upper edge of the ambiguous band for zero detection.
  double zero_guard = 1e-4;
  /// Margins below this make a verdict inconclusive.
  double min_margin = 10.0;
};

/// Rows are monomials in a shared list of factor sections: row i is the pointwise
/// product of factors[monomials[i][0]], factors[monomials[i][1]], ...
/// Each factor is evaluated once per point however many rows use it.
struct ProductFamily {
  std::vector<ThetaSection> factors;
  std::vector<std::vector<std::size_t>> monomials;

  static ProductFamily of_sections(std::vector<ThetaSection> sections);
  static ProductFamily of_products(std::span<const SectionProduct> products);

  std::size_t size() const { return monomials.size(); }
  const TorusHandle& torus() const { return factors.front().torus(); }
  std::string row_id(std::size_t i) const;
};

/// Multisets of size r drawn from {0, ..., n-1}, in lexicographic order.
std::vector<std::vector<std::size_t>> multisets(std::size_t n, int r);

struct EvaluationMatrix {
  /// Scaled section values, each row divided by its sup-norm. The scaled form differs from
  /// plain values by a positive factor per point times a constant per row, so ranks agree.
  CMatrix values;
  std::vector<std::string> row_ids;
  std::vector<TorusPoint> points;
  std::vector<double> row_scale;  ///< sup-norm each row was divided by (0 for a zero row)
  /// The first `requested` columns carry the verdict; extra columns are the stability check.
  std::size_t requested = 0;
  /// The points are the whole finite set under study, so there is nothing left to resample.
  bool exhaustive = false;
};

EvaluationMatrix eval_matrix(const ProductFamily& family, std::span<const TorusPoint> points,
                             double epsilon = kDefaultThetaEpsilon, std::size_t requested = 0);

/// Divides each row by its sup-norm (recorded in row_scale). Applied by eval_matrix.
void normalize_rows(EvaluationMatrix& m);

struct RankReport {
  long rank = 0;
  long expected = -1;  ///< -1 when the caller has no expectation
  std::vector<double> singular_values;
  double margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::size_t sample_count = 0;
  long extended_rank = 0;
  bool verdict_stable = false;
  bool degenerate = false;

  bool full() const { return expected >= 0 && rank == expected; }
  bool conclusive(double min_margin) const { return verdict_stable && margin >= min_margin; }
};

RankReport numeric_rank(const EvaluationMatrix& m, double rel_tol = 1e-8);

/// Throws Inconclusive naming `component` unless the report is stable with margin >= min_margin.
void require_conclusive(const RankReport& report, const Tolerances& tol, std::string_view component);

/// Uniform points of the fundamental domain, p, q in [0, 1)^g.
std::vector<TorusPoint> sample_points(int g, std::size_t count, std::uint64_t seed);

/// 2 ambient + 8.
std::size_t default_sample_count(std::size_t ambient);

/// Rank of the family at default_sample_count(expected) seeded points, re-checked with 50% more.
RankReport certified_rank(const ProductFamily& family, long expected, const Tolerances& tol,
                          std::uint64_t seed);

struct SpanResult {
  RankReport report;
  bool spanning = false;
};

/// Span dimension of the family at the given points (at least ambient_dim + 8), re-checked
/// with 50% more seeded points. Throws Inconclusive when the verdict is not stable.
SpanResult span_rank(const ProductFamily& family, long ambient_dim, std::span<const TorusPoint> points,
                     const Tolerances& tol, std::uint64_t extension_seed);

/// Deterministic seed derivation for independent sub-computations.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace pnormal
