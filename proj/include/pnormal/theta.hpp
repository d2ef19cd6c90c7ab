#pragma once

// Theta functions with characteristics on the lattice tau Z^g + D Z^g.
//
// The level-k section with characteristic c (mod kD) is
//
//   theta_c(z) = sum_{n in Z^g} exp(pi i k m^T tau m + 2 pi i k m^T z),   m = n + (kD)^{-1} c,
//
// and it satisfies theta_c(z + D q) = theta_c(z) and
// theta_c(z + tau p) = exp(-pi i k p^T tau p - 2 pi i k p^T z) theta_c(z).
//
// Values are computed in scaled form: theta_c(z) = value * exp(pi k y^T Y^{-1} y) with
// y = Im z, Y = Im tau. The scaled value is bounded by the number of lattice terms, so
// sums stay well conditioned however far z sits from the real subspace, and the lattice
// sum can be centered on its Gaussian peak m = -Y^{-1} y.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnormal/torus.hpp"

namespace pnormal {

inline constexpr double kDefaultThetaEpsilon = 1e-12;

/// A (tau, D) pair shared by every section living on that torus.
struct PolarizedTorus {
  RiemannMatrix tau;
  PolarizationType type;

  int genus() const { return tau.genus(); }
};

using TorusHandle = std::shared_ptr<const PolarizedTorus>;

TorusHandle make_torus(RiemannMatrix tau, PolarizationType type);

/// Section theta_c of L^k, optionally pulled back by a translation: s(z) = theta_c(z + x).
class ThetaSection {
 public:
  /// The characteristic is reduced mod kD; the translation is kept as given.
  ThetaSection(TorusHandle torus, int level, std::vector<long> characteristic,
               std::optional<TorusPoint> translation = std::nullopt);

  const TorusHandle& torus() const { return torus_; }
  int level() const { return level_; }
  const std::vector<long>& characteristic() const { return c_; }
  const TorusPoint& translation() const { return x_; }
  bool translated() const;
  /// Human-readable (level, characteristic, translation) triple.
  std::string id() const;

 private:
  TorusHandle torus_;
  int level_;
  std::vector<long> c_;
  TorusPoint x_;
};

/// The section evaluated at z + x.
ThetaSection translate_section(const ThetaSection& s, const TorusPoint& x);

/// Sections theta_c for c in Z^g mod kD (residue order): a basis of H^0(L^k).
std::vector<ThetaSection> basis_L_power(const TorusHandle& torus, int k);

/// h0(L^k) = k^g prod d_i.
long h0_of_power(const PolarizationType& type, int k);

struct TruncationPlan {
  double radius = 0.0;
  double epsilon = 0.0;
  double tail_bound = 0.0;
  long lattice_points = 0;  ///< points of Z^g inside the ball of this radius about the origin
};

/// Upper bound for sum_{|m| > R} exp(-pi k lambda |m|^2 + 2 pi k |m| z_bound) over any
/// translate of Z^g. Shell j (R + j < |m| <= R + j + 1) has at most (2(R + j + 1) + 1)^g
/// points, and for R >= z_bound / lambda the summand is largest on the inner sphere.
double gaussian_tail_bound(int g, int k, double lambda_min, double z_bound, double radius);

/// Smallest radius on a 1/16 grid whose tail bound is below epsilon.
TruncationPlan truncation_plan(const RiemannMatrix& tau, int k, double z_bound, double epsilon);

/// theta(z) = value * exp(log_scale).
struct ScaledValue {
  cplx value;
  double log_scale = 0.0;

  cplx raw() const { return value * std::exp(log_scale); }
  ScaledValue& operator*=(const ScaledValue& o) {
    value *= o.value;
    log_scale += o.log_scale;
    return *this;
  }
};

/// Scaled evaluation at a complex point. The plan must be computed for the section's level
/// with z_bound = 0 (the sum is centered); epsilon bounds the absolute error of .value.
ScaledValue theta_eval_scaled(const ThetaSection& s, const CVector& z, const TruncationPlan& plan);

/// Plain evaluation. epsilon is the absolute error in units of exp(pi k y^T Y^{-1} y),
/// the natural size of theta at height y = Im(z + x).
cplx theta_eval(const ThetaSection& s, const CVector& z, double epsilon = kDefaultThetaEpsilon);
cplx theta_eval(const ThetaSection& s, const TorusPoint& z, double epsilon = kDefaultThetaEpsilon);

/// Evaluation with an explicit truncation radius (convergence certificates compare R and 2R).
ScaledValue theta_eval_with_radius(const ThetaSection& s, const CVector& z, double radius);

/// exp(-pi i k p^T tau p - 2 pi i k p^T z): theta(z + tau p) = factor * theta(z).
cplx automorphy_factor(const RiemannMatrix& tau, int k, const RVector& p, const CVector& z);

/// Pointwise product of sections on a common torus.
class SectionProduct {
 public:
  explicit SectionProduct(std::vector<ThetaSection> factors);
  SectionProduct(const ThetaSection& s) : SectionProduct(std::vector<ThetaSection>{s}) {}  // NOLINT

  const std::vector<ThetaSection>& factors() const { return factors_; }
  const TorusHandle& torus() const { return factors_.front().torus(); }
  int total_level() const { return total_level_; }
  /// h0 of the bundle the product is a section of: (total level)^g prod d_i.
  long h0() const;
  std::string id() const;

  ScaledValue eval_scaled(const CVector& z, double epsilon = kDefaultThetaEpsilon) const;

 private:
  std::vector<ThetaSection> factors_;
  int total_level_ = 0;
};

}  // namespace pnormal
