#pragma once

// Polarized complex tori A = C^g / (tau Z^g + D Z^g) in explicit coordinates,
// together with the finite group data used by the isogeny descent.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pnormal {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Elementary divisors (d_1 | d_2 | ... | d_g) of a polarization.
class PolarizationType {
 public:
  explicit PolarizationType(std::vector<long> divisors);

  static PolarizationType principal(int g);

  int genus() const { return static_cast<int>(d_.size()); }
  const std::vector<long>& divisors() const { return d_; }
  long operator[](int i) const { return d_[static_cast<std::size_t>(i)]; }
  /// d_g; every element of K(L) has order dividing it.
  long exponent() const { return d_.back(); }
  bool is_principal() const;
  std::string to_string() const;

  bool operator==(const PolarizationType&) const = default;

 private:
  std::vector<long> d_;
};

/// Dimension of the space of sections: the product of the divisors.
long h0_of_type(const PolarizationType& type);

/// 2^g * g!
long theorem_bound_rhs(int g);

/// h0(L) > 2^g g!  (strict).
bool theorem_bound_holds(int g, const PolarizationType& type);

/// Symmetric g x g complex matrix with positive definite imaginary part.
/// Caches Im(tau)^{-1} and the smallest eigenvalue of Im(tau).
class RiemannMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit RiemannMatrix(CMatrix tau);

  int genus() const { return static_cast<int>(tau_.rows()); }
  const CMatrix& tau() const { return tau_; }
  const RMatrix& real_part() const { return re_; }
  const RMatrix& imag_part() const { return im_; }
  const RMatrix& imag_inverse() const { return im_inv_; }
  double lambda_min() const { return lambda_min_; }
  double symmetry_residual() const;
  /// All off-diagonal entries exactly zero: a product of elliptic curves.
  bool is_diagonal() const;

 private:
  CMatrix tau_;
  RMatrix re_, im_, im_inv_;
  double lambda_min_ = 0.0;
};

/// tau = S + i (Q^T Q + scale I), S symmetric uniform in [-1/2, 1/2], Q standard normal.
RiemannMatrix sample_tau(int g, std::uint64_t seed, double scale = 1.0);

/// Diagonal tau (a product of elliptic curves, never simple for g >= 2).
/// Only meant as a labeled negative control.
RiemannMatrix sample_diagonal_tau(int g, std::uint64_t seed, double scale = 1.0);

/// A point tau p + D q of a torus, stored in lattice coordinates (p, q).
/// The lattice (which D) is implied by the torus the point is used on.
struct TorusPoint {
  RVector p;
  RVector q;

  static TorusPoint zero(int g);
  int genus() const { return static_cast<int>(p.size()); }
  /// Representative with p, q in [0, 1).
  TorusPoint reduced() const;
  CVector complex_value(const RiemannMatrix& tau, const PolarizationType& type) const;

  TorusPoint operator+(const TorusPoint& o) const;
  TorusPoint operator-(const TorusPoint& o) const;
  TorusPoint operator-() const;
};

/// Equality on the torus: coordinates agree modulo integers to within tol.
bool same_point(const TorusPoint& a, const TorusPoint& b, double tol = 1e-12);

/// A torsion point with exact rational coordinates p = a / N, q = b / N (mod 1).
/// Kept in lowest terms so that equality is plain integer comparison.
class TorsionPoint {
 public:
  TorsionPoint(long denominator, std::vector<long> p_num, std::vector<long> q_num);

  static TorsionPoint zero(int g);

  int genus() const { return static_cast<int>(p_num_.size()); }
  long denominator() const { return den_; }
  const std::vector<long>& p_numerators() const { return p_num_; }
  const std::vector<long>& q_numerators() const { return q_num_; }
  /// Order of the point in the torus (equal to the reduced denominator).
  long order() const { return den_; }
  TorusPoint to_point() const;
  std::string to_string() const;

  TorsionPoint operator+(const TorsionPoint& o) const;
  TorsionPoint operator-() const;
  TorsionPoint operator-(const TorsionPoint& o) const { return *this + (-o); }
  bool operator==(const TorsionPoint&) const = default;

 private:
  long den_;
  std::vector<long> p_num_, q_num_;
};

/// Closure of the generators under addition; the result starts with zero and
/// is ordered by discovery (breadth first over the generator list).
std::vector<TorsionPoint> generate_subgroup(std::span<const TorsionPoint> generators);

/// Nonempty, contains zero, closed under addition (hence a finite subgroup).
bool is_subgroup(std::span<const TorsionPoint> points);

/// Element of K(L) = { tau D^{-1} a + q : a, q in Z^g mod D }.
struct KGroupElement {
  std::vector<long> a;  ///< tau-direction component
  std::vector<long> q;  ///< real-direction component

  bool operator==(const KGroupElement&) const = default;
};

KGroupElement make_k_element(std::vector<long> a, std::vector<long> q, const PolarizationType& type);
KGroupElement add(const KGroupElement& x, const KGroupElement& y, const PolarizationType& type);
/// The point tau D^{-1} a + q written in the lattice coordinates of A.
TorusPoint to_point(const KGroupElement& x, const PolarizationType& type);
/// Every element of K(L), a-major then q, each in residue order.
std::vector<KGroupElement> k_group(const PolarizationType& type);

/// Exponent n with e(x, y) = exp(2 pi i n / d_g), n in [0, d_g).
long weil_exponent(const KGroupElement& x, const KGroupElement& y, const PolarizationType& type);
/// exp(2 pi i (a_x^T D^{-1} q_y - a_y^T D^{-1} q_x)).
cplx weil_pairing(const KGroupElement& x, const KGroupElement& y, const PolarizationType& type);

/// Every c in Z^g with 0 <= c_i < moduli_i, last coordinate varying fastest.
std::vector<std::vector<long>> enumerate_residues(std::span<const long> moduli);

/// Quotient of A by the real-direction maximal isotropic subgroup H.
/// B = C^g / (tau Z^g + Z^g) carries the principal polarization; H' is the
/// subgroup { tau D^{-1} c } of B, indexed by c in residue order.
struct DescentData {
  PolarizationType base_type;
  RiemannMatrix tau;
  std::vector<KGroupElement> H;
  std::vector<TorsionPoint> H_prime;  ///< coordinates on B

  std::vector<TorusPoint> dual_points() const;
  /// Index of c (reduced mod D) in H_prime.
  std::size_t sigma_index(std::span<const long> c) const;
};

DescentData descent_data(const PolarizationType& type, const RiemannMatrix& tau);

}  // namespace pnormal
