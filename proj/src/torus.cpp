#include "pnormal/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "pnormal/errors.hpp"

namespace pnormal {

namespace {

long mod(long x, long m) {
  long r = x % m;
  return r < 0 ? r + m : r;
}

double frac(double x) {
  double f = x - std::floor(x);
  // floor can round 1 - ulp up to exactly 1
  return f >= 1.0 ? 0.0 : f;
}

}  // namespace

// ---------------------------------------------------------------------------
// PolarizationType

PolarizationType::PolarizationType(std::vector<long> divisors) : d_(std::move(divisors)) {
  if (d_.empty()) throw InvalidParameter("polarization type needs g >= 1 divisors");
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (d_[i] < 1) throw InvalidParameter("polarization divisors must be positive");
    if (i + 1 < d_.size() && d_[i + 1] % d_[i] != 0)
      throw InvalidParameter("polarization divisors must satisfy d_i | d_{i+1}: " + to_string());
  }
}

PolarizationType PolarizationType::principal(int g) {
  if (g < 1) throw InvalidParameter("g must be >= 1");
  return PolarizationType(std::vector<long>(static_cast<std::size_t>(g), 1));
}

bool PolarizationType::is_principal() const {
  return std::all_of(d_.begin(), d_.end(), [](long d) { return d == 1; });
}

std::string PolarizationType::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < d_.size(); ++i) os << (i ? "," : "") << d_[i];
  os << ')';
  return os.str();
}

long h0_of_type(const PolarizationType& type) {
  long h = 1;
  for (long d : type.divisors()) h *= d;
  return h;
}

long theorem_bound_rhs(int g) {
  long v = 1;
  for (int i = 1; i <= g; ++i) v *= 2 * i;
  return v;
}

bool theorem_bound_holds(int g, const PolarizationType& type) {
  if (g != type.genus()) throw InvalidParameter("g does not match the length of the type");
  return h0_of_type(type) > theorem_bound_rhs(g);
}

// ---------------------------------------------------------------------------
// RiemannMatrix

RiemannMatrix::RiemannMatrix(CMatrix tau) : tau_(std::move(tau)) {
  if (tau_.rows() < 1 || tau_.rows() != tau_.cols())
    throw InvalidInput("tau must be a nonempty square matrix");
  if (!tau_.allFinite()) throw InvalidInput("tau has non-finite entries");
  if (symmetry_residual() > kSymmetryTolerance)
    throw InvalidInput("tau is not symmetric (residual " + std::to_string(symmetry_residual()) + ")");
  re_ = tau_.real();
  im_ = tau_.imag();
  // Eigen reads only the lower triangle; symmetrize so both triangles agree exactly.
  RMatrix sym = 0.5 * (im_ + im_.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
  lambda_min_ = es.eigenvalues()(0);
  if (!(lambda_min_ > 0.0)) throw InvalidInput("Im(tau) is not positive definite");
  im_inv_ = sym.llt().solve(RMatrix::Identity(sym.rows(), sym.cols()));
}

double RiemannMatrix::symmetry_residual() const { return (tau_ - tau_.transpose()).cwiseAbs().maxCoeff(); }

bool RiemannMatrix::is_diagonal() const {
  for (Eigen::Index i = 0; i < tau_.rows(); ++i)
    for (Eigen::Index j = 0; j < tau_.cols(); ++j)
      if (i != j && tau_(i, j) != cplx(0.0, 0.0)) return false;
  return true;
}

RiemannMatrix sample_tau(int g, std::uint64_t seed, double scale) {
  if (g < 1) throw InvalidParameter("sample_tau: g must be >= 1");
  if (!(scale > 0.0)) throw InvalidParameter("sample_tau: scale must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  RMatrix s(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = i; j < g; ++j) s(i, j) = s(j, i) = uni(rng);
  RMatrix q(g, g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) q(i, j) = normal(rng);
  RMatrix y = q.transpose() * q;
  y = 0.5 * (y + y.transpose());
  y.diagonal().array() += scale;

  CMatrix tau(g, g);
  tau.real() = s;
  tau.imag() = y;
  return RiemannMatrix(std::move(tau));
}

RiemannMatrix sample_diagonal_tau(int g, std::uint64_t seed, double scale) {
  if (g < 1) throw InvalidParameter("sample_diagonal_tau: g must be >= 1");
  if (!(scale > 0.0)) throw InvalidParameter("sample_diagonal_tau: scale must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix tau = CMatrix::Zero(g, g);
  for (int i = 0; i < g; ++i) {
    double n = normal(rng);
    tau(i, i) = cplx(uni(rng), scale + n * n);
  }
  return RiemannMatrix(std::move(tau));
}

// ---------------------------------------------------------------------------
// TorusPoint

TorusPoint TorusPoint::zero(int g) { return {RVector::Zero(g), RVector::Zero(g)}; }

TorusPoint TorusPoint::reduced() const {
  TorusPoint r{p, q};
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    r.p(i) = frac(p(i));
    r.q(i) = frac(q(i));
  }
  return r;
}

CVector TorusPoint::complex_value(const RiemannMatrix& tau, const PolarizationType& type) const {
  if (tau.genus() != genus() || type.genus() != genus())
    throw InvalidInput("torus point dimension does not match the torus");
  CVector z = tau.tau() * p.cast<cplx>();
  for (int i = 0; i < genus(); ++i) z(i) += static_cast<double>(type[i]) * q(i);
  return z;
}

TorusPoint TorusPoint::operator+(const TorusPoint& o) const { return {p + o.p, q + o.q}; }
TorusPoint TorusPoint::operator-(const TorusPoint& o) const { return {p - o.p, q - o.q}; }
TorusPoint TorusPoint::operator-() const { return {-p, -q}; }

bool same_point(const TorusPoint& a, const TorusPoint& b, double tol) {
  if (a.genus() != b.genus()) return false;
  auto close_mod1 = [tol](double x) {
    double f = frac(x);
    return f <= tol || 1.0 - f <= tol;
  };
  for (int i = 0; i < a.genus(); ++i)
    if (!close_mod1(a.p(i) - b.p(i)) || !close_mod1(a.q(i) - b.q(i))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// TorsionPoint

TorsionPoint::TorsionPoint(long denominator, std::vector<long> p_num, std::vector<long> q_num)
    : den_(denominator), p_num_(std::move(p_num)), q_num_(std::move(q_num)) {
  if (den_ < 1) throw InvalidInput("torsion point denominator must be positive");
  if (p_num_.size() != q_num_.size() || p_num_.empty())
    throw InvalidInput("torsion point needs g p-coordinates and g q-coordinates");
  long common = den_;
  for (auto* v : {&p_num_, &q_num_})
    for (long& x : *v) {
      x = mod(x, den_);
      common = std::gcd(common, x);
    }
  den_ /= common;
  for (auto* v : {&p_num_, &q_num_})
    for (long& x : *v) x /= common;
}

TorsionPoint TorsionPoint::zero(int g) {
  return TorsionPoint(1, std::vector<long>(static_cast<std::size_t>(g), 0),
                      std::vector<long>(static_cast<std::size_t>(g), 0));
}

TorusPoint TorsionPoint::to_point() const {
  TorusPoint t = TorusPoint::zero(genus());
  for (int i = 0; i < genus(); ++i) {
    t.p(i) = static_cast<double>(p_num_[static_cast<std::size_t>(i)]) / static_cast<double>(den_);
    t.q(i) = static_cast<double>(q_num_[static_cast<std::size_t>(i)]) / static_cast<double>(den_);
  }
  return t;
}

std::string TorsionPoint::to_string() const {
  std::ostringstream os;
  os << "p=(";
  for (std::size_t i = 0; i < p_num_.size(); ++i) os << (i ? "," : "") << p_num_[i] << '/' << den_;
  os << ") q=(";
  for (std::size_t i = 0; i < q_num_.size(); ++i) os << (i ? "," : "") << q_num_[i] << '/' << den_;
  os << ')';
  return os.str();
}

TorsionPoint TorsionPoint::operator+(const TorsionPoint& o) const {
  if (o.genus() != genus()) throw InvalidInput("torsion points of different dimension");
  long l = std::lcm(den_, o.den_);
  std::vector<long> p(p_num_.size()), q(q_num_.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = p_num_[i] * (l / den_) + o.p_num_[i] * (l / o.den_);
    q[i] = q_num_[i] * (l / den_) + o.q_num_[i] * (l / o.den_);
  }
  return TorsionPoint(l, std::move(p), std::move(q));
}

TorsionPoint TorsionPoint::operator-() const {
  std::vector<long> p(p_num_), q(q_num_);
  for (long& x : p) x = -x;
  for (long& x : q) x = -x;
  return TorsionPoint(den_, std::move(p), std::move(q));
}

namespace {

auto key_of(const TorsionPoint& t) {
  return std::tuple(t.denominator(), t.p_numerators(), t.q_numerators());
}

}  // namespace

std::vector<TorsionPoint> generate_subgroup(std::span<const TorsionPoint> generators) {
  if (generators.empty()) throw InvalidInput("generate_subgroup: no generators");
  const int g = generators.front().genus();
  std::vector<TorsionPoint> group{TorsionPoint::zero(g)};
  std::set<decltype(key_of(group.front()))> seen{key_of(group.front())};
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (const auto& gen : generators) {
      TorsionPoint next = group[i] + gen;
      if (seen.insert(key_of(next)).second) group.push_back(next);
    }
  }
  return group;
}

bool is_subgroup(std::span<const TorsionPoint> points) {
  if (points.empty()) return false;
  std::set<decltype(key_of(points.front()))> members;
  for (const auto& t : points) members.insert(key_of(t));
  if (!members.contains(key_of(TorsionPoint::zero(points.front().genus())))) return false;
  for (const auto& x : points)
    for (const auto& y : points)
      if (!members.contains(key_of(x + y))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// K(L) and the Weil form

KGroupElement make_k_element(std::vector<long> a, std::vector<long> q, const PolarizationType& type) {
  if (a.size() != q.size() || static_cast<int>(a.size()) != type.genus())
    throw InvalidInput("K(L) element dimension does not match the type");
  for (int i = 0; i < type.genus(); ++i) {
    a[static_cast<std::size_t>(i)] = mod(a[static_cast<std::size_t>(i)], type[i]);
    q[static_cast<std::size_t>(i)] = mod(q[static_cast<std::size_t>(i)], type[i]);
  }
  return {std::move(a), std::move(q)};
}

KGroupElement add(const KGroupElement& x, const KGroupElement& y, const PolarizationType& type) {
  std::vector<long> a(x.a.size()), q(x.q.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = x.a[i] + y.a[i];
    q[i] = x.q[i] + y.q[i];
  }
  return make_k_element(std::move(a), std::move(q), type);
}

TorusPoint to_point(const KGroupElement& x, const PolarizationType& type) {
  TorusPoint t = TorusPoint::zero(type.genus());
  for (int i = 0; i < type.genus(); ++i) {
    auto d = static_cast<double>(type[i]);
    t.p(i) = static_cast<double>(x.a[static_cast<std::size_t>(i)]) / d;
    t.q(i) = static_cast<double>(x.q[static_cast<std::size_t>(i)]) / d;
  }
  return t;
}

std::vector<std::vector<long>> enumerate_residues(std::span<const long> moduli) {
  std::vector<std::vector<long>> out;
  std::vector<long> c(moduli.size(), 0);
  for (;;) {
    out.push_back(c);
    std::size_t i = moduli.size();
    for (;;) {
      if (i == 0) return out;
      --i;
      if (++c[i] < moduli[i]) break;
      c[i] = 0;
    }
  }
}

std::vector<KGroupElement> k_group(const PolarizationType& type) {
  auto residues = enumerate_residues(type.divisors());
  std::vector<KGroupElement> out;
  out.reserve(residues.size() * residues.size());
  for (const auto& a : residues)
    for (const auto& q : residues) out.push_back({a, q});
  return out;
}

long weil_exponent(const KGroupElement& x, const KGroupElement& y, const PolarizationType& type) {
  const long n = type.exponent();
  long acc = 0;
  for (int i = 0; i < type.genus(); ++i) {
    auto k = static_cast<std::size_t>(i);
    long w = n / type[i];  // a q / d_i  ==  a q w / d_g
    acc += mod(x.a[k] * y.q[k] - y.a[k] * x.q[k], type[i]) * w;
  }
  return mod(acc, n);
}

cplx weil_pairing(const KGroupElement& x, const KGroupElement& y, const PolarizationType& type) {
  const double angle = 2.0 * M_PI * static_cast<double>(weil_exponent(x, y, type)) /
                       static_cast<double>(type.exponent());
  return std::polar(1.0, angle);
}

// ---------------------------------------------------------------------------
// Descent

std::vector<TorusPoint> DescentData::dual_points() const {
  std::vector<TorusPoint> pts;
  pts.reserve(H_prime.size());
  for (const auto& t : H_prime) pts.push_back(t.to_point());
  return pts;
}

std::size_t DescentData::sigma_index(std::span<const long> c) const {
  std::size_t idx = 0;
  for (int i = 0; i < base_type.genus(); ++i) {
    auto k = static_cast<std::size_t>(i);
    idx = idx * static_cast<std::size_t>(base_type[i]) + static_cast<std::size_t>(mod(c[k], base_type[i]));
  }
  return idx;
}

DescentData descent_data(const PolarizationType& type, const RiemannMatrix& tau) {
  if (type.genus() != tau.genus()) throw InvalidInput("type and tau have different dimension");
  const int g = type.genus();
  const long n = type.exponent();
  std::vector<long> zero(static_cast<std::size_t>(g), 0);
  DescentData dd{type, tau, {}, {}};
  for (const auto& c : enumerate_residues(type.divisors())) {
    dd.H.push_back({zero, c});
    // tau D^{-1} c on B has p = c_i / d_i; write it over the common denominator d_g
    std::vector<long> p(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) p[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] * (n / type[i]);
    dd.H_prime.emplace_back(n, std::move(p), zero);
  }
  return dd;
}

}  // namespace pnormal
