#include "pnormal/theta.hpp"

#include <cfloat>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "pnormal/errors.hpp"

namespace pnormal {

namespace {

long mod(long x, long m) {
  long r = x % m;
  return r < 0 ? r + m : r;
}

// Below this the scaled sum cannot be resolved in double precision.
constexpr double kEpsilonFloor = 64.0 * DBL_EPSILON;

void check_point(const CVector& z, int g) {
  if (z.size() != g) throw InvalidInput("evaluation point has the wrong dimension");
  if (!z.allFinite()) throw InvalidInput("evaluation point is not finite");
}

// Calls visit(n) for every n in Z^g with |n + t| <= radius.
template <class Visit>
void for_each_in_ball(const RVector& t, double radius, Visit&& visit) {
  const auto g = t.size();
  Eigen::VectorXd n(g);
  std::function<void(Eigen::Index, double)> rec = [&](Eigen::Index i, double r2) {
    if (i == g) {
      visit(n);
      return;
    }
    const double r = std::sqrt(std::max(r2, 0.0));
    const double lo = std::ceil(-t(i) - r);
    const double hi = std::floor(-t(i) + r);
    for (double v = lo; v <= hi; v += 1.0) {
      n(i) = v;
      const double off = v + t(i);
      rec(i + 1, r2 - off * off);
    }
  };
  rec(0, radius * radius);
}

}  // namespace

TorusHandle make_torus(RiemannMatrix tau, PolarizationType type) {
  if (tau.genus() != type.genus()) throw InvalidInput("tau and polarization type have different dimension");
  return std::make_shared<const PolarizedTorus>(PolarizedTorus{std::move(tau), std::move(type)});
}

// ---------------------------------------------------------------------------
// ThetaSection

ThetaSection::ThetaSection(TorusHandle torus, int level, std::vector<long> characteristic,
                           std::optional<TorusPoint> translation)
    : torus_(std::move(torus)), level_(level), c_(std::move(characteristic)) {
  if (!torus_) throw InvalidInput("section without a torus");
  const int g = torus_->genus();
  if (level_ < 1) throw InvalidParameter("section level must be >= 1");
  if (static_cast<int>(c_.size()) != g) throw InvalidInput("characteristic has the wrong dimension");
  for (int i = 0; i < g; ++i) {
    auto k = static_cast<std::size_t>(i);
    c_[k] = mod(c_[k], static_cast<long>(level_) * torus_->type[i]);
  }
  x_ = translation.value_or(TorusPoint::zero(g));
  if (x_.genus() != g) throw InvalidInput("translation has the wrong dimension");
  if (!x_.p.allFinite() || !x_.q.allFinite()) throw InvalidInput("translation is not finite");
}

bool ThetaSection::translated() const { return !(x_.p.isZero(0.0) && x_.q.isZero(0.0)); }

std::string ThetaSection::id() const {
  std::ostringstream os;
  os << "k=" << level_ << " c=(";
  for (std::size_t i = 0; i < c_.size(); ++i) os << (i ? "," : "") << c_[i];
  os << ')';
  if (translated()) {
    os.precision(6);
    os << " x=p(";
    for (Eigen::Index i = 0; i < x_.p.size(); ++i) os << (i ? "," : "") << x_.p(i);
    os << ")q(";
    for (Eigen::Index i = 0; i < x_.q.size(); ++i) os << (i ? "," : "") << x_.q(i);
    os << ')';
  }
  return os.str();
}

ThetaSection translate_section(const ThetaSection& s, const TorusPoint& x) {
  return ThetaSection(s.torus(), s.level(), s.characteristic(), s.translation() + x);
}

long h0_of_power(const PolarizationType& type, int k) {
  long h = h0_of_type(type);
  for (int i = 0; i < type.genus(); ++i) h *= k;
  return h;
}

std::vector<ThetaSection> basis_L_power(const TorusHandle& torus, int k) {
  if (k < 1) throw InvalidParameter("basis_L_power: k must be >= 1");
  std::vector<long> moduli = torus->type.divisors();
  for (long& m : moduli) m *= k;
  std::vector<ThetaSection> out;
  for (auto& c : enumerate_residues(moduli)) out.emplace_back(torus, k, std::move(c));
  return out;
}

// ---------------------------------------------------------------------------
// Truncation

double gaussian_tail_bound(int g, int k, double lambda_min, double z_bound, double radius) {
  if (radius * lambda_min < z_bound) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int j = 0; j < 100000; ++j) {
    const double r = radius + j;
    const double term = std::pow(2.0 * (r + 1.0) + 1.0, g) *
                        std::exp(-M_PI * k * lambda_min * r * r + 2.0 * M_PI * k * r * z_bound);
    sum += term;
    if (term == 0.0 || term < sum * 1e-18) break;
  }
  return sum;
}

TruncationPlan truncation_plan(const RiemannMatrix& tau, int k, double z_bound, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParameter("truncation_plan: epsilon must be positive");
  if (k < 1) throw InvalidParameter("truncation_plan: level must be >= 1");
  if (!(z_bound >= 0.0) || !std::isfinite(z_bound)) throw InvalidParameter("truncation_plan: bad z_bound");
  const int g = tau.genus();
  const double lambda = tau.lambda_min();
  constexpr double kStep = 1.0 / 16.0;
  double radius = std::ceil(z_bound / lambda / kStep) * kStep;
  double bound = gaussian_tail_bound(g, k, lambda, z_bound, radius);
  while (!(bound < epsilon)) {
    radius += kStep;
    bound = gaussian_tail_bound(g, k, lambda, z_bound, radius);
  }
  TruncationPlan plan{radius, epsilon, bound, 0};
  for_each_in_ball(RVector::Zero(g), radius, [&](const RVector&) { ++plan.lattice_points; });
  return plan;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

ScaledValue eval_core(const ThetaSection& s, const CVector& z, double radius) {
  const PolarizedTorus& torus = *s.torus();
  const RiemannMatrix& tau = torus.tau;
  const int g = torus.genus();
  check_point(z, g);
  const double k = s.level();

  CVector w = z + s.translation().complex_value(tau, torus.type);
  RVector y = w.imag();
  RVector x = w.real();
  // theta is D-periodic in the real direction; reducing keeps the phases small
  for (int i = 0; i < g; ++i) {
    const auto d = static_cast<double>(torus.type[i]);
    x(i) -= d * std::floor(x(i) / d);
  }
  const RVector u = tau.imag_inverse() * y;
  RVector shift(g);
  for (int i = 0; i < g; ++i)
    shift(i) = static_cast<double>(s.characteristic()[static_cast<std::size_t>(i)]) /
               (k * static_cast<double>(torus.type[i]));
  const RVector t = shift + u;
  const RMatrix& Y = tau.imag_part();
  const RMatrix& X = tau.real_part();

  cplx sum = 0.0;
  for_each_in_ball(t, radius, [&](const RVector& n) {
    const RVector v = n + t;
    const RVector m = n + shift;
    const double re = -M_PI * k * v.dot(Y * v);
    const double im = M_PI * k * m.dot(X * m) + 2.0 * M_PI * k * m.dot(x);
    sum += std::polar(std::exp(re), im);
  });
  return {sum, M_PI * k * y.dot(u)};
}

}  // namespace

ScaledValue theta_eval_scaled(const ThetaSection& s, const CVector& z, const TruncationPlan& plan) {
  if (plan.epsilon < kEpsilonFloor)
    throw PrecisionUnachievable("theta epsilon " + std::to_string(plan.epsilon) +
                                " is below the double-precision floor");
  return eval_core(s, z, plan.radius);
}

ScaledValue theta_eval_with_radius(const ThetaSection& s, const CVector& z, double radius) {
  if (!(radius > 0.0)) throw InvalidParameter("theta_eval_with_radius: radius must be positive");
  return eval_core(s, z, radius);
}

cplx theta_eval(const ThetaSection& s, const CVector& z, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParameter("theta_eval: epsilon must be positive");
  if (epsilon < kEpsilonFloor)
    throw PrecisionUnachievable("theta epsilon " + std::to_string(epsilon) + " is below the double-precision floor");
  check_point(z, s.torus()->genus());
  return theta_eval_scaled(s, z, truncation_plan(s.torus()->tau, s.level(), 0.0, epsilon)).raw();
}

cplx theta_eval(const ThetaSection& s, const TorusPoint& z, double epsilon) {
  return theta_eval(s, z.complex_value(s.torus()->tau, s.torus()->type), epsilon);
}

cplx automorphy_factor(const RiemannMatrix& tau, int k, const RVector& p, const CVector& z) {
  const CVector pc = p.cast<cplx>();
  const cplx quad = pc.dot(tau.tau() * pc);  // dot conjugates the first argument; p is real
  const cplx lin = pc.dot(z);
  const cplx i(0.0, 1.0);
  return std::exp(-M_PI * i * static_cast<double>(k) * quad - 2.0 * M_PI * i * static_cast<double>(k) * lin);
}

// ---------------------------------------------------------------------------
// SectionProduct

SectionProduct::SectionProduct(std::vector<ThetaSection> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw InvalidInput("empty section product");
  for (const auto& f : factors_) {
    if (f.torus() != factors_.front().torus() &&
        !(f.torus()->type == factors_.front().torus()->type &&
          f.torus()->tau.tau() == factors_.front().torus()->tau.tau()))
      throw InvalidInput("section product factors live on different tori");
    total_level_ += f.level();
  }
}

long SectionProduct::h0() const { return h0_of_power(torus()->type, total_level_); }

std::string SectionProduct::id() const {
  std::string out;
  for (const auto& f : factors_) {
    if (!out.empty()) out += " * ";
    out += "[" + f.id() + "]";
  }
  return out;
}

ScaledValue SectionProduct::eval_scaled(const CVector& z, double epsilon) const {
  ScaledValue acc{1.0, 0.0};
  for (const auto& f : factors_)
    acc *= theta_eval_scaled(f, z, truncation_plan(f.torus()->tau, f.level(), 0.0, epsilon));
  return acc;
}

}  // namespace pnormal
