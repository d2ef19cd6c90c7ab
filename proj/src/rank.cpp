#include "pnormal/rank.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include <Eigen/SVD>

#include "pnormal/errors.hpp"

namespace pnormal {

namespace {

// Static chunking, so results never depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([lo, hi, w, &fn, &errors] {
        try {
          for (std::size_t i = lo; i < hi; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Eigen::VectorXd singular_values(const CMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return {};
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues();
}

long count_above(const Eigen::VectorXd& sv, double cut) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  long r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Families

ProductFamily ProductFamily::of_sections(std::vector<ThetaSection> sections) {
  if (sections.empty()) throw InvalidInput("empty section family");
  ProductFamily f;
  f.factors = std::move(sections);
  for (std::size_t i = 0; i < f.factors.size(); ++i) f.monomials.push_back({i});
  return f;
}

ProductFamily ProductFamily::of_products(std::span<const SectionProduct> products) {
  if (products.empty()) throw InvalidInput("empty section family");
  ProductFamily f;
  for (const auto& prod : products) {
    std::vector<std::size_t> mono;
    for (const auto& s : prod.factors()) {
      f.factors.push_back(s);
      mono.push_back(f.factors.size() - 1);
    }
    f.monomials.push_back(std::move(mono));
  }
  return f;
}

std::string ProductFamily::row_id(std::size_t i) const {
  std::string out;
  for (std::size_t idx : monomials[i]) {
    if (!out.empty()) out += " * ";
    out += "[" + factors[idx].id() + "]";
  }
  return out;
}

std::vector<std::vector<std::size_t>> multisets(std::size_t n, int r) {
  std::vector<std::vector<std::size_t>> out;
  if (r < 1 || n == 0) return out;
  std::vector<std::size_t> cur(static_cast<std::size_t>(r), 0);
  for (;;) {
    out.push_back(cur);
    // rightmost position that can still grow
    auto i = static_cast<std::ptrdiff_t>(r) - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - 1) --i;
    if (i < 0) return out;
    const std::size_t v = cur[static_cast<std::size_t>(i)] + 1;
    for (auto j = static_cast<std::size_t>(i); j < cur.size(); ++j) cur[j] = v;
  }
}

// ---------------------------------------------------------------------------
// Evaluation

EvaluationMatrix eval_matrix(const ProductFamily& family, std::span<const TorusPoint> points, double epsilon,
                             std::size_t requested) {
  if (family.size() == 0 || family.factors.empty()) throw InvalidInput("eval_matrix: no sections");
  if (points.empty()) throw InvalidInput("eval_matrix: no points");
  const PolarizedTorus& torus = *family.torus();
  const int g = torus.genus();
  for (const auto& f : family.factors)
    if (f.torus() != family.torus()) throw InvalidInput("eval_matrix: sections on different tori");

  std::vector<TorusPoint> reduced;
  reduced.reserve(points.size());
  for (const auto& pt : points) {
    if (pt.genus() != g) throw InvalidInput("eval_matrix: point has the wrong dimension");
    if (!pt.p.allFinite() || !pt.q.allFinite()) throw InvalidInput("eval_matrix: point is not finite");
    reduced.push_back(pt.reduced());
  }
  for (std::size_t i = 0; i < reduced.size(); ++i)
    for (std::size_t j = i + 1; j < reduced.size(); ++j)
      if (same_point(reduced[i], reduced[j]))
        throw InvalidInput("eval_matrix: duplicate sample points " + std::to_string(i) + " and " +
                           std::to_string(j));

  std::map<int, TruncationPlan> plans;
  for (const auto& f : family.factors)
    if (!plans.contains(f.level())) plans.emplace(f.level(), truncation_plan(torus.tau, f.level(), 0.0, epsilon));

  const auto nf = family.factors.size();
  const auto np = points.size();
  const auto nr = family.size();
  EvaluationMatrix out;
  out.values.resize(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(np));
  out.points.assign(points.begin(), points.end());
  out.requested = requested == 0 ? np : std::min(requested, np);

  parallel_for(np, [&](std::size_t j) {
    const CVector z = points[j].complex_value(torus.tau, torus.type);
    std::vector<ScaledValue> fv(nf);
    for (std::size_t f = 0; f < nf; ++f)
      fv[f] = theta_eval_scaled(family.factors[f], z, plans.at(family.factors[f].level()));
    std::vector<ScaledValue> rows(nr);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nr; ++i) {
      ScaledValue acc{1.0, 0.0};
      for (std::size_t idx : family.monomials[i]) acc *= fv[idx];
      rows[i] = acc;
      top = std::max(top, acc.log_scale);
    }
    // One common positive factor per column: the entries are the plain values times exp(-top).
    for (std::size_t i = 0; i < nr; ++i) {
      const cplx v = rows[i].value * std::exp(rows[i].log_scale - top);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw InvalidInput("eval_matrix: non-finite section value");
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  });

  for (std::size_t i = 0; i < nr; ++i) out.row_ids.push_back(family.row_id(i));
  normalize_rows(out);
  return out;
}

void normalize_rows(EvaluationMatrix& m) {
  const auto nr = static_cast<std::size_t>(m.values.rows());
  m.row_scale.assign(nr, 0.0);
  for (std::size_t i = 0; i < nr; ++i) {
    auto row = m.values.row(static_cast<Eigen::Index>(i));
    const double s = m.values.cols() > 0 ? row.cwiseAbs().maxCoeff() : 0.0;
    m.row_scale[i] = s;
    if (s > 0.0) row /= s;
  }
}

// ---------------------------------------------------------------------------
// Ranks

RankReport numeric_rank(const EvaluationMatrix& m, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidParameter("numeric_rank: rel_tol must lie in (0, 1)");
  RankReport rep;
  rep.tolerance = rel_tol;
  const auto cols = static_cast<Eigen::Index>(m.requested == 0 ? m.values.cols() : m.requested);
  rep.sample_count = static_cast<std::size_t>(cols);

  const Eigen::VectorXd sv = singular_values(m.values.leftCols(cols));
  rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double cut = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  rep.rank = count_above(sv, cut);
  rep.degenerate = sv.size() == 0 || sv(0) == 0.0;
  if (!rep.degenerate && rep.rank > 0 && rep.rank < sv.size())
    rep.margin = sv(rep.rank) > 0.0 ? sv(rep.rank - 1) / sv(rep.rank) : std::numeric_limits<double>::infinity();

  if (m.values.cols() > cols) {
    // Same absolute cut: by interlacing, extra columns can only raise the count.
    rep.extended_rank = count_above(singular_values(m.values), cut);
    rep.verdict_stable = rep.extended_rank == rep.rank;
  } else {
    rep.extended_rank = rep.rank;
    rep.verdict_stable = m.exhaustive;
  }
  return rep;
}

void require_conclusive(const RankReport& report, const Tolerances& tol, std::string_view component) {
  if (!report.verdict_stable)
    throw Inconclusive(std::string(component), "rank " + std::to_string(report.rank) + " moved to " +
                                                   std::to_string(report.extended_rank) +
                                                   " under 1.5x re-sampling; rerun with a fresh seed");
  if (report.margin < tol.min_margin)
    throw Inconclusive(std::string(component), "singular-value margin " + std::to_string(report.margin) +
                                                   " below " + std::to_string(tol.min_margin) +
                                                   "; rerun with a fresh seed");
}

std::vector<TorusPoint> sample_points(int g, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<TorusPoint> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    TorusPoint t = TorusPoint::zero(g);
    for (int k = 0; k < g; ++k) t.p(k) = uni(rng);
    for (int k = 0; k < g; ++k) t.q(k) = uni(rng);
    pts.push_back(std::move(t));
  }
  return pts;
}

std::size_t default_sample_count(std::size_t ambient) { return 2 * ambient + 8; }

RankReport certified_rank(const ProductFamily& family, long expected, const Tolerances& tol, std::uint64_t seed) {
  const std::size_t n = default_sample_count(static_cast<std::size_t>(std::max(expected, 1L)));
  const std::size_t total = n + (n + 1) / 2;
  auto pts = sample_points(family.torus()->genus(), total, seed);
  RankReport rep = numeric_rank(eval_matrix(family, pts, tol.theta_epsilon, n), tol.rank_rel_tol);
  rep.expected = expected;
  return rep;
}

SpanResult span_rank(const ProductFamily& family, long ambient_dim, std::span<const TorusPoint> points,
                     const Tolerances& tol, std::uint64_t extension_seed) {
  if (ambient_dim < 1) throw InvalidParameter("span_rank: ambient dimension must be positive");
  if (points.size() < static_cast<std::size_t>(ambient_dim) + 8)
    throw InvalidParameter("span_rank: need at least ambient_dim + 8 points");
  std::vector<TorusPoint> all(points.begin(), points.end());
  auto extra = sample_points(family.torus()->genus(), (points.size() + 1) / 2, extension_seed);
  all.insert(all.end(), extra.begin(), extra.end());
  SpanResult out;
  out.report = numeric_rank(eval_matrix(family, all, tol.theta_epsilon, points.size()), tol.rank_rel_tol);
  out.report.expected = ambient_dim;
  require_conclusive(out.report, tol, "span_rank");
  out.spanning = out.report.rank == ambient_dim;
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace pnormal
