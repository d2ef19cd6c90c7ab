#pragma once

// Reference values computed straight from the defining series, with none of the
// library's centering, scaling or truncation logic.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

// sum over the box |n_i| <= N of exp(pi i k m^T tau m + 2 pi i k m^T z), m = n + c / (k d).
inline cplx theta_box(const Eigen::MatrixXcd& tau, const std::vector<long>& d, int k, const std::vector<long>& c,
                      const Eigen::VectorXcd& z, int N) {
  const int g = static_cast<int>(tau.rows());
  std::vector<int> n(static_cast<std::size_t>(g), -N);
  const cplx I(0.0, 1.0);
  cplx sum = 0.0;
  for (;;) {
    Eigen::VectorXcd m(g);
    for (int i = 0; i < g; ++i)
      m(i) = static_cast<double>(n[static_cast<std::size_t>(i)]) +
             static_cast<double>(c[static_cast<std::size_t>(i)]) / static_cast<double>(k * d[static_cast<std::size_t>(i)]);
    const cplx quad = (m.transpose() * tau * m)(0, 0);
    const cplx lin = (m.transpose() * z)(0, 0);
    sum += std::exp(std::numbers::pi * I * static_cast<double>(k) * quad +
                    2.0 * std::numbers::pi * I * static_cast<double>(k) * lin);
    int i = g - 1;
    while (i >= 0 && n[static_cast<std::size_t>(i)] == N) n[static_cast<std::size_t>(i--)] = -N;
    if (i < 0) break;
    ++n[static_cast<std::size_t>(i)];
  }
  return sum;
}

// Doubles the box until two successive sums agree to within tol.
inline cplx theta_converged(const Eigen::MatrixXcd& tau, const std::vector<long>& d, int k,
                            const std::vector<long>& c, const Eigen::VectorXcd& z, double tol = 1e-15) {
  const int cap = tau.rows() >= 3 ? 16 : 64;
  int N = 2;
  cplx prev = theta_box(tau, d, k, c, z, N);
  for (;;) {
    N *= 2;
    const cplx next = theta_box(tau, d, k, c, z, N);
    if (std::abs(next - prev) <= tol * (1.0 + std::abs(next)) || N >= cap) return next;
    prev = next;
  }
}

}  // namespace oracle
