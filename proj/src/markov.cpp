#include "ohmm/markov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "ohmm/errors.hpp"

namespace ohmm {
namespace {

constexpr std::size_t kSmall = 8;
constexpr double kPivotTolerance = 1e-13;

void clean_and_normalize(std::span<double> pi) {
  double s = 0.0;
  for (auto& v : pi) {
    if (v < 0.0) v = 0.0;
    s += v;
  }
  for (auto& v : pi) v /= s;
}

// Gaussian elimination with partial pivoting on the in-place system a x = b.
// Returns false if a pivot falls below tolerance.
bool solve_dense(std::span<double> a, std::span<double> b, std::size_t m) {
  double scale = 0.0;
  for (const double v : a) scale = std::max(scale, std::abs(v));
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::abs(a[r * m + c]) > std::abs(a[piv * m + c])) piv = r;
    }
    if (std::abs(a[piv * m + c]) <= kPivotTolerance * scale) return false;
    if (piv != c) {
      for (std::size_t k = 0; k < m; ++k) std::swap(a[c * m + k], a[piv * m + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = a[r * m + c] / a[c * m + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < m; ++k) a[r * m + k] -= f * a[c * m + k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = m; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < m; ++k) s -= a[c * m + k] * b[k];
    b[c] = s / a[c * m + c];
  }
  return true;
}

void fill_system(const TransitionMatrix& q, std::span<double> a, std::span<double> b) {
  const std::size_t m = q.size();
  // Row r of (Q^T - I); the last row becomes the normalization constraint.
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) a[r * m + c] = q(c, r) - (r == c ? 1.0 : 0.0);
    b[r] = 0.0;
  }
  for (std::size_t c = 0; c < m; ++c) a[(m - 1) * m + c] = 1.0;
  b[m - 1] = 1.0;
}

void min_norm_solution(const TransitionMatrix& q, std::span<double> out) {
  const auto m = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXd a(m + 1, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      a(r, c) = q(static_cast<std::size_t>(c), static_cast<std::size_t>(r)) - (r == c ? 1.0 : 0.0);
    }
  }
  a.row(m).setOnes();
  rhs(m) = 1.0;
  const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(rhs);
  for (Eigen::Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = x(i);
}

}  // namespace

bool stationary_distribution_into(const TransitionMatrix& q, std::span<double> out) {
  const std::size_t m = q.size();
  if (out.size() != m) throw DomainError("stationary_distribution: output size mismatch");
  if (m == 1) {
    out[0] = 1.0;
    return true;
  }
  bool unique;
  if (m <= kSmall) {
    std::array<double, kSmall * kSmall> a{};
    std::array<double, kSmall> b{};
    fill_system(q, std::span(a.data(), m * m), std::span(b.data(), m));
    unique = solve_dense(std::span(a.data(), m * m), std::span(b.data(), m), m);
    if (unique) std::copy_n(b.begin(), m, out.begin());
  } else {
    std::vector<double> a(m * m);
    std::vector<double> b(m);
    fill_system(q, a, b);
    unique = solve_dense(a, b, m);
    if (unique) std::copy(b.begin(), b.end(), out.begin());
  }
  if (!unique) min_norm_solution(q, out);
  clean_and_normalize(out);
  return unique;
}

StationaryResult stationary_distribution(const TransitionMatrix& q) {
  StationaryResult r;
  r.pi.resize(q.size());
  r.unique = stationary_distribution_into(q, r.pi);
  return r;
}

}  // namespace ohmm
