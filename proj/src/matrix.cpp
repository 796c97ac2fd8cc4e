#include "ohmm/matrix.hpp"

#include <cmath>
#include <string>

#include "ohmm/errors.hpp"

namespace ohmm {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DomainError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

TransitionMatrix::TransitionMatrix(Matrix q) : q_(std::move(q)) {
  if (q_.rows() == 0 || q_.rows() != q_.cols()) throw DomainError("transition matrix must be square and non-empty");
  for (const double v : q_.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("transition probabilities must lie in [0, 1]");
  }
  if (max_row_defect() > kRowTolerance) throw DomainError("transition matrix rows must sum to 1");
}

TransitionMatrix TransitionMatrix::persistent(std::size_t m, double stay) {
  if (m == 0) throw DomainError("persistent: m must be positive");
  if (m == 1) return TransitionMatrix(Matrix{{1.0}});
  if (!(stay >= 0.0 && stay <= 1.0)) throw DomainError("persistent: stay probability outside [0, 1]");
  const double off = (1.0 - stay) / static_cast<double>(m - 1);
  Matrix q(m, m, off);
  for (std::size_t i = 0; i < m; ++i) q(i, i) = stay;
  return TransitionMatrix(std::move(q));
}

TransitionMatrix TransitionMatrix::uniform(std::size_t m) {
  return TransitionMatrix(Matrix(m, m, 1.0 / static_cast<double>(m)));
}

std::vector<double> TransitionMatrix::diagonal() const {
  std::vector<double> d(size());
  for (std::size_t i = 0; i < size(); ++i) d[i] = q_(i, i);
  return d;
}

double TransitionMatrix::max_row_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < q_.rows(); ++i) {
    double s = 0.0;
    for (const double v : q_.row(i)) s += v;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

void validate_probability_vector(std::span<const double> p, double tol, const char* what) {
  if (p.empty()) throw DomainError(std::string(what) + " is empty");
  double s = 0.0;
  for (const double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " has a negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > tol) throw DomainError(std::string(what) + " does not sum to 1");
}

std::vector<double> uniform_vector(std::size_t m) {
  return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

}  // namespace ohmm
