#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ohmm {

/// Dense row-major matrix of doubles, sized for the handful of states an HMM
/// over driving states needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Row-stochastic m x m matrix, q(i, j) = P(Z_{t+1} = j | Z_t = i).
class TransitionMatrix {
 public:
  static constexpr double kRowTolerance = 1e-9;

  TransitionMatrix() = default;
  /// Throws DomainError if not square, entries outside [0, 1], or a row sum
  /// deviates from 1 by more than kRowTolerance.
  explicit TransitionMatrix(Matrix q);
  TransitionMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : TransitionMatrix(Matrix(rows)) {}

  /// Diagonal `stay`, remaining mass spread uniformly over the other states.
  static TransitionMatrix persistent(std::size_t m, double stay);
  static TransitionMatrix uniform(std::size_t m);

  std::size_t size() const { return q_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return q_(i, j); }
  const Matrix& matrix() const { return q_; }
  std::span<const double> row(std::size_t i) const { return q_.row(i); }
  std::vector<double> diagonal() const;

  /// Largest |row sum - 1|.
  double max_row_defect() const;

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  Matrix q_;
};

/// m x m x m tensor indexed (i, j, k), used for the auxiliary transition
/// statistics of the recursive E-step.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t m, double fill = 0.0) : m_(m), data_(m * m * m, fill) {}

  std::size_t size() const { return m_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * m_ + j) * m_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * m_ + j) * m_ + k];
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<double> data_;
};

/// Throws DomainError unless entries are >= 0 and sum to 1 within tol.
void validate_probability_vector(std::span<const double> p, double tol = 1e-9, const char* what = "probability vector");

std::vector<double> uniform_vector(std::size_t m);

}  // namespace ohmm
