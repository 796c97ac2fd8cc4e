#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ohmm/gal.hpp"
#include "ohmm/matrix.hpp"

namespace ohmm {

/// Canonical labels of the three-state driving model. Stored 0-based; the
/// external (CSV) labels are 1 = RT, 2 = SF, 3 = LT.
enum class DrivingState : std::size_t { RightTurn = 0, Straight = 1, LeftTurn = 2 };

inline constexpr std::size_t kRT = static_cast<std::size_t>(DrivingState::RightTurn);
inline constexpr std::size_t kSF = static_cast<std::size_t>(DrivingState::Straight);
inline constexpr std::size_t kLT = static_cast<std::size_t>(DrivingState::LeftTurn);

const char* state_name(std::size_t state);

/// Lower bound applied to emission log-densities so that far-out
/// observations never zero out every state.
inline constexpr double kLogDensityFloor = -700.0;

/// Smallest offset from a singular GAL center used by EmissionModel.
inline constexpr double kCenterResolution = 1e-300;

/// Per-state GAL emission densities g(i, y).
class EmissionModel {
 public:
  EmissionModel() = default;
  explicit EmissionModel(std::vector<GalParams> states);

  std::size_t size() const { return densities_.size(); }
  const GalParams& state(std::size_t i) const { return densities_[i].params(); }
  std::vector<GalParams> states() const;

  /// Writes log g(i, y), floored at kLogDensityFloor, into `out` (size m).
  /// Returns the number of floored entries. An observation exactly at the
  /// center of a state whose density is unbounded there is evaluated one
  /// floating-point step away, so every entry is finite.
  std::size_t log_densities(double y, std::span<double> out) const;

 private:
  std::vector<GalDensity> densities_;
};

/// Filter phi_t(k) = P(Z_t = k | Y_0..Y_t).
struct FilterDistribution {
  std::vector<double> phi;
  std::uint64_t t = 0;
  bool degenerate = false;  ///< observation had zero likelihood under every state
};

/// phi_0 proportional to pi_k g(k, y0). Computed in log space.
FilterDistribution filter_init(std::span<const double> pi, const EmissionModel& em, double y0);
/// Same, with the emission log-densities supplied directly.
FilterDistribution filter_init_log(std::span<const double> pi, std::span<const double> log_density);

/// One Bayes step: predict with Q, correct with the density of the new
/// observation y_next.
FilterDistribution filter_step(const FilterDistribution& phi, const TransitionMatrix& q, const EmissionModel& em,
                               double y_next);
FilterDistribution filter_step_log(const FilterDistribution& phi, const TransitionMatrix& q,
                                   std::span<const double> log_density);

/// Backward kernel r(k' | k) = phi(k') q(k', k) / sum_k'' phi(k'') q(k'', k),
/// stored as r(k', k). Columns sum to 1.
struct RetrospectiveKernel {
  Matrix r;
  std::vector<bool> unreachable;  ///< columns with zero predicted mass (set uniform)
};

RetrospectiveKernel retrospective_kernel(std::span<const double> phi, const TransitionMatrix& q);

/// Hot-path variants writing into caller-owned storage. `prediction` receives
/// sum_k' phi(k') q(k', k); `r` is m*m row-major r(k', k).
void predict_into(std::span<const double> phi, const TransitionMatrix& q, std::span<double> prediction);
/// Returns true if some column was unreachable.
bool retrospective_kernel_into(std::span<const double> phi, const TransitionMatrix& q,
                               std::span<const double> prediction, std::span<double> r);
/// Normalizes prediction(k) * exp(log_density(k)) into `out`. Returns false
/// (and writes a uniform vector) when the product vanishes everywhere.
bool correct_into(std::span<const double> prediction, std::span<const double> log_density, std::span<double> out);

/// Expected transition statistics of the recursive E-step.
struct SufficientStats {
  Tensor3 rho;  ///< rho(i, j, k)
  Matrix s;     ///< S(i, j) = sum_k phi(k) rho(i, j, k)
};

struct LogLikelihood {
  double value = 0.0;
  std::size_t floored = 0;  ///< emission densities clipped at the floor
};

/// log p(y_0..y_T) by the scaled forward recursion.
LogLikelihood loglik(std::span<const double> y, const TransitionMatrix& q, const EmissionModel& em,
                     std::span<const double> pi);

/// E-step over a whole sequence with forgetting factor 1/t: S(i, j) is the
/// posterior expected number of i -> j transitions divided by T.
/// Requires y.size() >= 1; a single observation yields all-zero statistics.
SufficientStats expected_transition_stats(std::span<const double> y, const TransitionMatrix& q,
                                          const EmissionModel& em, std::span<const double> pi);

struct EmIterate {
  TransitionMatrix q;
  double loglik = 0.0;
  std::vector<bool> unvisited;  ///< rows of S that were zero (row kept)
};

/// Batch EM for the transition matrix with emissions held fixed. Returns
/// n_iters + 1 iterates; entry 0 is the initial matrix.
std::vector<EmIterate> batch_em(std::span<const double> y, const TransitionMatrix& q_init, const EmissionModel& em,
                                std::span<const double> pi, int n_iters);

/// MAP state path; ties go to the lower state index.
std::vector<std::size_t> viterbi(std::span<const double> y, const TransitionMatrix& q, const EmissionModel& em,
                                 std::span<const double> pi);

/// log P(path, y) under the model (used to compare decoded paths).
double path_log_probability(std::span<const std::size_t> path, std::span<const double> y,
                            const TransitionMatrix& q, const EmissionModel& em, std::span<const double> pi);

}  // namespace ohmm
