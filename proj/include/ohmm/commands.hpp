#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ohmm/damage.hpp"
#include "ohmm/hmm.hpp"
#include "ohmm/io.hpp"
#include "ohmm/online_em.hpp"

namespace ohmm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

/// 2 for validation/input errors, 3 for I/O errors.
int exit_code_for(const std::exception& e);

/// End index (exclusive) of each frame. Time framing splits the samples
/// evenly; distance framing splits the travelled distance evenly, using
/// `speed_kmh` per sample when given and `default_speed_kmh` otherwise.
std::vector<std::size_t> frame_ends(std::size_t n, std::size_t frames, FrameMode mode,
                                    std::span<const double> speed_kmh, double sampling_period,
                                    double default_speed_kmh);

struct OnlineTrace {
  TurnCounts counts;
  std::vector<double> eta_turns;       ///< eta_LT + eta_RT after each checkpoint
  std::vector<TransitionMatrix> q_at;  ///< Q_hat after each checkpoint
  TransitionMatrix q_mean;             ///< time average of Q_hat over all steps
  std::uint64_t steps = 0;
};

/// Runs the online estimator over y (y[0] initializes). Checkpoint c records
/// the state after samples [0, c) have been consumed; checkpoints must be
/// nondecreasing and in 1..y.size().
OnlineTrace run_online_trace(std::span<const double> y, const EmissionModel& em, const ForgettingPolicy& policy,
                             std::uint64_t burn_in, const TransitionMatrix& q0, std::span<const double> pi,
                             std::span<const std::size_t> checkpoints = {});

struct DamageRow {
  std::size_t frame = 0;
  std::size_t end = 0;  ///< exclusive sample index
  double delta_eta = 0.0;
  double d = 0.0;
  double delta_d = 0.0;
  double cumulative = 0.0;
  double observed_cumulative = 0.0;  ///< reduced-load rainflow damage of turns finished by `end`
};

struct DamageByBeta {
  double beta = 3.0;
  std::vector<DamageRow> rows;
  double expected_total = 0.0;
  double reduced_rainflow = 0.0;
  double total_rainflow = 0.0;
  std::size_t diverged_frames = 0;
};

struct DamageReport {
  std::vector<DamageByBeta> per_beta;
  std::vector<double> reduced_load;
  ObservedTurns turns;
  double eta_total = 0.0;
  bool labels_decoded = false;  ///< turn extremes came from a Viterbi path
  TailModel tails;
  std::vector<std::string> warnings;
};

/// Expected (model) damage per frame against rainflow references. Without
/// `path`, turns are decoded by Viterbi under the time-averaged online
/// estimate.
DamageReport compute_damage_report(std::span<const double> y, std::optional<std::span<const std::size_t>> path,
                                   std::span<const double> speed_kmh, const RunConfig& config,
                                   const EmissionModel& em);

struct JourneyCounts {
  ObservedTurns observed;
  std::vector<TurnCounts> online;  ///< one per policy
  std::optional<ObservedTurns> viterbi;
};

/// Online counts per policy and, optionally, batch EM + Viterbi counts.
JourneyCounts evaluate_journey(std::span<const double> y, std::span<const std::size_t> path, const RunConfig& config,
                               const EmissionModel& em, const std::vector<ForgettingPolicy>& policies,
                               bool with_viterbi);

struct BaselineRow {
  std::string method;
  double mean_est_lt = 0.0;
  double mean_est_rt = 0.0;
  double mean_err_lt = 0.0;
  double mean_err_rt = 0.0;
  double std_err_lt = 0.0;
  double std_err_rt = 0.0;
};

/// Table rows: observed counts, each policy, then Viterbi when present.
std::vector<BaselineRow> summarize_baselines(const std::vector<JourneyCounts>& journeys,
                                             const std::vector<std::string>& policy_names);

// Subcommands. Each throws on error; see exit_code_for.

struct SimulateOptions {
  std::string output;  ///< CSV path; the sidecar goes next to it with a .json extension
  std::string preset = "paper-journey";
};
void cmd_simulate(const RunConfig& config, const SimulateOptions& options, std::ostream& log);

struct FitEmissionOptions {
  std::string input;
  std::string output;  ///< "-" for standard output
};
void cmd_fit_emission(const FitEmissionOptions& options, std::ostream& out, std::ostream& log);

struct RunOnlineOptions {
  std::string input;   ///< "-" for standard input
  std::string output;  ///< NDJSON; "-" for standard output
  std::string snapshot_in;
  std::string snapshot_out;
  std::optional<std::uint64_t> stop_after;  ///< suspend after this many accepted rows
};

struct RunOnlineSummary {
  std::uint64_t steps = 0;
  std::uint64_t rows = 0;
  std::uint64_t malformed = 0;
  std::uint64_t skipped_speed = 0;
  std::uint64_t records = 0;
  std::vector<double> eta;
  std::optional<TransitionMatrix> q_hat;
  bool suspended = false;
};

/// Streams `in` through the estimator, writing NDJSON records to `out`.
/// Memory use does not grow with the stream length.
RunOnlineSummary run_online_stream(std::istream& in, std::ostream& out, const RunConfig& config,
                                   const EmissionModel& em, const RunOnlineOptions& options);
void cmd_run_online(const RunConfig& config, const EmissionModel& em, const RunOnlineOptions& options,
                    std::ostream& out, std::ostream& log);

struct DamageReportOptions {
  std::string input;   ///< CSV; empty means simulate one journey from the config
  std::string output;  ///< frame table CSV; "-" for standard output
  std::string totals;  ///< JSON totals (optional)
  std::string reduced_load;  ///< reduced-load CSV (optional)
};
void cmd_damage_report(const RunConfig& config, const EmissionModel& em, const DamageReportOptions& options,
                       std::ostream& out, std::ostream& log);

struct CompareOptions {
  std::string input;   ///< labeled CSV; empty means simulated replications
  std::string output;  ///< "-" for standard output
  bool viterbi = true;
};
void cmd_compare_baselines(const RunConfig& config, const EmissionModel& em, const CompareOptions& options,
                           std::ostream& out, std::ostream& log);

}  // namespace ohmm
