#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ohmm/hmm.hpp"
#include "ohmm/matrix.hpp"
#include "ohmm/online_em.hpp"
#include "ohmm/simulator.hpp"

namespace ohmm {

/// One CSV row. `state` is the external label 1 = RT, 2 = SF, 3 = LT.
struct SignalRecord {
  double t = 0.0;
  double y = 0.0;
  std::optional<int> state;
  std::optional<double> speed;

  friend bool operator==(const SignalRecord&, const SignalRecord&) = default;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Streaming reader for `t,y[,state][,speed]`. Malformed rows (wrong field
/// count, unparsable or non-finite numbers, non-increasing t, labels outside
/// 1..3) are skipped and counted.
class CsvSignalReader {
 public:
  /// Reads and checks the header; throws InputError if it is not a
  /// supported schema.
  explicit CsvSignalReader(std::istream& in);

  bool has_state() const { return has_state_; }
  bool has_speed() const { return has_speed_; }

  /// Next well-formed record; false at end of input.
  bool next(SignalRecord& out);

  std::uint64_t rows() const { return rows_; }        ///< data rows seen, including malformed
  std::uint64_t malformed() const { return malformed_; }
  /// Line number and reason of the first malformed row, if any.
  const std::string& first_problem() const { return first_problem_; }

 private:
  bool parse_row(std::string_view line, SignalRecord& out, std::string& why) const;

  std::istream* in_;
  bool has_state_ = false;
  bool has_speed_ = false;
  std::size_t columns_ = 2;
  std::uint64_t rows_ = 0;
  std::uint64_t malformed_ = 0;
  std::uint64_t line_ = 1;
  std::optional<double> last_t_;
  std::string first_problem_;
  std::string buffer_;
};

struct SignalTable {
  bool has_state = false;
  bool has_speed = false;
  std::vector<SignalRecord> records;
  std::uint64_t malformed = 0;
  std::uint64_t rows = 0;
};

/// Reads a whole CSV file. Throws IoError if the file cannot be opened and
/// InputError if more than 1% of rows are malformed.
SignalTable read_signal_csv(const std::string& path);
SignalTable read_signal_csv(std::istream& in);

void write_signal_csv(std::ostream& out, const std::vector<SignalRecord>& records, bool with_state, bool with_speed);
void write_signal_csv(const std::string& path, const std::vector<SignalRecord>& records, bool with_state,
                      bool with_speed);

/// Records with t = sample index, y, and the 1-based state label.
std::vector<SignalRecord> records_from_simulation(const SimResult& sim);

/// 0-based state index of an external label; throws InputError.
std::size_t state_index(int label);
int state_label(std::size_t index);

/// JSON sidecar describing a simulated file.
std::string simulation_sidecar(const SimResult& sim, const std::string& preset, double sampling_period);

struct ScheduleSpec {
  std::string matrix;  ///< "city", "highway" or "custom"
  std::optional<Matrix> custom;
  std::size_t length = 0;
};

enum class FrameMode { Time, Distance };

/// Flat versioned run configuration (schema_version 1). Unknown keys are
/// rejected.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  std::uint64_t seed = 1;
  std::vector<GalParams> emission;  ///< empty means the simulation-study model
  std::string policy = "fixed:0.002";
  std::uint64_t burn_in = kDefaultBurnIn;
  double q0_stay = kDefaultInitialStay;
  std::vector<double> initial_distribution;  ///< empty means uniform
  std::size_t frames = 1000;
  FrameMode frame_mode = FrameMode::Time;
  double sampling_period = 0.5;
  double default_speed_kmh = 50.0;
  std::vector<double> betas{3.0, 5.0};
  double speed_threshold = 10.0;
  std::size_t stride = 100;
  std::vector<ScheduleSpec> schedule;  ///< empty means the four-segment preset
  int initial_state = 2;               ///< external label of Z_0 in simulations
  std::size_t min_event_duration = 1;
  std::size_t replications = 20;
  std::vector<std::string> policies{"decaying:0.9", "fixed:0.01", "fixed:0.002", "fixed:0.001"};
  std::size_t quadrature_nodes = 201;
  std::string tails = "empirical";
  std::size_t em_iterations = 10;

  /// Throws DomainError on out-of-range values.
  void validate() const;

  EmissionModel emission_model() const;
  RegimeSchedule regime_schedule() const;
  TransitionMatrix initial_q(std::size_t m) const;
  std::vector<double> initial_pi(std::size_t m) const;
  ForgettingPolicy forgetting_policy() const { return parse_policy(policy); }
};

/// Throws InputError on malformed JSON, unknown keys, or wrong types.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& config);

/// Emission parameter file written by fit-emission.
std::string emission_to_json(const std::vector<GalParams>& states, const std::vector<std::size_t>& counts,
                             const std::vector<double>& logliks, const std::vector<bool>& converged);
std::vector<GalParams> emission_from_json(std::string_view json_text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace ohmm
