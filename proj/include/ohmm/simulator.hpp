#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ohmm/damage.hpp"
#include "ohmm/hmm.hpp"
#include "ohmm/matrix.hpp"

namespace ohmm {

/// City-road driving matrix over (RT, SF, LT).
TransitionMatrix q_city();
/// Highway driving matrix over (RT, SF, LT).
TransitionMatrix q_highway();

/// RT (-1, -0.5, 10, 0.2), SF (0, 0, 0.5, 1), LT (1, 0.5, 10, 0.2).
EmissionModel paper_emission_model();

struct Segment {
  std::string name;
  TransitionMatrix q;
  std::size_t length = 0;
};

struct RegimeSchedule {
  std::vector<Segment> segments;

  /// Throws DomainError if empty, a length is zero, or sizes differ.
  void validate() const;
  std::size_t total_length() const;
  std::size_t states() const { return segments.empty() ? 0 : segments.front().q.size(); }
  /// Start index of each segment followed by the total length.
  std::vector<std::size_t> boundaries() const;
};

/// City, highway, city, highway in equal parts of total / 4 samples.
RegimeSchedule paper_schedule(std::size_t total = 200000);

/// Z_0 ~ pi0, then Z_t drawn from row Z_{t-1} of the matrix of the segment
/// containing t.
std::vector<std::size_t> simulate_chain(const RegimeSchedule& schedule, std::span<const double> pi0,
                                        std::uint64_t seed);

/// Y_t ~ GAL(state Z_t), independent given the path.
std::vector<double> simulate_observations(std::span<const std::size_t> path, const EmissionModel& em,
                                          std::uint64_t seed);

struct ObservedTurns {
  std::size_t left = 0;
  std::size_t right = 0;
};

ObservedTurns count_turns(std::span<const TurnEvent> events);

struct SimResult {
  std::uint64_t seed = 0;
  std::vector<std::size_t> path;
  std::vector<double> y;
  std::vector<TurnEvent> events;
  std::vector<std::size_t> boundaries;
  std::vector<std::string> segment_names;
  ObservedTurns observed;
};

SimResult simulate_journey(const RegimeSchedule& schedule, const EmissionModel& em, std::span<const double> pi0,
                           std::uint64_t seed);

/// Point mass on SF.
std::vector<double> start_straight();

/// The four-segment journey of 200000 samples, starting in SF.
SimResult paper_journey(std::uint64_t seed);

}  // namespace ohmm
