#include "ohmm/simulator.hpp"

#include "ohmm/errors.hpp"
#include "ohmm/rng.hpp"

namespace ohmm {

TransitionMatrix q_city() {
  return TransitionMatrix{{0.85, 0.10, 0.05}, {0.025, 0.95, 0.025}, {0.05, 0.10, 0.85}};
}

TransitionMatrix q_highway() {
  return TransitionMatrix{{0.90, 0.08, 0.02}, {0.005, 0.99, 0.005}, {0.02, 0.08, 0.90}};
}

EmissionModel paper_emission_model() {
  return EmissionModel({GalParams{-1.0, -0.5, 10.0, 0.2}, GalParams{0.0, 0.0, 0.5, 1.0}, GalParams{1.0, 0.5, 10.0, 0.2}});
}

void RegimeSchedule::validate() const {
  if (segments.empty()) throw DomainError("schedule has no segments");
  for (const auto& s : segments) {
    if (s.length == 0) throw DomainError("schedule segment '" + s.name + "' has zero length");
    if (s.q.size() != segments.front().q.size()) throw DomainError("schedule segments disagree on state count");
  }
}

std::size_t RegimeSchedule::total_length() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.length;
  return n;
}

std::vector<std::size_t> RegimeSchedule::boundaries() const {
  std::vector<std::size_t> b;
  std::size_t at = 0;
  for (const auto& s : segments) {
    b.push_back(at);
    at += s.length;
  }
  b.push_back(at);
  return b;
}

RegimeSchedule paper_schedule(std::size_t total) {
  const std::size_t quarter = total / 4;
  RegimeSchedule s;
  s.segments = {{"city", q_city(), quarter},
                {"highway", q_highway(), quarter},
                {"city", q_city(), quarter},
                {"highway", q_highway(), total - 3 * quarter}};
  return s;
}

std::vector<std::size_t> simulate_chain(const RegimeSchedule& schedule, std::span<const double> pi0,
                                        std::uint64_t seed) {
  schedule.validate();
  validate_probability_vector(pi0, 1e-9, "initial distribution");
  if (pi0.size() != schedule.states()) throw DomainError("initial distribution size differs from the schedule");
  Rng rng(seed, Stream::Chain);
  std::vector<std::size_t> path;
  path.reserve(schedule.total_length());
  path.push_back(rng.categorical(pi0));
  bool first = true;
  for (const auto& seg : schedule.segments) {
    for (std::size_t i = 0; i < seg.length; ++i) {
      if (first) {
        first = false;
        continue;
      }
      path.push_back(rng.categorical(seg.q.row(path.back())));
    }
  }
  return path;
}

std::vector<double> simulate_observations(std::span<const std::size_t> path, const EmissionModel& em,
                                          std::uint64_t seed) {
  Rng rng(seed, Stream::Emissions);
  std::vector<double> y(path.size());
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] >= em.size()) throw DomainError("state path refers to a state without emission parameters");
    y[t] = gal_draw(em.state(path[t]), rng);
  }
  return y;
}

ObservedTurns count_turns(std::span<const TurnEvent> events) {
  ObservedTurns c;
  for (const auto& e : events) {
    if (e.label == TurnLabel::Left) {
      ++c.left;
    } else {
      ++c.right;
    }
  }
  return c;
}

SimResult simulate_journey(const RegimeSchedule& schedule, const EmissionModel& em, std::span<const double> pi0,
                           std::uint64_t seed) {
  if (em.size() != schedule.states()) throw DomainError("emission model size differs from the schedule");
  SimResult r;
  r.seed = seed;
  r.path = simulate_chain(schedule, pi0, seed);
  r.y = simulate_observations(r.path, em, seed);
  r.boundaries = schedule.boundaries();
  for (const auto& s : schedule.segments) r.segment_names.push_back(s.name);
  if (schedule.states() == 3) {
    r.events = extract_events(r.path);
    r.observed = count_turns(r.events);
  }
  return r;
}

std::vector<double> start_straight() {
  std::vector<double> pi(3, 0.0);
  pi[kSF] = 1.0;
  return pi;
}

SimResult paper_journey(std::uint64_t seed) {
  return simulate_journey(paper_schedule(), paper_emission_model(), start_straight(), seed);
}

}  // namespace ohmm
