#include "ohmm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "ohmm/errors.hpp"
#include "ohmm/gal.hpp"
#include "ohmm/simulator.hpp"

namespace ohmm {
namespace {

using nlohmann::json;

constexpr double kMaxMalformedFraction = 0.01;
constexpr std::uint64_t kMalformedCheckAfter = 1000;
constexpr int kSnapshotWrapperVersion = 1;

json matrix_json(const TransitionMatrix& q) {
  json rows = json::array();
  for (std::size_t i = 0; i < q.size(); ++i) rows.push_back(std::vector<double>(q.row(i).begin(), q.row(i).end()));
  return rows;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Opens `path` for writing, or returns `fallback` for "-".
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
      stream_ = &file_;
    }
    path_ = path;
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("failed writing '" + path_ + "'");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
  std::string path_;
};

std::string sidecar_path(const std::string& csv) {
  const auto slash = csv.find_last_of('/');
  const auto dot = csv.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return csv.substr(0, dot) + ".json";
  return csv + ".json";
}

SimResult simulate_from_config(const RunConfig& config, const EmissionModel& em, std::uint64_t seed) {
  const auto schedule = config.regime_schedule();
  std::vector<double> pi0(schedule.states(), 0.0);
  const auto z0 = state_index(config.initial_state);
  if (z0 >= pi0.size()) throw DomainError("initial_state outside the schedule's states");
  pi0[z0] = 1.0;
  return simulate_journey(schedule, em, pi0, seed);
}

struct LoadedSignal {
  std::vector<double> y;
  std::vector<std::size_t> path;
  std::vector<double> speed;
  bool has_state = false;
};

LoadedSignal load_signal(const std::string& input) {
  const auto table = read_signal_csv(input);
  LoadedSignal s;
  s.has_state = table.has_state;
  s.y.reserve(table.records.size());
  for (const auto& r : table.records) {
    s.y.push_back(r.y);
    if (table.has_state) s.path.push_back(state_index(*r.state));
    if (table.has_speed) s.speed.push_back(*r.speed);
  }
  return s;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

BaselineRow make_row(std::string method, const std::vector<double>& est_lt, const std::vector<double>& est_rt,
                     const std::vector<double>& obs_lt, const std::vector<double>& obs_rt) {
  std::vector<double> err_lt(est_lt.size()), err_rt(est_rt.size());
  for (std::size_t i = 0; i < est_lt.size(); ++i) {
    err_lt[i] = std::abs(est_lt[i] - obs_lt[i]);
    err_rt[i] = std::abs(est_rt[i] - obs_rt[i]);
  }
  return {std::move(method), mean(est_lt), mean(est_rt), mean(err_lt), mean(err_rt), sample_std(err_lt),
          sample_std(err_rt)};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kExitIo;
  return kExitValidation;
}

std::vector<std::size_t> frame_ends(std::size_t n, std::size_t frames, FrameMode mode,
                                    std::span<const double> speed_kmh, double sampling_period,
                                    double default_speed_kmh) {
  if (frames == 0) throw DomainError("frames must be positive");
  if (frames > n) throw DomainError("more frames (" + std::to_string(frames) + ") than samples (" +
                                    std::to_string(n) + ")");
  std::vector<std::size_t> ends(frames);
  if (mode == FrameMode::Time) {
    for (std::size_t k = 0; k < frames; ++k) ends[k] = (k + 1) * n / frames;
    return ends;
  }
  if (!speed_kmh.empty() && speed_kmh.size() != n) throw InputError("speed column length differs from the signal");
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = speed_kmh.empty() ? default_speed_kmh : std::max(0.0, speed_kmh[i]);
    acc += v / 3.6 * sampling_period;
    cum[i] = acc;
  }
  if (!(acc > 0.0)) throw InputError("distance framing needs a positive travelled distance");
  std::size_t i = 0;
  for (std::size_t k = 0; k + 1 < frames; ++k) {
    const double target = acc * static_cast<double>(k + 1) / static_cast<double>(frames);
    while (i < n && cum[i] < target - 1e-12 * acc) ++i;
    ends[k] = std::min(n, i + 1);
  }
  ends[frames - 1] = n;
  for (std::size_t k = 1; k < frames; ++k) ends[k] = std::max(ends[k], ends[k - 1]);
  return ends;
}

OnlineTrace run_online_trace(std::span<const double> y, const EmissionModel& em, const ForgettingPolicy& policy,
                             std::uint64_t burn_in, const TransitionMatrix& q0, std::span<const double> pi,
                             std::span<const std::size_t> checkpoints) {
  if (y.empty()) throw InputError("run_online_trace: empty signal");
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    if (checkpoints[c] < 1 || checkpoints[c] > y.size() || (c > 0 && checkpoints[c] < checkpoints[c - 1])) {
      throw DomainError("checkpoints must be nondecreasing and within 1..n");
    }
  }
  const std::size_t m = q0.size();
  OnlineEstimator est(online_init(pi, em, y[0], q0, policy, burn_in), em);
  OnlineTrace trace;
  Matrix qsum(m, m);
  std::size_t ci = 0;
  const auto record = [&](std::size_t consumed) {
    while (ci < checkpoints.size() && checkpoints[ci] == consumed) {
      const auto& st = est.state();
      trace.eta_turns.push_back(m == 3 ? st.eta[kLT] + st.eta[kRT] : 0.0);
      trace.q_at.push_back(st.q_hat);
      ++ci;
    }
  };
  record(1);
  for (std::size_t t = 1; t < y.size(); ++t) {
    est.step(y[t]);
    const auto& q = est.state().q_hat.matrix();
    for (std::size_t k = 0; k < m * m; ++k) qsum.data()[k] += q.data()[k];
    record(t + 1);
  }
  const auto& st = est.state();
  trace.steps = st.t;
  if (m == 3) trace.counts = turn_counts(st);
  if (y.size() > 1) {
    for (auto& v : qsum.data()) v /= static_cast<double>(y.size() - 1);
    // Renormalize against rounding in the running sum.
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (const double v : qsum.row(i)) s += v;
      for (auto& v : qsum.row(i)) v /= s;
    }
    trace.q_mean = TransitionMatrix(std::move(qsum));
  } else {
    trace.q_mean = q0;
  }
  return trace;
}

DamageReport compute_damage_report(std::span<const double> y, std::optional<std::span<const std::size_t>> path,
                                   std::span<const double> speed_kmh, const RunConfig& config,
                                   const EmissionModel& em) {
  if (y.empty()) throw InputError("damage report needs a non-empty signal");
  if (em.size() != 3) throw DomainError("damage report requires the three-state RT/SF/LT model");
  const std::size_t n = y.size();
  const auto q0 = config.initial_q(3);
  const auto pi = config.initial_pi(3);
  const auto ends = frame_ends(n, config.frames, config.frame_mode, speed_kmh, config.sampling_period,
                               config.default_speed_kmh);
  const auto trace = run_online_trace(y, em, config.forgetting_policy(), config.burn_in, q0, pi, ends);

  DamageReport report;
  std::vector<std::size_t> decoded;
  std::span<const std::size_t> states;
  if (path) {
    if (path->size() != n) throw InputError("state path length differs from the signal");
    states = *path;
  } else {
    decoded = viterbi(y, trace.q_mean, em, pi);
    states = decoded;
    report.labels_decoded = true;
  }
  const auto events = extract_events(states, config.min_event_duration);
  report.turns = count_turns(events);
  report.reduced_load = reduce_load(y, events);
  report.eta_total = trace.eta_turns.empty() ? 0.0 : trace.eta_turns.back();
  if (config.tails == "rayleigh") {
    report.tails = fit_rayleigh_tails(report.reduced_load);
    if (report.tails.fallback()) report.warnings.push_back("too few extremes for a Rayleigh fit; using empirical tails");
  } else {
    report.tails = empirical_tails(report.reduced_load);
  }
  if (events.empty()) report.warnings.push_back("no turns detected; expected damage is zero");

  const auto cycles = rainflow_count(report.reduced_load);
  // Frame in which each reduced-load cycle is completed (frame of its maximum).
  std::vector<std::size_t> cycle_frame(cycles.size());
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const std::size_t r = cycles[c].max_index;
    std::size_t sample = 0;
    if (r % 2 == 1) {
      sample = events[(r - 1) / 2].stop - 1;
    } else if (r >= 2) {
      sample = events[r / 2 - 1].stop - 1;
    }
    cycle_frame[c] = static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), sample) - ends.begin());
    cycle_frame[c] = std::min(cycle_frame[c], ends.size() - 1);
  }

  QuadratureConfig quad;
  quad.nodes = config.quadrature_nodes;
  for (const double beta : config.betas) {
    const DamageParams params{1.0, beta};
    DamageByBeta b;
    b.beta = beta;
    std::vector<double> d(ends.size(), 0.0);
    if (!events.empty()) {
      const TransitionMatrix* last_q = nullptr;
      double last_d = 0.0;
      for (std::size_t k = 0; k < ends.size(); ++k) {
        const auto& q = trace.q_at[k];
        if (last_q == nullptr || !(q == *last_q)) {
          try {
            const auto di = damage_intensity(turn_chain_from_q(q), report.tails, params, quad);
            if (di.diverged) ++b.diverged_frames;
            last_d = di.per_turn;
          } catch (const DomainError&) {
            last_d = 0.0;
          }
          last_q = &q;
        }
        d[k] = last_d;
      }
    }
    const auto fd = frame_damage(trace.eta_turns, d);
    std::vector<double> observed(ends.size(), 0.0);
    for (std::size_t c = 0; c < cycles.size(); ++c) observed[cycle_frame[c]] += std::pow(cycles[c].range(), beta);
    double obs_acc = 0.0;
    b.rows.resize(ends.size());
    for (std::size_t k = 0; k < ends.size(); ++k) {
      obs_acc += observed[k];
      b.rows[k] = {k + 1, ends[k], fd.delta_eta[k], d[k], fd.delta_damage[k], fd.cumulative[k], obs_acc};
    }
    b.expected_total = fd.total;
    b.reduced_rainflow = pm_damage(cycles, params);
    b.total_rainflow = rainflow_damage(y, params);
    if (b.diverged_frames > 0) {
      report.warnings.push_back("damage integral flagged as divergent in " + std::to_string(b.diverged_frames) +
                                " frames for beta " + format_double(beta));
    }
    report.per_beta.push_back(std::move(b));
  }
  return report;
}

JourneyCounts evaluate_journey(std::span<const double> y, std::span<const std::size_t> path, const RunConfig& config,
                               const EmissionModel& em, const std::vector<ForgettingPolicy>& policies,
                               bool with_viterbi) {
  if (em.size() != 3) throw DomainError("baseline comparison requires the three-state RT/SF/LT model");
  if (path.size() != y.size()) throw InputError("ground-truth path length differs from the signal");
  JourneyCounts jc;
  jc.observed = count_turns(extract_events(path, config.min_event_duration));
  const auto q0 = config.initial_q(3);
  const auto pi = config.initial_pi(3);
  for (const auto& policy : policies) {
    jc.online.push_back(run_online_trace(y, em, policy, config.burn_in, q0, pi).counts);
  }
  if (with_viterbi) {
    const auto fit = batch_em(y, q0, em, pi, static_cast<int>(config.em_iterations));
    const auto decoded = viterbi(y, fit.back().q, em, pi);
    jc.viterbi = count_turns(extract_events(decoded, config.min_event_duration));
  }
  return jc;
}

std::vector<BaselineRow> summarize_baselines(const std::vector<JourneyCounts>& journeys,
                                             const std::vector<std::string>& policy_names) {
  std::vector<double> obs_lt, obs_rt;
  for (const auto& j : journeys) {
    obs_lt.push_back(static_cast<double>(j.observed.left));
    obs_rt.push_back(static_cast<double>(j.observed.right));
  }
  std::vector<BaselineRow> rows;
  rows.push_back(make_row("observed", obs_lt, obs_rt, obs_lt, obs_rt));
  for (std::size_t p = 0; p < policy_names.size(); ++p) {
    std::vector<double> lt, rt;
    for (const auto& j : journeys) {
      lt.push_back(j.online.at(p).left);
      rt.push_back(j.online.at(p).right);
    }
    rows.push_back(make_row(policy_names[p], lt, rt, obs_lt, obs_rt));
  }
  if (!journeys.empty() && journeys.front().viterbi) {
    std::vector<double> lt, rt;
    for (const auto& j : journeys) {
      lt.push_back(static_cast<double>(j.viterbi->left));
      rt.push_back(static_cast<double>(j.viterbi->right));
    }
    rows.push_back(make_row("viterbi", lt, rt, obs_lt, obs_rt));
  }
  return rows;
}

void cmd_simulate(const RunConfig& config, const SimulateOptions& options, std::ostream& log) {
  config.validate();
  if (options.output.empty()) throw InputError("simulate needs an output path");
  if (options.preset != "paper-journey" && options.preset != "config") {
    throw InputError("unknown preset '" + options.preset + "' (expected paper-journey or config)");
  }
  RunConfig effective = config;
  if (options.preset == "paper-journey") {
    effective.schedule.clear();
    effective.emission.clear();
    effective.initial_state = 2;
  }
  const auto em = effective.emission_model();
  const auto sim = simulate_from_config(effective, em, effective.seed);
  write_signal_csv(options.output, records_from_simulation(sim), true, false);
  write_text_file(sidecar_path(options.output), simulation_sidecar(sim, options.preset, config.sampling_period));
  log << "wrote " << sim.y.size() << " samples to " << options.output << " (" << sim.observed.left
      << " left turns, " << sim.observed.right << " right turns)\n";
}

void cmd_fit_emission(const FitEmissionOptions& options, std::ostream& out, std::ostream& log) {
  const auto table = read_signal_csv(options.input);
  if (!table.has_state) throw InputError("fit-emission needs a 'state' column with ground-truth labels");
  std::vector<std::vector<double>> by_state(3);
  for (const auto& r : table.records) by_state[state_index(*r.state)].push_back(r.y);
  std::vector<GalParams> params;
  std::vector<std::size_t> counts;
  std::vector<double> logliks;
  std::vector<bool> converged;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& ys = by_state[s];
    if (ys.empty()) throw InputError(std::string("no samples labeled ") + state_name(s));
    if (ys.size() < 100) log << "warning: only " << ys.size() << " samples for state " << state_name(s) << "\n";
    const auto fit = gal_fit_mle(ys, gal_initial_guess(ys));
    if (!fit.converged) log << "warning: fit for state " << state_name(s) << " hit the evaluation budget\n";
    params.push_back(fit.params);
    counts.push_back(ys.size());
    logliks.push_back(fit.loglik);
    converged.push_back(fit.converged);
  }
  OutputTarget target(options.output, out);
  target.stream() << emission_to_json(params, counts, logliks, converged);
  target.finish();
}

RunOnlineSummary run_online_stream(std::istream& in, std::ostream& out, const RunConfig& config,
                                   const EmissionModel& em, const RunOnlineOptions& options) {
  const std::size_t m = em.size();
  const auto policy = config.forgetting_policy();
  const auto q0 = config.initial_q(m);
  const auto pi = config.initial_pi(m);
  CsvSignalReader reader(in);

  std::optional<OnlineEstimator> est;
  std::optional<double> resume_after;
  double last_t = 0.0;
  RunOnlineSummary summary;
  if (!options.snapshot_in.empty()) {
    json snap;
    try {
      snap = json::parse(read_text_file(options.snapshot_in));
      if (snap.at("schema_version").get<int>() != kSnapshotWrapperVersion) {
        throw InputError("unsupported snapshot schema_version");
      }
      if (!snap.at("estimator").is_null()) {
        est.emplace(from_snapshot(snap.at("estimator").dump()), em);
        last_t = snap.at("last_t").get<double>();
        resume_after = last_t;
      }
      summary.skipped_speed = snap.at("skipped_speed").get<std::uint64_t>();
      summary.records = snap.at("records").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw InputError(std::string("malformed run snapshot: ") + e.what());
    }
  }

  std::uint64_t accepted_here = 0;
  SignalRecord r;
  std::string line;
  while (reader.next(r)) {
    if (reader.rows() >= kMalformedCheckAfter &&
        static_cast<double>(reader.malformed()) > kMaxMalformedFraction * static_cast<double>(reader.rows())) {
      throw InputError("too many malformed rows; first at " + reader.first_problem());
    }
    if (resume_after && r.t <= *resume_after) continue;
    if (r.speed && *r.speed < config.speed_threshold) {
      ++summary.skipped_speed;
      continue;
    }
    if (!est) {
      est.emplace(online_init(pi, em, r.y, q0, policy, config.burn_in), em);
    } else {
      est->step(r.y);
    }
    last_t = r.t;
    ++accepted_here;
    const auto& st = est->state();
    const std::uint64_t steps = st.t + 1;
    if (steps % config.stride == 0) {
      json rec;
      rec["t"] = r.t;
      rec["step"] = steps;
      rec["diag"] = st.q_hat.diagonal();
      if (m == 3) {
        rec["eta_lt"] = st.eta[kLT];
        rec["eta_rt"] = st.eta[kRT];
      } else {
        rec["eta"] = st.eta;
      }
      line = rec.dump();
      line += '\n';
      out << line;
      ++summary.records;
    }
    if (options.stop_after && accepted_here >= *options.stop_after) {
      summary.suspended = true;
      break;
    }
  }
  summary.rows = reader.rows();
  summary.malformed = reader.malformed();
  if (static_cast<double>(summary.malformed) > kMaxMalformedFraction * static_cast<double>(summary.rows)) {
    throw InputError("too many malformed rows (" + std::to_string(summary.malformed) + " of " +
                     std::to_string(summary.rows) + "); first at " + reader.first_problem());
  }

  summary.eta.assign(m, 0.0);
  if (est) {
    const auto& st = est->state();
    summary.steps = st.t + 1;
    summary.eta = st.eta;
    summary.q_hat = st.q_hat;
  }
  if (!options.snapshot_out.empty()) {
    json snap;
    snap["schema_version"] = kSnapshotWrapperVersion;
    snap["estimator"] = est ? json::parse(to_snapshot(est->state())) : json(nullptr);
    snap["last_t"] = last_t;
    snap["skipped_speed"] = summary.skipped_speed;
    snap["records"] = summary.records;
    write_text_file(options.snapshot_out, snap.dump() + "\n");
  }

  json s;
  s["summary"] = true;
  s["steps"] = summary.steps;
  s["t"] = est ? last_t : 0.0;
  s["rows"] = summary.rows;
  s["malformed"] = summary.malformed;
  s["skipped_speed"] = summary.skipped_speed;
  s["records"] = summary.records;
  s["eta"] = summary.eta;
  if (m == 3) {
    s["eta_lt"] = summary.eta[kLT];
    s["eta_rt"] = summary.eta[kRT];
  }
  s["q_hat"] = summary.q_hat ? matrix_json(*summary.q_hat) : json(nullptr);
  s["policy"] = policy_name(policy);
  s["snapshot"] = options.snapshot_out.empty() ? json(nullptr) : json(options.snapshot_out);
  s["suspended"] = summary.suspended;
  out << s.dump() << '\n';
  return summary;
}

void cmd_run_online(const RunConfig& config, const EmissionModel& em, const RunOnlineOptions& options,
                    std::ostream& out, std::ostream& log) {
  config.validate();
  OutputTarget target(options.output, out);
  RunOnlineSummary summary;
  if (options.input.empty() || options.input == "-") {
    summary = run_online_stream(std::cin, target.stream(), config, em, options);
  } else {
    std::ifstream in(options.input);
    if (!in) throw IoError("cannot open '" + options.input + "' for reading");
    summary = run_online_stream(in, target.stream(), config, em, options);
  }
  target.finish();
  if (summary.malformed > 0) log << "warning: skipped " << summary.malformed << " malformed rows\n";
  if (summary.skipped_speed > 0) log << "skipped " << summary.skipped_speed << " rows below the speed threshold\n";
}

void cmd_damage_report(const RunConfig& config, const EmissionModel& em, const DamageReportOptions& options,
                       std::ostream& out, std::ostream& log) {
  config.validate();
  LoadedSignal sig;
  if (options.input.empty()) {
    const auto sim = simulate_from_config(config, em, config.seed);
    sig.y = sim.y;
    sig.path = sim.path;
    sig.has_state = true;
  } else {
    sig = load_signal(options.input);
  }
  std::optional<std::span<const std::size_t>> path;
  if (sig.has_state) path = std::span<const std::size_t>(sig.path);
  const auto report = compute_damage_report(sig.y, path, sig.speed, config, em);
  for (const auto& w : report.warnings) log << "warning: " << w << "\n";

  OutputTarget target(options.output, out);
  auto& os = target.stream();
  os << "beta,frame,end,delta_eta,d,delta_d,cumulative,observed_cumulative\n";
  for (const auto& b : report.per_beta) {
    for (const auto& row : b.rows) {
      os << format_double(b.beta) << ',' << row.frame << ',' << row.end << ',' << format_double(row.delta_eta) << ','
         << format_double(row.d) << ',' << format_double(row.delta_d) << ',' << format_double(row.cumulative) << ','
         << format_double(row.observed_cumulative) << '\n';
    }
  }
  target.finish();

  json totals;
  totals["schema_version"] = 1;
  totals["samples"] = sig.y.size();
  totals["observed_turns"] = {{"left", report.turns.left}, {"right", report.turns.right}};
  totals["expected_turns"] = report.eta_total;
  totals["labels_decoded"] = report.labels_decoded;
  totals["tails"] = report.tails.backend() == TailModel::Backend::Rayleigh ? "rayleigh" : "empirical";
  json per = json::array();
  for (const auto& b : report.per_beta) {
    per.push_back({{"beta", b.beta},
                   {"expected", b.expected_total},
                   {"reduced_load_rainflow", b.reduced_rainflow},
                   {"total_rainflow", b.total_rainflow},
                   {"diverged_frames", b.diverged_frames}});
  }
  totals["damage"] = per;
  totals["warnings"] = report.warnings;
  if (!options.totals.empty()) {
    write_text_file(options.totals, totals.dump(2) + "\n");
  } else {
    log << totals.dump(2) << "\n";
  }
  if (!options.reduced_load.empty()) {
    std::ostringstream rl;
    rl << "i,x\n";
    for (std::size_t i = 0; i < report.reduced_load.size(); ++i) {
      rl << i << ',' << format_double(report.reduced_load[i]) << '\n';
    }
    write_text_file(options.reduced_load, rl.str());
  }
}

void cmd_compare_baselines(const RunConfig& config, const EmissionModel& em, const CompareOptions& options,
                           std::ostream& out, std::ostream& log) {
  config.validate();
  std::vector<ForgettingPolicy> policies;
  for (const auto& p : config.policies) policies.push_back(parse_policy(p));
  std::vector<JourneyCounts> journeys;
  if (!options.input.empty()) {
    const auto sig = load_signal(options.input);
    if (!sig.has_state) throw InputError("compare-baselines needs ground-truth labels in a 'state' column");
    journeys.push_back(evaluate_journey(sig.y, sig.path, config, em, policies, options.viterbi));
  } else {
    for (std::size_t r = 0; r < config.replications; ++r) {
      const auto sim = simulate_from_config(config, em, config.seed + r);
      journeys.push_back(evaluate_journey(sim.y, sim.path, config, em, policies, options.viterbi));
      log << "journey " << (r + 1) << "/" << config.replications << " done\n";
    }
  }
  const auto rows = summarize_baselines(journeys, config.policies);
  OutputTarget target(options.output, out);
  auto& os = target.stream();
  os << "method,mean_est_lt,mean_est_rt,mean_err_lt,mean_err_rt,std_err_lt,std_err_rt\n";
  for (const auto& row : rows) {
    os << csv_field(row.method) << ',' << format_double(row.mean_est_lt) << ',' << format_double(row.mean_est_rt) << ','
       << format_double(row.mean_err_lt) << ',' << format_double(row.mean_err_rt) << ','
       << format_double(row.std_err_lt) << ',' << format_double(row.std_err_rt) << '\n';
  }
  target.finish();
}

}  // namespace ohmm
