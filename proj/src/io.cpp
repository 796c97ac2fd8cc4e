#include "ohmm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ohmm/errors.hpp"

namespace ohmm {
namespace {

using nlohmann::json;

constexpr double kMaxMalformedFraction = 0.01;

template <typename T>
bool parse_field(std::string_view text, T& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

json gal_to_json(const GalParams& p) { return json{{"delta", p.delta}, {"mu", p.mu}, {"nu", p.nu}, {"sigma", p.sigma}}; }

GalParams gal_from_json(const json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key != "delta" && key != "mu" && key != "nu" && key != "sigma" && key != "state" && key != "name" &&
        key != "n" && key != "loglik" && key != "converged") {
      throw InputError("unknown emission field '" + key + "'");
    }
  }
  GalParams p{j.at("delta").get<double>(), j.at("mu").get<double>(), j.at("nu").get<double>(),
              j.at("sigma").get<double>()};
  p.validate();
  return p;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw InputError("matrix rows have different lengths");
    for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = rows[i][k];
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvSignalReader::CsvSignalReader(std::istream& in) : in_(&in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw InputError("CSV input is empty (expected a header t,y[,state][,speed])");
  }
  const auto h = strip_cr(header);
  if (h == "t,y") {
    columns_ = 2;
  } else if (h == "t,y,state") {
    has_state_ = true;
    columns_ = 3;
  } else if (h == "t,y,speed") {
    has_speed_ = true;
    columns_ = 3;
  } else if (h == "t,y,state,speed") {
    has_state_ = has_speed_ = true;
    columns_ = 4;
  } else {
    throw InputError("unsupported CSV header '" + std::string(h) + "'");
  }
}

bool CsvSignalReader::parse_row(std::string_view line, SignalRecord& out, std::string& why) const {
  const auto fields = split_commas(line);
  if (fields.size() != columns_) {
    why = "expected " + std::to_string(columns_) + " fields";
    return false;
  }
  SignalRecord r;
  if (!parse_field(fields[0], r.t) || !std::isfinite(r.t)) {
    why = "bad t";
    return false;
  }
  if (!parse_field(fields[1], r.y) || !std::isfinite(r.y)) {
    why = "bad y";
    return false;
  }
  std::size_t next = 2;
  if (has_state_) {
    int s = 0;
    if (!parse_field(fields[next], s) || s < 1 || s > 3) {
      why = "state label must be 1, 2 or 3";
      return false;
    }
    r.state = s;
    ++next;
  }
  if (has_speed_) {
    double v = 0.0;
    if (!parse_field(fields[next], v) || !std::isfinite(v)) {
      why = "bad speed";
      return false;
    }
    r.speed = v;
  }
  if (last_t_ && !(r.t > *last_t_)) {
    why = "t not strictly increasing";
    return false;
  }
  out = r;
  return true;
}

bool CsvSignalReader::next(SignalRecord& out) {
  while (std::getline(*in_, buffer_)) {
    ++line_;
    const auto line = strip_cr(buffer_);
    if (line.empty()) continue;
    ++rows_;
    std::string why;
    if (parse_row(line, out, why)) {
      last_t_ = out.t;
      return true;
    }
    if (malformed_++ == 0) first_problem_ = "line " + std::to_string(line_) + ": " + why;
  }
  return false;
}

SignalTable read_signal_csv(std::istream& in) {
  CsvSignalReader reader(in);
  SignalTable table;
  table.has_state = reader.has_state();
  table.has_speed = reader.has_speed();
  SignalRecord r;
  while (reader.next(r)) table.records.push_back(r);
  table.rows = reader.rows();
  table.malformed = reader.malformed();
  if (static_cast<double>(table.malformed) > kMaxMalformedFraction * static_cast<double>(table.rows)) {
    throw InputError("too many malformed rows (" + std::to_string(table.malformed) + " of " +
                     std::to_string(table.rows) + "); first at " + reader.first_problem());
  }
  return table;
}

SignalTable read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_signal_csv(in);
}

void write_signal_csv(std::ostream& out, const std::vector<SignalRecord>& records, bool with_state, bool with_speed) {
  out << "t,y";
  if (with_state) out << ",state";
  if (with_speed) out << ",speed";
  out << '\n';
  std::string line;
  for (const auto& r : records) {
    line.clear();
    line += format_double(r.t);
    line += ',';
    line += format_double(r.y);
    if (with_state) {
      if (!r.state) throw InputError("record without state label written to a labeled CSV");
      line += ',';
      line += std::to_string(*r.state);
    }
    if (with_speed) {
      if (!r.speed) throw InputError("record without speed written to a CSV with a speed column");
      line += ',';
      line += format_double(*r.speed);
    }
    line += '\n';
    out << line;
  }
}

void write_signal_csv(const std::string& path, const std::vector<SignalRecord>& records, bool with_state,
                      bool with_speed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_signal_csv(out, records, with_state, with_speed);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::size_t state_index(int label) {
  if (label < 1 || label > 3) throw InputError("state label must be 1, 2 or 3");
  return static_cast<std::size_t>(label - 1);
}

int state_label(std::size_t index) { return static_cast<int>(index) + 1; }

std::vector<SignalRecord> records_from_simulation(const SimResult& sim) {
  std::vector<SignalRecord> out(sim.y.size());
  for (std::size_t t = 0; t < sim.y.size(); ++t) {
    out[t].t = static_cast<double>(t);
    out[t].y = sim.y[t];
    out[t].state = state_label(sim.path[t]);
  }
  return out;
}

std::string simulation_sidecar(const SimResult& sim, const std::string& preset, double sampling_period) {
  json j;
  j["schema_version"] = 1;
  j["preset"] = preset;
  j["seed"] = sim.seed;
  j["samples"] = sim.y.size();
  j["sampling_period"] = sampling_period;
  json segs = json::array();
  for (std::size_t s = 0; s + 1 < sim.boundaries.size(); ++s) {
    segs.push_back({{"name", sim.segment_names[s]},
                    {"start", sim.boundaries[s]},
                    {"length", sim.boundaries[s + 1] - sim.boundaries[s]}});
  }
  j["segments"] = segs;
  j["observed_turns"] = {{"left", sim.observed.left}, {"right", sim.observed.right}};
  return j.dump(2) + "\n";
}

void RunConfig::validate() const {
  if (!emission.empty()) {
    for (const auto& p : emission) p.validate();
  }
  validate_policy(forgetting_policy());
  for (const auto& p : policies) validate_policy(parse_policy(p));
  if (!(q0_stay >= 0.0 && q0_stay <= 1.0)) throw DomainError("q0_stay must lie in [0, 1]");
  if (frames == 0) throw DomainError("frames must be positive");
  if (!(sampling_period > 0.0)) throw DomainError("sampling_period must be positive");
  if (!(default_speed_kmh > 0.0)) throw DomainError("default_speed_kmh must be positive");
  if (betas.empty()) throw DomainError("at least one damage exponent is required");
  for (const double b : betas) DamageParams{1.0, b}.validate();
  if (!(speed_threshold >= 0.0)) throw DomainError("speed_threshold must be >= 0");
  if (stride == 0) throw DomainError("stride must be positive");
  if (initial_state < 1 || initial_state > 3) throw DomainError("initial_state must be 1, 2 or 3");
  if (min_event_duration == 0) throw DomainError("min_event_duration must be >= 1");
  if (replications == 0) throw DomainError("replications must be positive");
  if (quadrature_nodes == 0) throw DomainError("quadrature_nodes must be positive");
  if (tails != "empirical" && tails != "rayleigh") throw DomainError("tails must be 'empirical' or 'rayleigh'");
  if (em_iterations == 0) throw DomainError("em_iterations must be positive");
  if (!initial_distribution.empty()) validate_probability_vector(initial_distribution, 1e-9, "initial_distribution");
  if (!schedule.empty()) regime_schedule().validate();
}

EmissionModel RunConfig::emission_model() const {
  if (emission.empty()) return paper_emission_model();
  return EmissionModel(emission);
}

RegimeSchedule RunConfig::regime_schedule() const {
  if (schedule.empty()) return paper_schedule();
  RegimeSchedule s;
  for (const auto& spec : schedule) {
    if (spec.matrix == "city") {
      s.segments.push_back({"city", q_city(), spec.length});
    } else if (spec.matrix == "highway") {
      s.segments.push_back({"highway", q_highway(), spec.length});
    } else if (spec.custom) {
      s.segments.push_back({"custom", TransitionMatrix(*spec.custom), spec.length});
    } else {
      throw DomainError("schedule matrix must be 'city', 'highway' or an explicit matrix");
    }
  }
  s.validate();
  return s;
}

TransitionMatrix RunConfig::initial_q(std::size_t m) const { return TransitionMatrix::persistent(m, q0_stay); }

std::vector<double> RunConfig::initial_pi(std::size_t m) const {
  if (initial_distribution.empty()) return uniform_vector(m);
  if (initial_distribution.size() != m) throw DomainError("initial_distribution has the wrong length");
  return initial_distribution;
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config must be a JSON object");
  static const std::set<std::string> known{
      "schema_version", "seed",        "emission",        "policy",         "burn_in",
      "q0_stay",        "initial_distribution",           "frames",         "frame_mode",
      "sampling_period", "default_speed_kmh",             "betas",          "speed_threshold",
      "stride",         "schedule",    "initial_state",   "min_event_duration", "replications",
      "policies",       "quadrature_nodes",               "tails",          "em_iterations"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw InputError("unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    if (!j.contains("schema_version")) throw InputError("config is missing schema_version");
    if (j.at("schema_version").get<int>() != RunConfig::kSchemaVersion) {
      throw InputError("unsupported config schema_version");
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("emission")) {
      c.emission.clear();
      for (const auto& e : j["emission"]) c.emission.push_back(gal_from_json(e));
    }
    if (j.contains("policy")) c.policy = j["policy"].get<std::string>();
    if (j.contains("burn_in")) c.burn_in = j["burn_in"].get<std::uint64_t>();
    if (j.contains("q0_stay")) c.q0_stay = j["q0_stay"].get<double>();
    if (j.contains("initial_distribution")) c.initial_distribution = j["initial_distribution"].get<std::vector<double>>();
    if (j.contains("frames")) c.frames = j["frames"].get<std::size_t>();
    if (j.contains("frame_mode")) {
      const auto mode = j["frame_mode"].get<std::string>();
      if (mode == "time") {
        c.frame_mode = FrameMode::Time;
      } else if (mode == "distance") {
        c.frame_mode = FrameMode::Distance;
      } else {
        throw InputError("frame_mode must be 'time' or 'distance'");
      }
    }
    if (j.contains("sampling_period")) c.sampling_period = j["sampling_period"].get<double>();
    if (j.contains("default_speed_kmh")) c.default_speed_kmh = j["default_speed_kmh"].get<double>();
    if (j.contains("betas")) c.betas = j["betas"].get<std::vector<double>>();
    if (j.contains("speed_threshold")) c.speed_threshold = j["speed_threshold"].get<double>();
    if (j.contains("stride")) c.stride = j["stride"].get<std::size_t>();
    if (j.contains("schedule")) {
      for (const auto& s : j["schedule"]) {
        for (const auto& [key, value] : s.items()) {
          if (key != "matrix" && key != "length") throw InputError("unknown schedule field '" + key + "'");
        }
        ScheduleSpec spec;
        const auto& m = s.at("matrix");
        if (m.is_string()) {
          spec.matrix = m.get<std::string>();
        } else {
          spec.matrix = "custom";
          spec.custom = matrix_from_json(m);
        }
        spec.length = s.at("length").get<std::size_t>();
        c.schedule.push_back(std::move(spec));
      }
    }
    if (j.contains("initial_state")) c.initial_state = j["initial_state"].get<int>();
    if (j.contains("min_event_duration")) c.min_event_duration = j["min_event_duration"].get<std::size_t>();
    if (j.contains("replications")) c.replications = j["replications"].get<std::size_t>();
    if (j.contains("policies")) c.policies = j["policies"].get<std::vector<std::string>>();
    if (j.contains("quadrature_nodes")) c.quadrature_nodes = j["quadrature_nodes"].get<std::size_t>();
    if (j.contains("tails")) c.tails = j["tails"].get<std::string>();
    if (j.contains("em_iterations")) c.em_iterations = j["em_iterations"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path)); }

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["seed"] = c.seed;
  if (!c.emission.empty()) {
    json e = json::array();
    for (const auto& p : c.emission) e.push_back(gal_to_json(p));
    j["emission"] = e;
  }
  j["policy"] = c.policy;
  j["burn_in"] = c.burn_in;
  j["q0_stay"] = c.q0_stay;
  if (!c.initial_distribution.empty()) j["initial_distribution"] = c.initial_distribution;
  j["frames"] = c.frames;
  j["frame_mode"] = c.frame_mode == FrameMode::Time ? "time" : "distance";
  j["sampling_period"] = c.sampling_period;
  j["default_speed_kmh"] = c.default_speed_kmh;
  j["betas"] = c.betas;
  j["speed_threshold"] = c.speed_threshold;
  j["stride"] = c.stride;
  if (!c.schedule.empty()) {
    json s = json::array();
    for (const auto& spec : c.schedule) {
      json m = spec.custom ? matrix_to_json(*spec.custom) : json(spec.matrix);
      s.push_back({{"matrix", m}, {"length", spec.length}});
    }
    j["schedule"] = s;
  }
  j["initial_state"] = c.initial_state;
  j["min_event_duration"] = c.min_event_duration;
  j["replications"] = c.replications;
  j["policies"] = c.policies;
  j["quadrature_nodes"] = c.quadrature_nodes;
  j["tails"] = c.tails;
  j["em_iterations"] = c.em_iterations;
  return j.dump(2) + "\n";
}

std::string emission_to_json(const std::vector<GalParams>& states, const std::vector<std::size_t>& counts,
                             const std::vector<double>& logliks, const std::vector<bool>& converged) {
  json j;
  j["schema_version"] = 1;
  json arr = json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    json e = gal_to_json(states[i]);
    e["state"] = state_label(i);
    e["name"] = state_name(i);
    e["n"] = counts[i];
    e["loglik"] = logliks[i];
    e["converged"] = static_cast<bool>(converged[i]);
    arr.push_back(e);
  }
  j["emission"] = arr;
  return j.dump(2) + "\n";
}

std::vector<GalParams> emission_from_json(std::string_view json_text) {
  try {
    const auto j = json::parse(json_text);
    std::vector<GalParams> out;
    for (const auto& e : j.at("emission")) out.push_back(gal_from_json(e));
    if (out.empty()) throw InputError("emission file lists no states");
    return out;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed emission file: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ohmm
