#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ohmm/errors.hpp"
#include "ohmm/io.hpp"

using namespace ohmm;

TEST_CASE("shortest round-trip numbers") {
  for (double v : {0.0, 0.1, -1.05, 1e-300, 123456.789, 2.0 / 3.0, -0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
}

TEST_CASE("CSV round trip") {
  std::vector<SignalRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back({i * 0.5, std::sin(i * 0.37) / 3.0, 1 + i % 3, 40.0 + i});
  for (bool state : {false, true}) {
    for (bool speed : {false, true}) {
      std::stringstream ss;
      write_signal_csv(ss, recs, state, speed);
      const auto table = read_signal_csv(ss);
      CHECK(table.has_state == state);
      CHECK(table.has_speed == speed);
      CHECK(table.malformed == 0);
      REQUIRE(table.records.size() == recs.size());
      for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(table.records[i].t == recs[i].t);
        CHECK(table.records[i].y == recs[i].y);
        if (state) CHECK(table.records[i].state == recs[i].state);
        if (speed) CHECK(table.records[i].speed == recs[i].speed);
      }
    }
  }
}

TEST_CASE("CSV headers") {
  std::stringstream empty;
  CHECK_THROWS_AS(CsvSignalReader{empty}, InputError);
  std::stringstream bad("time,value\n0,1\n");
  CHECK_THROWS_AS(CsvSignalReader{bad}, InputError);
  std::stringstream crlf("t,y\r\n0,1.5\r\n1,2.5\r\n");
  const auto t = read_signal_csv(crlf);
  REQUIRE(t.records.size() == 2);
  CHECK(t.records[1].y == 2.5);
}

TEST_CASE("malformed rows are skipped and counted") {
  std::stringstream ss;
  ss << "t,y,state\n";
  for (int i = 0; i < 1000; ++i) ss << i << "," << 0.001 * i << "," << 1 + i % 3 << "\n";
  ss << "1000,abc,1\n"      // bad y
     << "1001,0.1\n"        // too few fields
     << "999,0.2,2\n"       // t goes backwards
     << "1002,0.3,4\n"      // label out of range
     << "1003,nan,2\n"      // non-finite
     << "\n"                // blank lines are ignored
     << "1004,0.4,3\n";
  CsvSignalReader reader(ss);
  SignalRecord r;
  std::size_t good = 0;
  while (reader.next(r)) ++good;
  CHECK(good == 1001);
  CHECK(reader.malformed() == 5);
  CHECK(reader.rows() == 1006);
  CHECK(reader.first_problem().find("line 1002") != std::string::npos);
}

TEST_CASE("too many malformed rows") {
  std::stringstream ss;
  ss << "t,y\n";
  for (int i = 0; i < 100; ++i) ss << i << "," << (i % 10 == 0 ? "x" : "0.5") << "\n";
  CHECK_THROWS_AS(read_signal_csv(ss), InputError);
  std::stringstream ok;
  ok << "t,y\n";
  for (int i = 0; i < 200; ++i) ok << i << "," << (i == 50 ? "x" : "0.5") << "\n";
  CHECK(read_signal_csv(ok).malformed == 1);
}

TEST_CASE("files") {
  CHECK_THROWS_AS(read_signal_csv(std::string("/nonexistent/dir/x.csv")), IoError);
  CHECK_THROWS_AS(read_text_file("/nonexistent/dir/x.json"), IoError);
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/x.json", "{}"), IoError);
}

TEST_CASE("state labels") {
  CHECK(state_index(1) == kRT);
  CHECK(state_index(2) == kSF);
  CHECK(state_index(3) == kLT);
  CHECK(state_label(kLT) == 3);
  CHECK_THROWS_AS(state_index(0), InputError);
}

TEST_CASE("run configuration") {
  SUBCASE("defaults") {
    const auto c = parse_run_config(R"({"schema_version": 1})");
    CHECK(c.policy == "fixed:0.002");
    CHECK(c.burn_in == 50);
    CHECK(c.frames == 1000);
    CHECK(c.frame_mode == FrameMode::Time);
    CHECK(c.betas == std::vector<double>{3.0, 5.0});
    CHECK(c.initial_state == 2);
    CHECK(c.initial_pi(3) == std::vector<double>(3, 1.0 / 3));
    CHECK(c.initial_q(3) == TransitionMatrix::persistent(3, 0.9));
    CHECK(c.regime_schedule().total_length() == 200000);
    CHECK(c.emission_model().size() == 3);
    c.validate();
  }
  SUBCASE("unknown keys and versions") {
    CHECK_THROWS_AS(parse_run_config(R"({"schema_version": 1, "gamma": 0.1})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"seed": 3})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"schema_version": 2})"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"schema_version": 1, "frames": "many"})"), InputError);
    CHECK_THROWS_AS(parse_run_config("[1, 2]"), InputError);
    CHECK_THROWS_AS(parse_run_config("{"), InputError);
    CHECK_THROWS_AS(parse_run_config(R"({"schema_version": 1, "schedule": [{"matrix": "city", "len": 5}]})"),
                    InputError);
  }
  SUBCASE("validation") {
    auto c = parse_run_config(R"({"schema_version": 1, "frames": 0})");
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = parse_run_config(R"({"schema_version": 1, "policy": "fixed:2"})");
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = parse_run_config(R"({"schema_version": 1, "tails": "weibull"})");
    CHECK_THROWS_AS(c.validate(), DomainError);
  }
  SUBCASE("round trip") {
    const auto text = R"({"schema_version": 1, "seed": 9, "policy": "rk:0.9,1000", "frame_mode": "distance",
      "betas": [3], "schedule": [{"matrix": "city", "length": 100},
      {"matrix": [[0.5, 0.25, 0.25], [0.1, 0.8, 0.1], [0.25, 0.25, 0.5]], "length": 50}],
      "emission": [{"delta": -1, "mu": -0.5, "nu": 10, "sigma": 0.2},
                   {"delta": 0, "mu": 0, "nu": 0.5, "sigma": 1},
                   {"delta": 1, "mu": 0.5, "nu": 10, "sigma": 0.2}]})";
    const auto c = parse_run_config(text);
    c.validate();
    const auto back = parse_run_config(run_config_to_json(c));
    CHECK(back.seed == 9);
    CHECK(back.policy == "rk:0.9,1000");
    CHECK(back.frame_mode == FrameMode::Distance);
    CHECK(back.regime_schedule().total_length() == 150);
    CHECK(back.regime_schedule().segments[1].q(1, 1) == 0.8);
    CHECK(back.emission == c.emission);
    CHECK(run_config_to_json(back) == run_config_to_json(c));
  }
}

TEST_CASE("emission parameter files") {
  const std::vector<GalParams> p{{-1.0, -0.5, 10.0, 0.2}, {0.0, 0.0, 0.5, 1.0}, {1.0, 0.5, 10.0, 0.2}};
  const auto text = emission_to_json(p, {10, 20, 30}, {-1.0, -2.0, -3.0}, {true, true, false});
  CHECK(emission_from_json(text) == p);
  CHECK_THROWS_AS(emission_from_json(R"({"states": []})"), InputError);
  CHECK_THROWS_AS(emission_from_json("nope"), InputError);
}
