// ohmm: driving-event counting and fatigue damage from lateral acceleration.

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ohmm/commands.hpp"
#include "ohmm/errors.hpp"
#include "ohmm/io.hpp"
#include "ohmm/online_em.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string emission;
  std::string output = "-";
  std::uint64_t seed = 0;
  std::size_t stride = 0;
  std::size_t frames = 0;
  std::string policy;
  double gamma = 0.0;
  std::string rk;
  std::string betas;
};

void add_common(CLI::App* app, CommonFlags& f, bool online) {
  app->add_option("--config", f.config, "Run configuration (JSON)");
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--output", f.output, "Output path ('-' for standard output)");
  if (online) {
    app->add_option("--emission", f.emission, "Emission parameter file written by fit-emission");
    app->add_option("--stride", f.stride, "Emit one online record every N samples");
    app->add_option("--policy", f.policy, "Forgetting policy, e.g. fixed:0.002, decaying:0.9, per-state:0.01");
    app->add_option("--gamma", f.gamma, "Shorthand for --policy fixed:X");
    app->add_option("--rk", f.rk, "Shorthand for --policy rk:R,K");
    app->add_option("--beta", f.betas, "Comma-separated damage exponents");
    app->add_option("--frames", f.frames, "Number of damage frames");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw ohmm::InputError("bad number '" + item + "' in --beta");
    }
    if (pos != item.size()) throw ohmm::InputError("bad number '" + item + "' in --beta");
    out.push_back(v);
  }
  if (out.empty()) throw ohmm::InputError("--beta needs at least one value");
  return out;
}

ohmm::RunConfig resolve_config(const CommonFlags& f, CLI::App* app) {
  ohmm::RunConfig c = f.config.empty() ? ohmm::RunConfig{} : ohmm::load_run_config(f.config);
  if (app->count("--seed") > 0) c.seed = f.seed;
  if (app->get_option_no_throw("--stride") != nullptr && app->count("--stride") > 0) c.stride = f.stride;
  if (app->get_option_no_throw("--frames") != nullptr && app->count("--frames") > 0) c.frames = f.frames;
  if (app->get_option_no_throw("--beta") != nullptr && app->count("--beta") > 0) c.betas = parse_list(f.betas);
  int policy_flags = 0;
  if (app->get_option_no_throw("--policy") != nullptr) {
    policy_flags = static_cast<int>(app->count("--policy") + app->count("--gamma") + app->count("--rk"));
  }
  if (policy_flags > 1) throw ohmm::InputError("use only one of --policy, --gamma, --rk");
  if (policy_flags == 1) {
    if (app->count("--policy") > 0) {
      c.policy = f.policy;
    } else if (app->count("--gamma") > 0) {
      c.policy = "fixed:" + ohmm::format_double(f.gamma);
    } else {
      c.policy = "rk:" + f.rk;
    }
    c.policies = {c.policy};
  }
  c.validate();
  return c;
}

ohmm::EmissionModel resolve_emission(const CommonFlags& f, const ohmm::RunConfig& c) {
  if (!f.emission.empty()) return ohmm::EmissionModel(ohmm::emission_from_json(ohmm::read_text_file(f.emission)));
  return c.emission_model();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online HMM estimation of driving events and expected fatigue damage"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  std::string preset = "paper-journey";
  auto* sim = app.add_subcommand("simulate", "Simulate a regime-switching journey to CSV");
  add_common(sim, sim_flags, false);
  sim->add_option("--preset", preset, "paper-journey or config (use the config's schedule)");

  std::string fit_input;
  std::string fit_output = "-";
  auto* fit = app.add_subcommand("fit-emission", "Fit per-state GAL emission parameters from labeled data");
  fit->add_option("input", fit_input, "Labeled CSV (t,y,state)")->required();
  fit->add_option("--output", fit_output, "Output JSON path ('-' for standard output)");

  CommonFlags run_flags;
  ohmm::RunOnlineOptions run_opts;
  std::uint64_t stop_after = 0;
  auto* run = app.add_subcommand("run-online", "Stream a signal through the online EM estimator (NDJSON)");
  add_common(run, run_flags, true);
  run->add_option("input", run_opts.input, "Signal CSV ('-' for standard input)")->required();
  run->add_option("--snapshot-in", run_opts.snapshot_in, "Resume from a snapshot");
  run->add_option("--snapshot-out", run_opts.snapshot_out, "Write a snapshot at the end");
  run->add_option("--stop-after", stop_after, "Suspend after N accepted rows");

  CommonFlags dmg_flags;
  ohmm::DamageReportOptions dmg_opts;
  auto* dmg = app.add_subcommand("damage-report", "Expected and rainflow damage per frame");
  add_common(dmg, dmg_flags, true);
  dmg->add_option("input", dmg_opts.input, "Signal CSV; omitted means simulate one journey");
  dmg->add_option("--totals", dmg_opts.totals, "Write totals JSON here");
  dmg->add_option("--reduced-load", dmg_opts.reduced_load, "Write the reduced load CSV here");

  CommonFlags cmp_flags;
  ohmm::CompareOptions cmp_opts;
  bool no_viterbi = false;
  std::size_t replications = 0;
  auto* cmp = app.add_subcommand("compare-baselines", "Turn-count errors per forgetting policy and Viterbi");
  add_common(cmp, cmp_flags, true);
  cmp->add_option("input", cmp_opts.input, "Labeled CSV; omitted means simulated replications");
  cmp->add_option("--replications", replications, "Number of simulated journeys");
  cmp->add_flag("--no-viterbi", no_viterbi, "Skip the batch EM + Viterbi baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ohmm::kExitOk : ohmm::kExitValidation;
  }

  try {
    if (*sim) {
      ohmm::SimulateOptions o;
      o.output = sim_flags.output;
      o.preset = preset;
      if (o.output == "-") throw ohmm::InputError("simulate needs --output PATH");
      ohmm::cmd_simulate(resolve_config(sim_flags, sim), o, std::cerr);
    } else if (*fit) {
      ohmm::cmd_fit_emission({fit_input, fit_output}, std::cout, std::cerr);
    } else if (*run) {
      const auto c = resolve_config(run_flags, run);
      run_opts.output = run_flags.output;
      if (run->count("--stop-after") > 0) run_opts.stop_after = stop_after;
      ohmm::cmd_run_online(c, resolve_emission(run_flags, c), run_opts, std::cout, std::cerr);
    } else if (*dmg) {
      const auto c = resolve_config(dmg_flags, dmg);
      dmg_opts.output = dmg_flags.output;
      ohmm::cmd_damage_report(c, resolve_emission(dmg_flags, c), dmg_opts, std::cout, std::cerr);
    } else if (*cmp) {
      auto c = resolve_config(cmp_flags, cmp);
      if (cmp->count("--replications") > 0) {
        c.replications = replications;
        c.validate();
      }
      cmp_opts.output = cmp_flags.output;
      cmp_opts.viterbi = !no_viterbi;
      ohmm::cmd_compare_baselines(c, resolve_emission(cmp_flags, c), cmp_opts, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ohmm::exit_code_for(e);
  }
  return ohmm::kExitOk;
}
