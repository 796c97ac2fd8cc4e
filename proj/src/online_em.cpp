#include "ohmm/online_em.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "json.hpp"

#include "ohmm/errors.hpp"
#include "ohmm/markov.hpp"

namespace ohmm {
namespace {

constexpr int kSnapshotVersion = 1;
constexpr std::size_t kStationaryRefreshThreshold = 8;
constexpr std::uint64_t kStationaryRefreshPeriod = 10;

double parse_number(std::string_view text, const char* what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw InputError(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  }
  return v;
}

// Scalar gamma for the step t -> t+1; for PerState this is the base factor.
double base_gamma(const ForgettingPolicy& policy, std::uint64_t t) {
  return std::visit(
      [t](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DecayingForgetting>) {
          return std::pow(static_cast<double>(t + 1), -p.alpha);
        } else if constexpr (std::is_same_v<P, FixedForgetting>) {
          return p.gamma;
        } else if constexpr (std::is_same_v<P, RkForgetting>) {
          return gamma_from_rk(p.r, p.k);
        } else {
          return p.base_gamma;
        }
      },
      policy);
}

void resolve_gamma_into(const OnlineEstimatorState& state, std::span<double> out) {
  const double g = base_gamma(state.policy, state.t);
  if (std::holds_alternative<PerStateForgetting>(state.policy)) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(g * state.pi_bar[i], kGammaFloor, 1.0);
  } else {
    std::fill(out.begin(), out.end(), g);
  }
}

using Workspace = detail::OnlineWorkspace;

void step_in_place(OnlineEstimatorState& st, const EmissionModel& em, double y, Workspace& ws) {
  const std::size_t m = st.size();
  resolve_gamma_into(st, ws.gamma);

  // E-step with the current estimate Q_hat_t.
  predict_into(st.phi, st.q_hat, ws.pred);
  retrospective_kernel_into(st.phi, st.q_hat, ws.pred, ws.r);
  em.log_densities(y, ws.logg);
  if (!correct_into(ws.pred, ws.logg, st.phi)) ++st.degenerate_observations;

  const auto& r = ws.r;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double g = ws.gamma[j];
      for (std::size_t k = 0; k < m; ++k) {
        double carry = 0.0;
        for (std::size_t kp = 0; kp < m; ++kp) carry += st.rho(i, j, kp) * r[kp * m + k];
        ws.next_rho(i, j, k) = (j == k ? g * r[i * m + j] : 0.0) + (1.0 - g) * carry;
      }
    }
  }
  std::swap(st.rho, ws.next_rho);

  // M-step.
  if (st.t >= st.burn_in && m > 1) {
    Matrix next(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += st.phi[k] * st.rho(i, j, k);
        ws.s[i * m + j] = s;
        row += s;
      }
      if (row > 0.0 && std::isfinite(row)) {
        for (std::size_t j = 0; j < m; ++j) next(i, j) = ws.s[i * m + j] / row;
      } else {
        ++st.frozen_rows;
        for (std::size_t j = 0; j < m; ++j) next(i, j) = st.q_hat(i, j);
      }
    }
    st.q_hat = TransitionMatrix(std::move(next));
  }
  ++st.t;

  // Event accumulators with the stationary law of Q_hat_{t+1}.
  if (m <= kStationaryRefreshThreshold || st.t % kStationaryRefreshPeriod == 0) {
    st.stationary_unique = stationary_distribution_into(st.q_hat, st.pi_current);
  }
  for (std::size_t i = 0; i < m; ++i) {
    double entry = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) entry += st.pi_current[j] * st.q_hat(j, i);
    }
    st.eta[i] += entry;
  }
  const double gb = std::min(1.0, base_gamma(st.policy, st.t - 1));
  for (std::size_t i = 0; i < m; ++i) st.pi_bar[i] = (1.0 - gb) * st.pi_bar[i] + gb * st.pi_current[i];
}

}  // namespace

void validate_policy(const ForgettingPolicy& policy) {
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DecayingForgetting>) {
          if (!(p.alpha > 0.5 && p.alpha <= 1.0)) throw DomainError("decaying forgetting requires 0.5 < alpha <= 1");
        } else if constexpr (std::is_same_v<P, FixedForgetting>) {
          if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw DomainError("fixed forgetting requires 0 < gamma < 1");
        } else if constexpr (std::is_same_v<P, RkForgetting>) {
          if (!(p.r > 0.0 && p.r < 1.0)) throw DomainError("R must satisfy 0 < R < 1");
        } else {
          if (!(p.base_gamma > 0.0 && p.base_gamma < 1.0)) {
            throw DomainError("per-state forgetting requires 0 < base gamma < 1");
          }
        }
      },
      policy);
}

std::string policy_name(const ForgettingPolicy& policy) {
  const auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  return std::visit(
      [&](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DecayingForgetting>) {
          return "decaying:" + num(p.alpha);
        } else if constexpr (std::is_same_v<P, FixedForgetting>) {
          return "fixed:" + num(p.gamma);
        } else if constexpr (std::is_same_v<P, RkForgetting>) {
          return "rk:" + num(p.r) + "," + std::to_string(p.k);
        } else {
          return "per-state:" + num(p.base_gamma);
        }
      },
      policy);
}

ForgettingPolicy parse_policy(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InputError("policy must look like kind:value, got '" + std::string(text) + "'");
  const auto kind = text.substr(0, colon);
  const auto arg = text.substr(colon + 1);
  ForgettingPolicy policy;
  if (kind == "decaying") {
    policy = DecayingForgetting{parse_number(arg, "alpha")};
  } else if (kind == "fixed") {
    policy = FixedForgetting{parse_number(arg, "gamma")};
  } else if (kind == "rk") {
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) throw InputError("rk policy needs R,K");
    const double r = parse_number(arg.substr(0, comma), "R");
    const double k = parse_number(arg.substr(comma + 1), "K");
    if (!(k >= 0.0) || k != std::floor(k) || k > 1e15) throw DomainError("K must be a non-negative integer");
    policy = RkForgetting{r, static_cast<std::uint64_t>(k)};
  } else if (kind == "per-state") {
    policy = PerStateForgetting{parse_number(arg, "base gamma")};
  } else {
    throw InputError("unknown policy kind '" + std::string(kind) + "'");
  }
  validate_policy(policy);
  return policy;
}

double gamma_from_rk(double r, std::uint64_t k) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("gamma_from_rk: R must satisfy 0 < R < 1");
  if (k == 0) return r;
  return -std::expm1(std::log1p(-r) / (static_cast<double>(k) + 1.0));
}

OnlineEstimatorState online_init(std::span<const double> pi, const EmissionModel& em, double y0,
                                 const TransitionMatrix& q0, const ForgettingPolicy& policy, std::uint64_t burn_in) {
  validate_policy(policy);
  const std::size_t m = q0.size();
  if (em.size() != m) throw DomainError("online_init: emission model and Q0 sizes differ");
  OnlineEstimatorState st;
  st.phi = filter_init(pi, em, y0).phi;
  st.rho = Tensor3(m);
  st.q_hat = q0;
  st.t = 0;
  st.burn_in = burn_in;
  st.eta.assign(m, 0.0);
  st.pi_current.resize(m);
  st.stationary_unique = stationary_distribution_into(q0, st.pi_current);
  st.pi_bar = st.pi_current;
  st.policy = policy;
  return st;
}

std::vector<double> resolve_gamma(const ForgettingPolicy& policy, const OnlineEstimatorState& state) {
  std::vector<double> out(state.size());
  if (std::holds_alternative<PerStateForgetting>(policy)) {
    const double g = std::get<PerStateForgetting>(policy).base_gamma;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(g * state.pi_bar[i], kGammaFloor, 1.0);
  } else {
    std::fill(out.begin(), out.end(), base_gamma(policy, state.t));
  }
  return out;
}

OnlineEstimatorState online_step(OnlineEstimatorState state, const EmissionModel& em, double y) {
  Workspace ws(state.size());
  step_in_place(state, em, y, ws);
  return state;
}

OnlineEstimator::OnlineEstimator(OnlineEstimatorState state, const EmissionModel& em)
    : state_(std::move(state)), em_(&em), workspace_(state_.size()) {
  if (em.size() != state_.size()) throw DomainError("OnlineEstimator: emission model size mismatch");
}

void OnlineEstimator::step(double y) {
  if (workspace_.gamma.size() != state_.size()) workspace_ = Workspace(state_.size());
  step_in_place(state_, *em_, y, workspace_);
}

std::vector<double> entry_rates(const TransitionMatrix& q) {
  const auto pi = stationary_distribution(q).pi;
  const std::size_t m = q.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) out[i] += pi[j] * q(j, i);
    }
  }
  return out;
}

std::vector<double> accumulate_events(const OnlineEstimatorState& state) { return state.eta; }

TurnCounts turn_counts(const OnlineEstimatorState& state) {
  if (state.size() != 3) throw DomainError("turn_counts requires the three-state RT/SF/LT labeling");
  return {state.eta[kLT], state.eta[kRT]};
}

std::string to_snapshot(const OnlineEstimatorState& s) {
  nlohmann::json j;
  j["version"] = kSnapshotVersion;
  j["m"] = s.size();
  j["t"] = s.t;
  j["burn_in"] = s.burn_in;
  j["phi"] = s.phi;
  j["rho"] = std::vector<double>(s.rho.data().begin(), s.rho.data().end());
  j["q_hat"] = std::vector<double>(s.q_hat.matrix().data().begin(), s.q_hat.matrix().data().end());
  j["eta"] = s.eta;
  j["pi_bar"] = s.pi_bar;
  j["pi_current"] = s.pi_current;
  j["policy"] = policy_name(s.policy);
  j["frozen_rows"] = s.frozen_rows;
  j["degenerate_observations"] = s.degenerate_observations;
  j["stationary_unique"] = s.stationary_unique;
  return j.dump();
}

OnlineEstimatorState from_snapshot(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("snapshot is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kSnapshotVersion) throw InputError("unsupported snapshot version");
    const auto m = j.at("m").get<std::size_t>();
    if (m == 0) throw InputError("snapshot: m must be positive");
    OnlineEstimatorState s;
    s.t = j.at("t").get<std::uint64_t>();
    s.burn_in = j.at("burn_in").get<std::uint64_t>();
    s.phi = j.at("phi").get<std::vector<double>>();
    const auto rho = j.at("rho").get<std::vector<double>>();
    const auto q = j.at("q_hat").get<std::vector<double>>();
    s.eta = j.at("eta").get<std::vector<double>>();
    s.pi_bar = j.at("pi_bar").get<std::vector<double>>();
    s.pi_current = j.at("pi_current").get<std::vector<double>>();
    if (s.phi.size() != m || rho.size() != m * m * m || q.size() != m * m || s.eta.size() != m ||
        s.pi_bar.size() != m || s.pi_current.size() != m) {
      throw InputError("snapshot: inconsistent array sizes");
    }
    s.rho = Tensor3(m);
    std::copy(rho.begin(), rho.end(), s.rho.data().begin());
    Matrix qm(m, m);
    std::copy(q.begin(), q.end(), qm.data().begin());
    s.q_hat = TransitionMatrix(std::move(qm));
    s.policy = parse_policy(j.at("policy").get<std::string>());
    s.frozen_rows = j.at("frozen_rows").get<std::uint64_t>();
    s.degenerate_observations = j.at("degenerate_observations").get<std::uint64_t>();
    s.stationary_unique = j.at("stationary_unique").get<bool>();
    validate_probability_vector(s.phi, 1e-9, "snapshot phi");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed snapshot: ") + e.what());
  }
}

}  // namespace ohmm
