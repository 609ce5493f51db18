#include "tpo/acceptance/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>

#include "tpo/acceptance/oracles.hpp"
#include "tpo/bimanual/bimanual.hpp"
#include "tpo/bt/parser.hpp"
#include "tpo/bt/tree.hpp"
#include "tpo/control/motion_generation.hpp"
#include "tpo/kinematics/kinematics.hpp"
#include "tpo/service/mission.hpp"
#include "tpo/vtr/vtr.hpp"

namespace tpo::acceptance {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double num(const service::Json& j, const char* key) {
  return j.contains(key) && j[key].is_number() ? j[key].get<double>() : std::nan("");
}

service::MissionReport run(const fs::path& root, const std::string& scenario, const std::string& trace = {},
                           std::optional<std::uint64_t> seed = {}) {
  service::RunOptions o;
  o.scenario = root / "scenarios" / scenario;
  if (!trace.empty()) o.trace = (root / "traces" / trace).string();
  o.seed = seed;
  return service::run_mission(o);
}

// ---- grasp force --------------------------------------------------------

CriterionResult grasp_force_values(const fs::path&) {
  const double a = bimanual::grasp_force(2.111, 0.6, 1.4, 9.81);
  const double b = bimanual::grasp_force(2.671, 0.6, 1.4, 9.81);
  const bool ok = std::abs(a - 24.16) <= 0.005 && std::abs(b - 30.57) <= 0.005;
  return {"grasp_force", ok, fmt("%.4f N, %.4f N", a, b)};
}

// ---- mass estimation ----------------------------------------------------

CriterionResult mass_estimation(const fs::path& root) {
  const auto scenario = service::load_scenario(root / "scenarios" / "bimanual_transport.json");
  const double truth = scenario.objects.at(static_cast<std::size_t>(scenario.bimanual.object)).mass;
  const bool config_ok = std::abs(scenario.force_noise - 0.1) < 1e-12 && scenario.bimanual.mass_samples == 100;
  double abs_err = 0.0, worst_std = 0.0;
  int trials_done = 0;
  for (std::uint64_t trial = 1; trial <= 15; ++trial) {
    service::Mission m(scenario, std::nullopt, {}, trial * 7919);
    while (!m.done() && !m.metrics()["m_bar"].is_number()) m.step();
    const service::Json metrics = m.metrics();
    if (!metrics["m_bar"].is_number()) break;
    abs_err += std::abs(metrics["m_bar"].get<double>() - truth);
    worst_std = std::max(worst_std, num(metrics, "mass_sample_std"));
    ++trials_done;
  }
  const double mae = trials_done ? abs_err / trials_done : std::nan("");
  const bool ok = config_ok && trials_done == 15 && mae <= 0.1 && worst_std <= 0.06;
  return {"mass_estimation", ok, fmt("trials %.0f, mean abs error %.4f kg, worst std %.4f kg", trials_done, mae, worst_std)};
}

// ---- Jacobian -----------------------------------------------------------

CriterionResult jacobian(const fs::path&) {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const kin::ChainModel model = oracle::random_chain(rng, 7);
    const kin::JointState state{oracle::random_configuration(model, rng), VecX::Zero(model.dof())};
    const Mat3X j = kin::point_jacobian(model, state, model.tip_link(), model.tip).matrix;
    const Mat3X fd = oracle::finite_difference_jacobian(model, state.q, model.tip_link(), model.tip);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    worst = std::max(worst, (j - fd).cwiseAbs().maxCoeff() / scale);
  }
  return {"jacobian", worst <= 1e-6, fmt("1000 chains, max relative error %.3g", worst)};
}

// ---- VTR split ----------------------------------------------------------

CriterionResult vtr_split(const fs::path&) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0), w01(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 xd(u(rng), u(rng), u(rng));
    vtr::Weights w;
    w.w = Vec3(w01(rng), w01(rng), w01(rng));
    const vtr::CartesianSplit s = vtr::split_cartesian(xd, w);
    worst = std::max(worst, (s.arm + s.base - xd).cwiseAbs().maxCoeff());
  }
  bool endpoints = true;
  for (double d : {0.15, 0.25, 0.4}) {
    for (double delta : {0.01, 0.1}) {
      endpoints = endpoints && vtr::axis_weight(d - delta, d, delta) == 0.0 && vtr::axis_weight(d + delta, d, delta) == 1.0;
    }
  }
  const bool ok = worst <= 1e-12 && endpoints;
  return {"vtr_split", ok, fmt("1e5 samples, max error %.3g, endpoints ", worst) + (endpoints ? "exact" : "off")};
}

// ---- behavior tree semantics -------------------------------------------

class ScriptedEnv : public bt::Environment {
 public:
  bool knows_condition(const std::string&) const override { return true; }
  bool knows_action(const std::string&) const override { return true; }
  bt::Status evaluate_condition(const bt::BtNode& leaf, bt::Blackboard&) override {
    ++ticks[leaf.leaf_id];
    const auto it = status.find(leaf.leaf_id);
    return it == status.end() ? bt::Status::Success : it->second;
  }
  std::map<std::string, bt::Status> status;
  std::map<std::string, int> ticks;
};

struct Harness {
  explicit Harness(const std::string& doc) : tree(bt::parse_tree(doc), env, channel) {}

  // One tick, then the controller answers every live action.
  bt::Status tick() {
    const bt::Status s = tree.tick(bb);
    serve();
    return s;
  }
  void serve() {
    for (const auto& r : channel.drain()) {
      if (r.type == bt::ActionRequest::Type::Start) {
        ++starts[r.module];
        live[r.token] = r.module;
      } else {
        ++aborts[r.module];
        live.erase(r.token);
      }
    }
    for (auto it = live.begin(); it != live.end();) {
      const auto rep = reply.find(it->second);
      const bt::Status s = rep == reply.end() ? bt::Status::Running : rep->second;
      channel.reply(it->first, s);
      it = s == bt::Status::Running ? std::next(it) : live.erase(it);
    }
  }

  ScriptedEnv env;
  bt::ActionChannel channel;
  bt::Blackboard bb;
  bt::Tree tree;
  std::map<std::string, bt::Status> reply;
  std::map<std::string, int> starts, aborts;
  std::map<std::uint64_t, std::string> live;
};

using S = bt::Status;

struct Row {
  const char* label;
  bool (*check)();
};

const Row kRows[] = {
    {"sequence success",
     [] {
       Harness h("sequence { condition(a) condition(b) }");
       return h.tick() == S::Success;
     }},
    {"sequence failure skips later children",
     [] {
       Harness h("sequence { condition(a) condition(b) condition(c) }");
       h.env.status["b"] = S::Failure;
       return h.tick() == S::Failure && h.env.ticks["c"] == 0;
     }},
    {"sequence running resumes at running child",
     [] {
       Harness h("sequence { condition(a) action(act) }");
       const bool r = h.tick() == S::Running && h.tick() == S::Running;
       h.reply["act"] = S::Success;
       h.serve();
       return r && h.tick() == S::Success && h.env.ticks["a"] == 1 && h.starts["act"] == 1;
     }},
    {"fallback success",
     [] {
       Harness h("fallback { condition(a) condition(b) }");
       h.env.status["a"] = S::Failure;
       return h.tick() == S::Success && h.env.ticks["b"] == 1;
     }},
    {"fallback failure",
     [] {
       Harness h("fallback { condition(a) condition(b) }");
       h.env.status["a"] = S::Failure;
       h.env.status["b"] = S::Failure;
       return h.tick() == S::Failure;
     }},
    {"fallback running resumes at running child",
     [] {
       Harness h("fallback { condition(a) action(act) condition(c) }");
       h.env.status["a"] = S::Failure;
       const bool r = h.tick() == S::Running && h.tick() == S::Running;
       h.reply["act"] = S::Failure;
       h.serve();
       return r && h.tick() == S::Success && h.env.ticks["a"] == 1 && h.env.ticks["c"] == 1;
     }},
    {"parallel success at M",
     [] {
       Harness h("parallel(2) { condition(a) condition(b) action(act) }");
       return h.tick() == S::Success && h.aborts["act"] == 1;
     }},
    {"parallel failure above N-M",
     [] {
       Harness h("parallel(2) { condition(a) condition(b) action(act) }");
       h.env.status["a"] = S::Failure;
       h.env.status["b"] = S::Failure;
       return h.tick() == S::Failure && h.aborts["act"] == 1;
     }},
    {"parallel running otherwise",
     [] {
       Harness h("parallel(3) { condition(a) action(x) action(y) }");
       const bool r = h.tick() == S::Running && h.tick() == S::Running && h.env.ticks["a"] == 1;
       h.reply["x"] = S::Success;
       h.reply["y"] = S::Success;
       h.serve();
       return r && h.tick() == S::Success && h.starts["x"] == 1;
     }},
    {"reactive sequence success",
     [] {
       Harness h("reactive_sequence { condition(a) condition(b) }");
       return h.tick() == S::Success;
     }},
    {"reactive sequence reticks earlier children",
     [] {
       Harness h("reactive_sequence { condition(a) action(act) }");
       for (int i = 0; i < 4; ++i)
         if (h.tick() != S::Running) return false;
       return h.env.ticks["a"] == 4 && h.starts["act"] == 1;
     }},
    {"reactive sequence halts on earlier failure",
     [] {
       Harness h("reactive_sequence { condition(a) action(act) }");
       h.tick();
       h.env.status["a"] = S::Failure;
       const bool f = h.tick() == S::Failure;
       h.tick();
       return f && h.aborts["act"] == 1 && h.tree.running_actions().empty();
     }},
};

// Reference parallel outcome: M successes win, more than N - M failures lose.
S parallel_reference(const std::vector<S>& s, int m) {
  const int n = static_cast<int>(s.size());
  const int succ = static_cast<int>(std::count(s.begin(), s.end(), S::Success));
  const int fail = static_cast<int>(std::count(s.begin(), s.end(), S::Failure));
  if (succ >= m) return S::Success;
  if (fail > n - m) return S::Failure;
  return S::Running;
}

// Sequence logic: any failure fails, else any running runs. Fallback is the dual.
S gate_reference(const std::vector<S>& s, bool sequence) {
  const S stop = sequence ? S::Failure : S::Success;
  if (std::find(s.begin(), s.end(), stop) != s.end()) return stop;
  if (std::find(s.begin(), s.end(), S::Running) != s.end()) return S::Running;
  return sequence ? S::Success : S::Failure;
}

CriterionResult bt_semantics(const fs::path&) {
  int rows_ok = 0;
  std::string failed;
  for (const Row& row : kRows) {
    bool ok = false;
    try {
      ok = row.check();
    } catch (const std::exception&) {
    }
    rows_ok += ok;
    if (!ok) failed += std::string(failed.empty() ? "" : ", ") + row.label;
  }
  const S all[] = {S::Success, S::Failure, S::Running};
  int cases = 0, mismatches = 0;
  for (int n = 1; n <= 4; ++n) {
    std::string leaves;
    for (int i = 0; i < n; ++i) leaves += " condition(c" + std::to_string(i) + ")";
    int combos = 1;
    for (int i = 0; i < n; ++i) combos *= 3;
    for (int code = 0; code < combos; ++code) {
      std::vector<S> s;
      for (int i = 0, c = code; i < n; ++i, c /= 3) s.push_back(all[c % 3]);
      for (int m = 1; m <= n; ++m) {
        Harness h("parallel(" + std::to_string(m) + ") {" + leaves + " }");
        for (int i = 0; i < n; ++i) h.env.status["c" + std::to_string(i)] = s[static_cast<std::size_t>(i)];
        const S got = h.tick();
        if (got != parallel_reference(s, m)) ++mismatches;
        if (m == n && got != gate_reference(s, true)) ++mismatches;
        if (m == 1 && got != gate_reference(s, false)) ++mismatches;
        ++cases;
      }
    }
  }
  const int rows = static_cast<int>(std::size(kRows));
  const bool ok = rows_ok == rows && mismatches == 0;
  std::string detail = fmt("table rows %.0f/%.0f, parallel cases %.0f, mismatches %.0f", rows_ok, rows, cases, mismatches);
  if (!failed.empty()) detail += "; failed: " + failed;
  return {"bt_semantics", ok, detail};
}

// ---- tracking mission ---------------------------------------------------

CriterionResult tracking(const fs::path& root) {
  const auto t0 = std::chrono::steady_clock::now();
  const service::MissionReport r = run(root, "tracking.json");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const service::Json& m = r.metrics;
  const double err = num(m, "final_base_error");
  const double sim = num(m, "sim_time");
  const int overlap = m.value("base_overlap_steps", -1);
  const int alternations = m.value("base_alternations", 0);
  const int arm_steps = m.value("arm_active_steps", 0);
  const int arm_outside = m.value("arm_outside_range_steps", -1);
  const bool ok = r.completed && err <= 0.05 && overlap == 0 && alternations >= 2 && arm_steps > 0 &&
                  arm_outside == 0 && sim <= 60.0 && wall <= 5.0;
  std::string detail = fmt("base error %.4f m, sim %.2f s, wall %.2f s", err, sim, wall);
  detail += fmt(", overlap %.0f, alternations %.0f, arm steps %.0f, arm outside box %.0f", overlap, alternations,
                arm_steps, arm_outside);
  return {"tracking_mission", ok, detail};
}

// ---- shared locomanipulation -------------------------------------------

CriterionResult shared_locomanipulation(const fs::path& root) {
  const service::MissionReport on = run(root, "tpo_shared_on.json");
  const service::MissionReport off = run(root, "tpo_shared_off.json");
  const service::MissionReport off_sw = run(root, "tpo_shared_off.json", "tpo_switches.jsonl");
  auto reached = [](const service::MissionReport& r) { return r.metrics.value("goals_reached", 0); };
  auto total = [](const service::MissionReport& r) { return r.metrics.value("goals_total", 0); };
  auto switches = [](const service::MissionReport& r) { return r.metrics.value("control_point_switches", -1); };
  const bool logged = on.rows > 0 && off.rows > 0 && off_sw.rows > 0;
  const bool ok = logged && total(on) == 3 && on.completed && switches(on) == 0 && reached(on) == total(on) &&
                  switches(off) == 0 && reached(off) < total(off) && off_sw.completed && switches(off_sw) >= 2 &&
                  reached(off_sw) == total(off_sw);
  std::string detail = fmt("on: %.0f/%.0f goals, %.0f switches", reached(on), total(on), switches(on));
  detail += fmt("; off: %.0f/%.0f goals, %.0f switches", reached(off), total(off), switches(off));
  detail += fmt("; off scripted: %.0f/%.0f goals, %.0f switches", reached(off_sw), total(off_sw), switches(off_sw));
  return {"shared_locomanipulation", ok, detail};
}

// ---- cooperative transport ---------------------------------------------

CriterionResult cooperative_transport(const fs::path& root) {
  const auto scenario = service::load_scenario(root / "scenarios" / "bimanual_transport.json");
  const service::MissionReport r = run(root, "bimanual_transport.json");
  const service::Json& m = r.metrics;
  const double m_bar = num(m, "m_bar"), f_bar = num(m, "f_bar");
  const auto& g = scenario.bimanual.grasp;
  const bool pipeline = std::abs(f_bar - bimanual::grasp_force(m_bar, g.mu_s, g.k_margin)) <= 1e-9;
  const double drift = num(m, "max_drift"), force_err = num(m, "max_force_error");
  const double moved = num(m, "object_displacement"), yaw = num(m, "base_yaw_change");
  const double duration = num(m, "transport_duration");
  const int slips = m.value("slip_count", -1);
  const bool path = std::abs(moved - 0.5) <= 0.02 && std::abs(yaw - 0.2) <= 0.01;
  const bool ok = r.completed && pipeline && slips == 0 && duration >= 30.0 - 1e-6 && drift <= 1e-3 &&
                  force_err <= 3.0 && path;
  std::string detail = fmt("f_bar %.2f N, slips %.0f, drift %.3g m over %.1f s", f_bar, slips, drift, duration);
  detail += fmt(", force error %.3f N, moved %.3f m, yaw %.3f rad", force_err, moved, yaw);
  return {"cooperative_transport", ok, detail};
}

// ---- admittance ---------------------------------------------------------

CriterionResult admittance(const fs::path&) {
  const double dt = 0.01;
  double worst = 0.0;
  for (const auto& [m, d, tau] : {std::tuple{1.0, 10.0, 2.0}, std::tuple{0.5, 1.0, -0.3}, std::tuple{2.0, 1.0, 0.7}}) {
    control::AdmittanceParams params{VecX::Constant(1, m), VecX::Zero(1), VecX::Constant(1, d), VecX::Zero(1), dt};
    control::PosturalReference ref{VecX::Zero(1), VecX::Zero(1)};
    const double time_constant = m / d;
    const int settle = static_cast<int>(std::lround(5.0 * time_constant / dt));
    for (int k = 1; k <= 2 * settle; ++k) {
      ref = control::admittance_step(ref.q_ref, VecX::Constant(1, tau), params, ref);
      if (k < settle) continue;
      const double exact = tau / d * (1.0 - std::exp(-d * k * dt / m));
      worst = std::max(worst, std::abs(ref.qd_ref[0] - exact) / std::abs(exact));
    }
  }
  return {"admittance_step_response", worst <= 0.01, fmt("max relative error after 5 tau %.4f%%", 100.0 * worst)};
}

// ---- determinism --------------------------------------------------------

CriterionResult determinism(const fs::path& root) {
  const std::pair<const char*, const char*> runs[] = {{"tracking.json", ""},
                                                      {"tpo_shared_on.json", ""},
                                                      {"tpo_shared_off.json", ""},
                                                      {"tpo_shared_off.json", "tpo_switches.jsonl"},
                                                      {"bimanual_transport.json", ""}};
  int identical = 0;
  std::string differing;
  for (const auto& [scenario, trace] : runs) {
    const auto a = run(root, scenario, trace);
    const auto b = run(root, scenario, trace);
    if (a.csv == b.csv && a.jsonl == b.jsonl && !a.csv.empty()) {
      ++identical;
    } else {
      differing += std::string(differing.empty() ? "" : ", ") + scenario;
    }
  }
  const int total = static_cast<int>(std::size(runs));
  std::string detail = fmt("%.0f/%.0f scenario logs byte-identical", identical, total);
  if (!differing.empty()) detail += "; differ: " + differing;
  return {"determinism", identical == total, detail};
}

}  // namespace

std::vector<CriterionResult> run_all(const fs::path& root, const std::function<void(const CriterionResult&)>& report) {
  using Check = CriterionResult (*)(const fs::path&);
  const std::pair<const char*, Check> checks[] = {
      {"grasp_force", grasp_force_values},
      {"mass_estimation", mass_estimation},
      {"jacobian", jacobian},
      {"vtr_split", vtr_split},
      {"bt_semantics", bt_semantics},
      {"tracking_mission", tracking},
      {"shared_locomanipulation", shared_locomanipulation},
      {"cooperative_transport", cooperative_transport},
      {"admittance_step_response", admittance},
      {"determinism", determinism},
  };
  std::vector<CriterionResult> out;
  for (const auto& [name, check] : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = check(root);
    } catch (const std::exception& e) {
      r = {name, false, std::string("error: ") + e.what()};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.name == "mass_estimation" && r.seconds >= 5.0) {
      r.passed = false;
      r.detail += fmt(", took %.2f s", r.seconds);
    }
    if (r.name == "jacobian" && r.seconds >= 10.0) {
      r.passed = false;
      r.detail += fmt(", took %.2f s", r.seconds);
    }
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  return std::string(r.passed ? "PASS " : "FAIL ") + r.name + " (" + r.detail + ")";
}

int run_and_print(const fs::path& root, std::ostream& out) {
  int failures = 0, total = 0;
  run_all(root, [&](const CriterionResult& r) {
    out << format_result(r) << std::endl;
    failures += r.passed ? 0 : 1;
    ++total;
  });
  out << (total - failures) << "/" << total << " criteria passed" << std::endl;
  return failures;
}

}  // namespace tpo::acceptance
