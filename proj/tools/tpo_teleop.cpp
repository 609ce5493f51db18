#include <atomic>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "tpo/acceptance/acceptance.hpp"
#include "tpo/bt/parser.hpp"
#include "tpo/service/mission.hpp"
#include "tpo/service/server.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct Common {
  std::string scenario;
  std::string tree;
  std::string trace;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--scenario", c.scenario, "Scenario JSON file")->required();
  app->add_option("--tree", c.tree, "Behavior tree file (overrides the scenario)");
  app->add_option("--trace", c.trace, "Operator trace JSONL file (overrides the scenario)");
  app->add_option("--seed", c.seed, "Noise seed (overrides the scenario)");
}

int cmd_run(const Common& c, const std::string& out) {
  tpo::service::RunOptions opt;
  opt.scenario = c.scenario;
  opt.tree = c.tree;
  opt.trace = c.trace;
  opt.seed = c.seed;
  opt.out_dir = out;
  const tpo::service::MissionReport report = tpo::service::run_mission(opt);
  std::cout << report.metrics.dump(2) << "\n";
  return report.completed ? 0 : 2;
}

int cmd_serve(const Common& c, const tpo::service::ServerOptions& sopt) {
  tpo::service::Scenario scenario = tpo::service::load_scenario(c.scenario);
  const std::string tree_path = c.tree.empty() ? scenario.tree : c.tree;
  const std::string trace_path = c.trace.empty() ? scenario.trace : c.trace;
  std::optional<tpo::bt::BtNode> tree;
  if (!tree_path.empty()) tree = tpo::bt::load_tree(tree_path);
  tpo::service::OperatorTrace trace =
      trace_path.empty() ? tpo::service::OperatorTrace{} : tpo::service::load_trace(trace_path);
  tpo::service::Mission mission(std::move(scenario), std::move(tree), std::move(trace), c.seed);

  tpo::service::TeleopServer server(sopt);
  const std::uint16_t port = server.start();
  std::cerr << "listening on " << sopt.bind << ":" << port << "\n";
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  tpo::service::serve_mission(mission, server, sopt, g_stop);
  server.stop();
  std::cout << mission.metrics().dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleoperation mission runner and live server"};
  app.require_subcommand(1);

  Common run_common;
  std::string out;
  CLI::App* run = app.add_subcommand("run", "Run a mission headless and write logs");
  add_common(run, run_common);
  run->add_option("--out", out, "Output directory for log.csv, log.jsonl and report.json");

  Common serve_common;
  tpo::service::ServerOptions sopt;
  CLI::App* serve = app.add_subcommand("serve", "Run a mission live behind the wire protocol");
  add_common(serve, serve_common);
  serve->add_option("--port", sopt.port, "TCP port (0 picks one)");
  serve->add_option("--bind", sopt.bind, "Bind address");
  serve->add_option("--rate", sopt.rate, "Real-time factor, 0 for as fast as possible")->check(CLI::NonNegativeNumber);

  std::string root = ".";
  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--root", root, "Repository root holding scenarios/, trees/ and traces/");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run_common, out);
    if (serve->parsed()) return cmd_serve(serve_common, sopt);
    if (verify->parsed()) return tpo::acceptance::run_and_print(root, std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
