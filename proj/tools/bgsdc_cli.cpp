#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <bgsdc/errors.hpp>

#include "harness/config.hpp"
#include "harness/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_file(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string describe(harness::Command c) {
  switch (c) {
    case harness::Command::GyroValidate: return "convergence against closed-form gyration in a uniform field";
    case harness::Command::MirrorConvergence: return "self-convergence orders in the magnetic mirror";
    case harness::Command::MirrorReflections: return "sigma[B] at mirror reflection points";
    case harness::Command::MirrorEnergy: return "long-time energy error in the magnetic mirror";
    case harness::Command::SolovevAccuracy: return "trajectory defect against a reference run in the Solov'ev field";
    case harness::Command::SolovevEnergy: return "total energy error in the Solov'ev field";
    case harness::Command::WorkTable: return "measured and predicted f-evaluation counts";
    case harness::Command::Trajectory: return "a single stored trajectory";
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boris-GMRES-SDC particle integrator experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  bool paper_scale = false;
  bool retain_nodes = false;
  for (std::string_view name : harness::command_names()) {
    CLI::App* sub = app.add_subcommand(std::string(name), describe(*harness::parse_command(name)));
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--paper-scale", paper_scale, "use the long-running run lengths");
    sub->add_flag("--retain-nodes", retain_nodes, "keep per-node values (trajectory command)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string command_name = app.get_subcommands().front()->get_name();
  const harness::Command command = *harness::parse_command(command_name);

  harness::ExperimentConfig cfg;
  try {
    cfg = harness::resolve(harness::parse_file(config_path), command, paper_scale);
    if (retain_nodes) cfg.retain_nodes = true;
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / (command_name + ".resolved.cfg"), [&](std::ostream& o) { harness::write_resolved(o, cfg); });
    const harness::ExperimentOutput result = harness::run_experiment(cfg);
    write_file(dir / (command_name + ".csv"), [&](std::ostream& o) { result.table.write(o); });
    if (result.extra) {
      write_file(dir / (command_name + ".nodes.csv"), [&](std::ostream& o) { result.extra->write(o); });
    }
    std::cout << "wrote " << (dir / (command_name + ".csv")).string() << " (" << result.table.rows.size()
              << " rows)\n";
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bgsdc::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const bgsdc::DegeneratePointError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
