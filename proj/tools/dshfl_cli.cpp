#include "dshfl/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (const char ch : text) {
    if (ch == ',') {
      out.push_back(item);
      item.clear();
    } else if (ch != ' ') {
      item += ch;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

void print_config_error(const dshfl::ConfigError& e) {
  std::cerr << "config errors:\n";
  for (const auto& issue : e.issues()) std::cerr << "  " << issue.path << ": " << issue.message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-driven hierarchical federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run one experiment and write rounds/bounds/summary CSVs");
  run->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Seed (defaults to the first configured seed)");
  run->add_option("--out", out_dir, "Output directory (defaults to the config's output)");

  std::string axis, values;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Sweep one axis over a list of values and seeds");
  sweep->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "s | cg | association | schedule")->required();
  sweep->add_option("--values", values, "Comma-separated values, e.g. 0,5,20 or 5:25,15:15")->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* fair = app.add_subcommand("fairness", "Compare each group alone against the joint run");
  fair->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  fair->add_option("--out", out_dir, "Output directory");

  std::string ramp;
  auto* sched = app.add_subcommand("schedule", "Compare a ramped sync time against fixed S = ramp end");
  sched->add_option("--config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  sched->add_option("--ramp", ramp, "start,end,step")->required();
  sched->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = dshfl::parse_config(std::filesystem::path(config_path));
    const std::filesystem::path out = out_dir.empty() ? config.output : std::filesystem::path(out_dir);

    if (*run) {
      const auto s = seed.value_or(config.seeds.front());
      const auto result = dshfl::run_experiment(config, s, out);
      std::cout << "U=" << result.simulation.num_rounds() << " f_final=" << result.simulation.final_loss
                << " acc_final=" << result.final_accuracy << " -> " << out.string() << '\n';
    } else if (*sweep) {
      dshfl::SweepSpec spec;
      spec.axis = dshfl::parse_axis(axis);
      spec.values = split_list(values);
      spec.seeds = config.seeds;
      const auto result = dshfl::run_sweep(config, spec, out, threads);
      std::size_t failed = 0;
      for (const auto& p : result.points) {
        std::cout << p.value << ": loss " << p.mean_loss << " +- " << p.se_loss << ", accuracy " << p.mean_accuracy
                  << " +- " << p.se_accuracy << " (" << p.runs - p.failed << '/' << p.runs << " ok)\n";
        failed += p.failed;
      }
      return failed == 0 ? 0 : 3;
    } else if (*fair) {
      const auto rows = dshfl::fairness_experiment(config, out);
      for (const auto& r : rows) {
        std::cout << "seed " << r.seed << " group " << r.group + 1 << " (" << r.clients << " clients) " << r.regime
                  << ": accuracy " << r.accuracy << '\n';
      }
    } else if (*sched) {
      const auto parts = split_list(ramp);
      if (parts.size() != 3) throw std::invalid_argument("--ramp expects start,end,step");
      const dshfl::RampSync r{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
      const auto points = dshfl::schedule_experiment(config, r, out);
      std::cout << points.size() << " schedule points -> " << (out / "schedule.csv").string() << '\n';
    }
  } catch (const dshfl::ConfigError& e) {
    print_config_error(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
