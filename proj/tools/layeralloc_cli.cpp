// layeralloc: run layer-allocation experiments from the command line.
//
//   layeralloc run --config scenario.json [--out DIR] [--format json|csv|md]
//   layeralloc preset --name strong|weak [--seed N] [--out DIR] [--format ...] [--emit-config]
//   layeralloc profile [--encoders E] [--devices D] [--seed N] [--out FILE]
//   layeralloc allocate --profiles FILE [--strategy NAME] [--max-iter N]
//
// Exit codes: 0 success, 1 usage error, 2 every strategy infeasible,
// 3 internal invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "layeralloc/exact.hpp"
#include "layeralloc/experiment.hpp"
#include "layeralloc/heuristic.hpp"
#include "layeralloc/profile_io.hpp"
#include "layeralloc/profiling.hpp"
#include "layeralloc/report.hpp"
#include "layeralloc/workload.hpp"

namespace fs = std::filesystem;
using namespace layeralloc;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kAllInfeasible = 2, kInvariant = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  const fs::path p(out_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UsageError("cannot write " + out_path);
  out << text;
  std::cerr << "wrote " << p.string() << '\n';
}

std::string report_path(const std::string& out_dir, ReportFormat format) {
  if (out_dir.empty()) return {};
  return (fs::path(out_dir) / ("report." + std::string(file_extension(format)))).string();
}

int emit_reports(const std::vector<ComparisonReport>& reports, ReportFormat format,
                 const std::string& out_dir) {
  for (const auto& r : reports) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  }
  write_output(emit_report(reports, format), report_path(out_dir, format));
  for (const auto& r : reports) {
    if (r.all_infeasible()) {
      std::cerr << "error: every strategy is infeasible for " << r.scenario << '\n';
      return kAllInfeasible;
    }
  }
  return kOk;
}

std::string allocation_json(const AllocationResult& r) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(to_string(r.strategy));
  j["partition"] = std::vector<std::size_t>(r.partition.bounds().begin(), r.partition.bounds().end());
  j["device_order"] = r.device_order;
  j["workloads"] = r.workloads;
  j["objective"] = r.objective;
  j["memory_feasible"] = r.feasible;
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load-balanced layer allocation for model-parallel training"};
  app.require_subcommand(1);

  std::string format_name = "json";
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run the scenarios in a JSON config");
  std::string config_path;
  run->add_option("--config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "Directory for report.<ext> (default: stdout)");
  run->add_option("--format", format_name, "json, csv or md");

  auto* preset = app.add_subcommand("preset", "Run a strong- or weak-scaling preset");
  std::string preset_name;
  std::uint64_t seed = 42;
  bool emit_config = false;
  preset->add_option("--name", preset_name, "strong or weak")->required();
  preset->add_option("--seed", seed, "Fleet seed");
  preset->add_option("--out", out_dir, "Directory for report.<ext> (default: stdout)");
  preset->add_option("--format", format_name, "json, csv or md");
  preset->add_flag("--emit-config", emit_config, "Print the preset as a config instead of running it");

  auto* profile = app.add_subcommand("profile", "Write BERT layer and sampled fleet profiles");
  BertSpec bert;
  FleetSpec fleet;
  std::string profile_out;
  profile->add_option("--encoders", bert.num_encoders, "Encoder count");
  profile->add_option("--seq-len", bert.seq_len, "Sequence length");
  profile->add_option("--batch", bert.batch, "Batch size");
  profile->add_option("--devices", fleet.device_count, "Device count");
  profile->add_option("--seed", fleet.seed, "Fleet seed");
  profile->add_option("--out", profile_out, "Output file (default: stdout)");

  auto* allocate = app.add_subcommand("allocate", "Allocate layers for a profiles file");
  std::string profiles_path;
  std::string strategy_name = "heuristic";
  HeuristicConfig heuristic;
  double spf = 1.0;
  allocate->add_option("--profiles", profiles_path, "Profiles JSON")->required();
  allocate->add_option("--strategy", strategy_name,
                       "even, heuristic, optimal-dp, optimal-exhaustive or optimal-permuted");
  allocate->add_option("--max-iter", heuristic.max_iter, "Fine-tuning pass limit");
  allocate->add_option("--seconds-per-flop", spf, "FLOP to seconds conversion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      const auto format = parse_report_format(format_name);
      const auto configs = parse_scenarios_json(read_file(config_path));
      return emit_reports(run_scenarios(configs), format, out_dir);
    }
    if (*preset) {
      const auto format = parse_report_format(format_name);
      const auto configs = preset_by_name(preset_name, seed);
      if (emit_config) {
        write_output(scenarios_to_json(configs) + "\n",
                     out_dir.empty() ? "" : (fs::path(out_dir) / "config.json").string());
        return kOk;
      }
      return emit_reports(run_scenarios(configs), format, out_dir);
    }
    if (*profile) {
      const ProfileSet set{bert_layer_profiles(bert), sample_fleet(fleet)};
      write_output(profiles_to_json(set) + "\n", profile_out);
      return kOk;
    }
    if (*allocate) {
      const Strategy strategy = parse_strategy(strategy_name);
      auto set = profiles_from_json(read_file(profiles_path));
      const AllocationProblem problem(std::move(set.layers), std::move(set.devices), spf);
      AllocationResult result = [&] {
        switch (strategy) {
          case Strategy::Even: return even_allocate(problem);
          case Strategy::Heuristic: return heuristic_allocate(problem, heuristic);
          case Strategy::OptimalDp: return optimal_dp(problem);
          case Strategy::OptimalExhaustive: return optimal_exhaustive(problem);
          case Strategy::OptimalPermuted: return optimal_permuted(problem);
        }
        throw ContractError("unhandled strategy");
      }();
      std::cout << allocation_json(result);
      return result.feasible ? kOk : kAllInfeasible;
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInvariant;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kAllInfeasible;
  } catch (const RefusalError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
