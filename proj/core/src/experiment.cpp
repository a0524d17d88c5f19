#include "layeralloc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include <json.hpp>

#include "layeralloc/workload.hpp"

namespace layeralloc {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kPresetNodes[] = {16, 32, 64};
constexpr std::size_t kStrongEncoders = 80;
constexpr std::size_t kWeakEncoders[] = {40, 80, 160};
// Exact solutions are only computed up to this many nodes.
constexpr std::size_t kOptimalMaxNodes = 32;

std::optional<double> reduction(double even, double value) {
  if (!(even > 0.0)) return std::nullopt;
  return (even - value) / even * 100.0;
}

std::string describe_memory_overflow(const AllocationProblem& problem, const PartitionIndex& pi) {
  const auto ok = memory_feasible(problem, pi);
  std::ostringstream os;
  os << "allocation exceeds memory on device(s)";
  for (std::size_t i = 0; i < ok.size(); ++i) {
    if (!ok[i]) os << ' ' << i;
  }
  return os.str();
}

StrategyOutcome run_strategy(const AllocationProblem& problem, Strategy strategy,
                             const ScenarioConfig& config) {
  StrategyOutcome out;
  out.strategy = strategy;
  try {
    switch (strategy) {
      case Strategy::Even: out.allocation = even_allocate(problem); break;
      case Strategy::Heuristic: out.allocation = heuristic_allocate(problem, config.heuristic); break;
      case Strategy::OptimalDp: out.allocation = optimal_dp(problem); break;
      case Strategy::OptimalExhaustive:
        out.allocation = optimal_exhaustive(problem, config.enumeration_cap);
        break;
      case Strategy::OptimalPermuted:
        out.allocation = optimal_permuted(problem, config.permuted_max_devices);
        break;
    }
  } catch (const RefusalError& e) {
    out.status = OutcomeStatus::Refused;
    out.message = e.what();
    return out;
  } catch (const InfeasibleError& e) {
    out.status = OutcomeStatus::Infeasible;
    out.message = e.what();
    return out;
  }

  const AllocationResult& alloc = *out.allocation;
  const AllocationProblem staged = problem.reordered(alloc.device_order);
  if (!alloc.feasible) {
    out.status = OutcomeStatus::Infeasible;
    out.message = describe_memory_overflow(staged, alloc.partition);
    return out;
  }
  TrainingOptions options;
  options.iterations = config.iterations;
  options.seconds_per_flop = config.calib;
  options.backward_ratio = config.beta;
  out.timing = run_training(staged, alloc.partition, options);
  return out;
}

void fill_reductions(ComparisonReport& report) {
  const StrategyOutcome* even = report.find(Strategy::Even);
  if (even == nullptr || !even->ok()) return;
  const auto& et = *even->timing;
  for (auto& o : report.outcomes) {
    if (!o.ok()) continue;
    const auto& t = *o.timing;
    o.reduction_makespan_pct = reduction(et.makespan.mean, t.makespan.mean);
    o.reduction_total_pct = reduction(et.makespan.total, t.makespan.total);
    o.reduction_stage_max_pct = reduction(et.stage_time_max.mean, t.stage_time_max.mean);
    o.reduction_objective_pct = reduction(even->allocation->objective, o.allocation->objective);
  }
}

void check_orderings(ComparisonReport& report) {
  auto ok = [&](Strategy s) -> const StrategyOutcome* {
    const auto* o = report.find(s);
    return o != nullptr && o->ok() ? o : nullptr;
  };
  const auto* even = ok(Strategy::Even);
  const auto* heur = ok(Strategy::Heuristic);
  const auto* dp = ok(Strategy::OptimalDp);
  const auto* exh = ok(Strategy::OptimalExhaustive);
  const auto* perm = ok(Strategy::OptimalPermuted);
  const std::string where = report.scenario + ": ";

  if (dp && heur && dp->allocation->objective > heur->allocation->objective) {
    throw InvariantViolation(where + "optimal-dp objective exceeds heuristic objective");
  }
  if (dp && even && dp->allocation->objective > even->allocation->objective) {
    throw InvariantViolation(where + "optimal-dp objective exceeds even objective");
  }
  if (dp && exh && (dp->allocation->objective != exh->allocation->objective ||
                    dp->allocation->partition != exh->allocation->partition)) {
    throw InvariantViolation(where + "optimal-dp and optimal-exhaustive disagree");
  }
  if (dp && perm && perm->allocation->objective > dp->allocation->objective) {
    throw InvariantViolation(where + "optimal-permuted objective exceeds optimal-dp objective");
  }

  if (heur && even && heur->allocation->objective > even->allocation->objective) {
    report.warnings.push_back(where + "heuristic objective " +
                              std::to_string(heur->allocation->objective) +
                              " exceeds even objective " +
                              std::to_string(even->allocation->objective));
  }
  if (heur && even && heur->timing->makespan.mean > even->timing->makespan.mean) {
    report.warnings.push_back(where + "heuristic makespan exceeds even makespan");
  }
  if (dp && !heur && report.find(Strategy::Heuristic) != nullptr) {
    report.warnings.push_back(where + "heuristic failed although a feasible partition exists");
  }
}

// --- JSON config -----------------------------------------------------------

template <typename T>
void read_field(const ordered_json& obj, const char* key, T& target) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) target = it->get<T>();
}

void expect_object(const ordered_json& obj, const std::string& what) {
  if (!obj.is_object()) throw ContractError("config: " + what + " must be an object");
}

ScenarioConfig scenario_from_json(const ordered_json& j) {
  expect_object(j, "scenario");
  ScenarioConfig c;
  read_field(j, "name", c.name);
  if (auto it = j.find("bert"); it != j.end()) {
    expect_object(*it, "bert");
    auto& b = c.bert;
    read_field(*it, "num_encoders", b.num_encoders);
    read_field(*it, "hidden", b.hidden);
    read_field(*it, "heads", b.heads);
    read_field(*it, "intermediate", b.intermediate);
    read_field(*it, "seq_len", b.seq_len);
    read_field(*it, "batch", b.batch);
    read_field(*it, "vocab_size", b.vocab_size);
    read_field(*it, "max_positions", b.max_positions);
    read_field(*it, "type_vocab", b.type_vocab);
    read_field(*it, "num_labels", b.num_labels);
  }
  if (auto it = j.find("fleet"); it != j.end()) {
    expect_object(*it, "fleet");
    auto& f = c.fleet;
    read_field(*it, "device_count", f.device_count);
    read_field(*it, "seed", f.seed);
    read_field(*it, "slow_down_min", f.slow_down_min);
    read_field(*it, "slow_down_max", f.slow_down_max);
    read_field(*it, "slow_down_mean", f.slow_down_mean);
    read_field(*it, "slow_down_std", f.slow_down_std);
    read_field(*it, "base_bench_time", f.base_bench_time);
    read_field(*it, "mem_bytes_base", f.mem_bytes_base);
    read_field(*it, "mem_jitter", f.mem_jitter);
    read_field(*it, "comm_latency_base", f.comm_latency_base);
    read_field(*it, "comm_jitter", f.comm_jitter);
  }
  if (auto it = j.find("strategies"); it != j.end()) {
    if (!it->is_array()) throw ContractError("config: strategies must be an array");
    c.strategies.clear();
    for (const auto& s : *it) c.strategies.push_back(parse_strategy(s.get<std::string>()));
  }
  read_field(j, "iterations", c.iterations);
  read_field(j, "calib", c.calib);
  read_field(j, "beta", c.beta);
  read_field(j, "enumeration_cap", c.enumeration_cap);
  read_field(j, "permuted_max_devices", c.permuted_max_devices);
  if (auto it = j.find("heuristic"); it != j.end()) {
    expect_object(*it, "heuristic");
    read_field(*it, "max_iter", c.heuristic.max_iter);
    if (auto s = it->find("coarse_max_sweeps"); s != it->end() && !s->is_null()) {
      c.heuristic.coarse_max_sweeps = s->get<std::size_t>();
    }
  }
  c.validate();
  return c;
}

ordered_json scenario_to_json(const ScenarioConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  const auto& b = c.bert;
  j["bert"] = {{"num_encoders", b.num_encoders}, {"hidden", b.hidden},
               {"heads", b.heads},               {"intermediate", b.intermediate},
               {"seq_len", b.seq_len},           {"batch", b.batch},
               {"vocab_size", b.vocab_size},     {"max_positions", b.max_positions},
               {"type_vocab", b.type_vocab},     {"num_labels", b.num_labels}};
  const auto& f = c.fleet;
  j["fleet"] = {{"device_count", f.device_count},
                {"seed", f.seed},
                {"slow_down_min", f.slow_down_min},
                {"slow_down_max", f.slow_down_max},
                {"slow_down_mean", f.slow_down_mean},
                {"slow_down_std", f.slow_down_std},
                {"base_bench_time", f.base_bench_time},
                {"mem_bytes_base", f.mem_bytes_base},
                {"mem_jitter", f.mem_jitter},
                {"comm_latency_base", f.comm_latency_base},
                {"comm_jitter", f.comm_jitter}};
  j["strategies"] = ordered_json::array();
  for (Strategy s : c.strategies) j["strategies"].push_back(std::string(to_string(s)));
  j["iterations"] = c.iterations;
  j["calib"] = c.calib;
  j["beta"] = c.beta;
  j["enumeration_cap"] = c.enumeration_cap;
  j["permuted_max_devices"] = c.permuted_max_devices;
  j["heuristic"] = {{"max_iter", c.heuristic.max_iter}, {"coarse_max_sweeps", nullptr}};
  if (c.heuristic.coarse_max_sweeps) j["heuristic"]["coarse_max_sweeps"] = *c.heuristic.coarse_max_sweeps;
  return j;
}

ScenarioConfig preset_config(std::string name, std::size_t encoders, std::size_t nodes,
                             std::uint64_t seed) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.bert.num_encoders = encoders;
  c.fleet.device_count = nodes - 1;  // one node hosts the parameter server
  c.fleet.seed = preset_fleet_seed(seed, nodes);
  c.strategies = {Strategy::Even, Strategy::Heuristic};
  if (nodes <= kOptimalMaxNodes) c.strategies.push_back(Strategy::OptimalDp);
  return c;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (strategies.empty()) throw ContractError("ScenarioConfig: strategies must be non-empty");
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    for (std::size_t k = i + 1; k < strategies.size(); ++k) {
      if (strategies[i] == strategies[k]) {
        throw ContractError("ScenarioConfig: duplicate strategy " +
                            std::string(to_string(strategies[i])));
      }
    }
  }
  if (iterations < 1) throw ContractError("ScenarioConfig: iterations must be >= 1");
  if (!(calib > 0.0) || !std::isfinite(calib)) {
    throw ContractError("ScenarioConfig: calib must be positive and finite");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ContractError("ScenarioConfig: beta must be non-negative and finite");
  }
  bert.validate();
  fleet.validate();
  heuristic.validate();
}

std::string_view to_string(OutcomeStatus s) noexcept {
  switch (s) {
    case OutcomeStatus::Ok: return "ok";
    case OutcomeStatus::Infeasible: return "infeasible";
    case OutcomeStatus::Refused: return "refused";
  }
  return "unknown";
}

const StrategyOutcome* ComparisonReport::find(Strategy s) const noexcept {
  for (const auto& o : outcomes) {
    if (o.strategy == s) return &o;
  }
  return nullptr;
}

bool ComparisonReport::all_infeasible() const noexcept {
  return std::none_of(outcomes.begin(), outcomes.end(),
                      [](const StrategyOutcome& o) { return o.ok(); });
}

ComparisonReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  ComparisonReport report;
  report.scenario = config.name;
  report.seed = config.fleet.seed;
  report.devices = config.fleet.device_count;
  report.layers = bert_layer_count(config.bert.num_encoders);
  report.iterations = config.iterations;

  std::optional<AllocationProblem> problem;
  try {
    problem.emplace(bert_layer_profiles(config.bert), sample_fleet(config.fleet), config.calib);
  } catch (const InfeasibleError& e) {
    for (Strategy s : config.strategies) {
      report.outcomes.push_back({s, OutcomeStatus::Infeasible, e.what(), {}, {}, {}, {}, {}, {}});
    }
    return report;
  }

  for (Strategy s : config.strategies) report.outcomes.push_back(run_strategy(*problem, s, config));
  fill_reductions(report);
  check_orderings(report);
  return report;
}

std::vector<ComparisonReport> run_scenarios(std::span<const ScenarioConfig> configs) {
  std::vector<std::future<ComparisonReport>> pending;
  pending.reserve(configs.size());
  for (const auto& c : configs) {
    pending.push_back(std::async(std::launch::async, [&c] { return run_scenario(c); }));
  }
  std::vector<ComparisonReport> reports;
  reports.reserve(configs.size());
  for (auto& f : pending) reports.push_back(f.get());
  return reports;
}

std::uint64_t preset_fleet_seed(std::uint64_t seed, std::size_t nodes) noexcept {
  return seed * 1000 + nodes;
}

std::vector<ScenarioConfig> preset_strong_scaling(std::uint64_t seed) {
  std::vector<ScenarioConfig> out;
  for (std::size_t nodes : kPresetNodes) {
    out.push_back(preset_config("strong-E" + std::to_string(kStrongEncoders) + "-N" +
                                    std::to_string(nodes),
                                kStrongEncoders, nodes, seed));
  }
  return out;
}

std::vector<ScenarioConfig> preset_weak_scaling(std::uint64_t seed) {
  std::vector<ScenarioConfig> out;
  for (std::size_t k = 0; k < std::size(kPresetNodes); ++k) {
    const std::size_t nodes = kPresetNodes[k];
    const std::size_t encoders = kWeakEncoders[k];
    out.push_back(preset_config("weak-E" + std::to_string(encoders) + "-N" + std::to_string(nodes),
                                encoders, nodes, seed));
  }
  return out;
}

std::vector<ScenarioConfig> preset_by_name(std::string_view name, std::uint64_t seed) {
  if (name == "strong") return preset_strong_scaling(seed);
  if (name == "weak") return preset_weak_scaling(seed);
  throw ContractError("unknown preset '" + std::string(name) + "' (expected strong or weak)");
}

std::vector<ScenarioConfig> parse_scenarios_json(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractError(std::string("config: invalid JSON: ") + e.what());
  }
  std::vector<ScenarioConfig> out;
  try {
    if (doc.is_object() && doc.contains("scenarios")) {
      const auto& list = doc.at("scenarios");
      if (!list.is_array() || list.empty()) {
        throw ContractError("config: scenarios must be a non-empty array");
      }
      for (const auto& s : list) out.push_back(scenario_from_json(s));
    } else {
      out.push_back(scenario_from_json(doc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("config: schema error: ") + e.what());
  }
  return out;
}

std::string scenarios_to_json(std::span<const ScenarioConfig> configs, int indent) {
  ordered_json doc;
  doc["scenarios"] = ordered_json::array();
  for (const auto& c : configs) doc["scenarios"].push_back(scenario_to_json(c));
  return doc.dump(indent);
}

}  // namespace layeralloc
