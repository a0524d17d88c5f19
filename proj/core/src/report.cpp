#include "layeralloc/report.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace layeralloc {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json aggregate_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"min", a.min}, {"max", a.max}, {"total", a.total}};
}

ordered_json outcome_json(const StrategyOutcome& o) {
  ordered_json j;
  j["strategy"] = std::string(to_string(o.strategy));
  j["status"] = std::string(to_string(o.status));
  j["message"] = o.message;
  if (o.allocation) {
    const auto& a = *o.allocation;
    j["partition"] = std::vector<std::size_t>(a.partition.bounds().begin(), a.partition.bounds().end());
    j["device_order"] = a.device_order;
    j["workloads_s"] = a.workloads;
    j["objective_s"] = a.objective;
    j["memory_feasible"] = a.feasible;
  } else {
    j["partition"] = nullptr;
    j["device_order"] = nullptr;
    j["workloads_s"] = nullptr;
    j["objective_s"] = nullptr;
    j["memory_feasible"] = false;
  }
  if (o.timing) {
    const auto& t = *o.timing;
    j["timing"] = {{"forward_s", aggregate_json(t.forward)},
                   {"backward_s", aggregate_json(t.backward)},
                   {"makespan_s", aggregate_json(t.makespan)},
                   {"stage_max_s", aggregate_json(t.stage_time_max)}};
  } else {
    j["timing"] = nullptr;
  }
  j["reduction_vs_even_pct"] = {{"makespan_mean", optional_number(o.reduction_makespan_pct)},
                                {"makespan_total", optional_number(o.reduction_total_pct)},
                                {"stage_max", optional_number(o.reduction_stage_max_pct)},
                                {"objective", optional_number(o.reduction_objective_pct)}};
  return j;
}

std::string emit_json(std::span<const ComparisonReport> reports) {
  ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["scenarios"] = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json s;
    s["scenario"] = r.scenario;
    s["seed"] = r.seed;
    s["D"] = r.devices;
    s["L"] = r.layers;
    s["iterations"] = r.iterations;
    s["strategies"] = ordered_json::array();
    for (const auto& o : r.outcomes) s["strategies"].push_back(outcome_json(o));
    s["warnings"] = r.warnings;
    doc["scenarios"].push_back(std::move(s));
  }
  return doc.dump(2) + "\n";
}

std::string number(double v, int precision) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string fixed(double v, int decimals) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string emit_csv(std::span<const ComparisonReport> reports) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& o : r.outcomes) {
      os << csv_field(r.scenario) << ',' << to_string(o.strategy) << ',' << r.devices << ','
         << r.layers << ',';
      if (o.ok()) {
        os << number(o.allocation->objective, 12) << ',' << number(o.timing->makespan.mean, 12)
           << ',' << number(o.timing->stage_time_max.mean, 12) << ',';
        if (o.reduction_makespan_pct) os << number(*o.reduction_makespan_pct, 6);
      } else {
        os << ",,,";
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string emit_markdown(std::span<const ComparisonReport> reports) {
  std::ostringstream os;
  os << "| scenario | strategy | D | L | objective (s) | makespan (s) | stage max (s) | "
        "reduction vs even (%) |\n";
  os << "|---|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : reports) {
    for (const auto& o : r.outcomes) {
      os << "| " << r.scenario << " | " << to_string(o.strategy) << " | " << r.devices << " | "
         << r.layers << " | ";
      if (o.ok()) {
        os << fixed(o.allocation->objective, 3) << " | " << fixed(o.timing->makespan.mean, 3)
           << " | " << fixed(o.timing->stage_time_max.mean, 3) << " | "
           << (o.reduction_makespan_pct ? fixed(*o.reduction_makespan_pct, 1) : "-") << " |\n";
      } else {
        os << to_string(o.status) << " | - | - | - |\n";
      }
    }
  }
  return os.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  throw ContractError("unknown report format '" + std::string(text) + "' (expected json, csv or md)");
}

std::string_view file_extension(ReportFormat format) noexcept {
  switch (format) {
    case ReportFormat::Json: return "json";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "md";
  }
  return "txt";
}

std::string emit_report(std::span<const ComparisonReport> reports, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return emit_json(reports);
    case ReportFormat::Csv: return emit_csv(reports);
    case ReportFormat::Markdown: return emit_markdown(reports);
  }
  throw ContractError("emit_report: unknown format");
}

}  // namespace layeralloc
