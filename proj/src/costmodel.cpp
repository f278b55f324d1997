#include "spotsim/costmodel.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "spotsim/error.hpp"

namespace spotsim {

double node_overhead_per_year(const OverheadSpec& o, int rack_u) {
  if (rack_u < 1) throw ValidationError("rack_u", "must be >= 1");
  if (o.rack_per_u_year < 0 || o.staff_per_node_year < 0 || o.room_per_node_year < 0 ||
      o.mgmt_per_node_year < 0)
    throw ValidationError("overheads", "must be >= 0");
  return o.rack_per_u_year * rack_u + o.staff_per_node_year + o.room_per_node_year + o.mgmt_per_node_year;
}

double onprem_overhead_per_microsecond(const OnPremNodeSpec& node, const OverheadSpec& overheads) {
  if (!(node.ns_per_day > 0)) throw ValidationError("ns_per_day", "must be > 0");
  const double days_per_us = 1000.0 / node.ns_per_day;
  return days_per_us / 365.0 * node_overhead_per_year(overheads, node.rack_u);
}

double onprem_cost_per_microsecond(const OnPremNodeSpec& node, const OverheadSpec& overheads,
                                   double base_cost_per_us, double utilization) {
  if (!(utilization > 0 && utilization <= 1)) throw ValidationError("utilization", "must be in (0, 1]");
  if (base_cost_per_us < 0) throw ValidationError("base_cost_per_us", "must be >= 0");
  return (base_cost_per_us + onprem_overhead_per_microsecond(node, overheads)) / utilization;
}

double cloud_cost_per_microsecond(double rate_per_hour, double ns_per_day) {
  if (!(rate_per_hour > 0) || !(ns_per_day > 0))
    throw ValidationError("cloud_cost_per_microsecond", "rate and performance must be > 0");
  return 1000.0 / ns_per_day * 24.0 * rate_per_hour;
}

double cost_per_fe(double complex_runtime_h, double complex_rate, double ligand_runtime_h, double ligand_rate,
                   int replicas, int directions) {
  if (replicas < 1 || directions < 1) throw ValidationError("cost_per_fe", "replicas and directions must be >= 1");
  if (complex_runtime_h < 0 || ligand_runtime_h < 0 || complex_rate < 0 || ligand_rate < 0)
    throw ValidationError("cost_per_fe", "runtimes and rates must be >= 0");
  return replicas * directions * (complex_runtime_h * complex_rate + ligand_runtime_h * ligand_rate);
}

double round_currency(double value) {
  // Nudge by a few ulps so 0.125 stored as 0.12499999... still rounds up.
  const double scaled = value * 100.0;
  const double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::abs(scaled)), scaled);
  return std::copysign(std::floor(std::abs(nudged) + 0.5), value) / 100.0;
}

CostReportEntry::CostReportEntry(std::string label, double cost, std::map<std::string, double> basis)
    : label_(std::move(label)), cost_(cost), basis_(std::move(basis)) {
  double sum = 0.0;
  for (const auto& [k, v] : basis_) sum += v;
  if (std::abs(sum - cost_) > 0.005)
    throw ValidationError(label_, fmt::format("cost {:.4f} differs from basis sum {:.4f}", cost_, sum));
}

CostReportEntry CostReportEntry::from_basis(std::string label, std::map<std::string, double> basis) {
  double sum = 0.0;
  for (const auto& [k, v] : basis) sum += v;
  return CostReportEntry(std::move(label), sum, std::move(basis));
}

std::string cost_report_json(const CostReport& report) {
  nlohmann::json doc;
  doc["currency"] = report.currency;
  doc["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json basis = nlohmann::json::object();
    for (const auto& [k, v] : e.basis()) basis[k] = round_currency(v);
    doc["entries"].push_back(
        {{"label", e.label()}, {"cost", round_currency(e.cost())}, {"currency", report.currency}, {"basis", basis}});
  }
  return doc.dump(2);
}

std::string cost_report_table(const CostReport& report) {
  std::size_t width = 5;
  for (const auto& e : report.entries) width = std::max(width, e.label().size());
  std::string out = fmt::format("{:<{}}  {:>12}  {}\n", "label", width, "cost", "basis");
  for (const auto& e : report.entries) {
    std::string basis;
    for (const auto& [k, v] : e.basis()) {
      if (!basis.empty()) basis += ", ";
      basis += fmt::format("{}={:.2f}", k, round_currency(v));
    }
    out += fmt::format("{:<{}}  {:>12.2f}  {}\n", e.label(), width, round_currency(e.cost()), basis);
  }
  out += fmt::format("currency: {}\n", report.currency);
  return out;
}

TcoInputs default_tco_inputs() {
  TcoInputs in;
  in.node = {3000.0, 5.0, 0.0, 1, 5.9};
  in.overheads = {100.0, 200.0, 60.0, 40.0};
  return in;
}

CostReport tco_report(const TcoInputs& in) {
  CostReport r;
  r.currency = in.currency;
  const double overhead_us = onprem_overhead_per_microsecond(in.node, in.overheads);
  const double u = in.utilization;
  if (!(u > 0 && u <= 1)) throw ValidationError("utilization", "must be in (0, 1]");
  // Utilization scales both parts, so each basis component is divided by it.
  r.entries.push_back(CostReportEntry::from_basis(
      "onprem_per_us", {{"base", in.base_cost_per_us / u}, {"overhead", overhead_us / u}}));
  r.entries.push_back(CostReportEntry::from_basis(
      "cloud_on_demand_per_us", {{"compute", cloud_cost_per_microsecond(in.on_demand_rate, in.cloud_ns_per_day)}}));
  r.entries.push_back(CostReportEntry::from_basis(
      "cloud_reserved_per_us", {{"compute", cloud_cost_per_microsecond(in.reserved_rate, in.cloud_ns_per_day)}}));
  r.entries.push_back(CostReportEntry::from_basis(
      "cloud_spot_per_us", {{"compute", cloud_cost_per_microsecond(in.spot_rate, in.cloud_ns_per_day)}}));
  return r;
}

}  // namespace spotsim
