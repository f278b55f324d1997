#pragma once

#include <map>
#include <string>
#include <vector>

namespace spotsim {

struct OnPremNodeSpec {
  double hardware_cost = 0.0;
  double lifetime_years = 5.0;
  double energy_cost_per_year = 0.0;
  int rack_u = 1;
  double ns_per_day = 0.0;
};

struct OverheadSpec {
  double rack_per_u_year = 0.0;
  double staff_per_node_year = 0.0;
  double room_per_node_year = 0.0;
  double mgmt_per_node_year = 0.0;
};

double node_overhead_per_year(const OverheadSpec& overheads, int rack_u);

// Overhead share of one microsecond of trajectory, before utilization.
double onprem_overhead_per_microsecond(const OnPremNodeSpec& node, const OverheadSpec& overheads);

double onprem_cost_per_microsecond(const OnPremNodeSpec& node, const OverheadSpec& overheads,
                                   double base_cost_per_us, double utilization);

double cloud_cost_per_microsecond(double rate_per_hour, double ns_per_day);

double cost_per_fe(double complex_runtime_h, double complex_rate, double ligand_runtime_h, double ligand_rate,
                   int replicas, int directions);

// Half-up to two decimals.
double round_currency(double value);

class CostReportEntry {
 public:
  // Throws ValidationError unless cost equals the sum of basis within one cent.
  CostReportEntry(std::string label, double cost, std::map<std::string, double> basis);

  // Cost taken as the sum of the basis.
  static CostReportEntry from_basis(std::string label, std::map<std::string, double> basis);

  const std::string& label() const { return label_; }
  double cost() const { return cost_; }
  const std::map<std::string, double>& basis() const { return basis_; }

 private:
  std::string label_;
  double cost_;
  std::map<std::string, double> basis_;
};

struct CostReport {
  std::string currency = "EUR";
  std::vector<CostReportEntry> entries;
};

// {"currency": ..., "entries": [{label, cost, currency, basis}]}; currency
// values rounded half-up to two decimals.
std::string cost_report_json(const CostReport& report);

// Aligned plain-text table, '.' as decimal point regardless of locale.
std::string cost_report_table(const CostReport& report);

struct TcoInputs {
  OnPremNodeSpec node;
  OverheadSpec overheads;
  double base_cost_per_us = 500.0;
  double utilization = 1.0;
  double cloud_ns_per_day = 4.63;
  double on_demand_rate = 1.00;
  double reserved_rate = 0.40;
  double spot_rate = 0.30;
  std::string currency = "EUR";
};

// Defaults for the consumer GPU node comparison: 5.9 ns/d, 500 per us base,
// 100 + 200 + 60 + 40 per year overhead, cloud instance at 4.63 ns/d.
TcoInputs default_tco_inputs();

CostReport tco_report(const TcoInputs& in);

}  // namespace spotsim
