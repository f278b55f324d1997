#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spotsim/error.hpp"

namespace spotsim {

enum class PaymentModel { on_demand, spot, reserved_upfront };

std::string_view to_string(PaymentModel model);
// Accepts "on_demand", "spot", "reserved_upfront" and the short form "reserved".
PaymentModel parse_payment_model(std::string_view text);

struct InstanceTypeSpec {
  std::string name;
  int vcpus = 1;
  int gpus = 0;
  std::optional<std::string> gpu_model;
  double clock_ghz = 0.0;
  double network_gbps = 0.0;
  bool efa = false;
  std::string family;
};

struct PriceEntry {
  std::string instance;
  std::string region;
  double on_demand_per_hour = 0.0;
  double spot_fraction = 0.30;
  std::optional<double> reserved_upfront_per_hour;

  double spot_per_hour() const { return on_demand_per_hour * spot_fraction; }
};

struct RegionSpec {
  std::string name;
  // family -> max simultaneously acquirable Spot instances of that family
  std::map<std::string, int> spot_pool;
  std::optional<double> weight;

  int pool_capacity(std::string_view family) const;
};

// Immutable after construction; every accessor is const and safe to share
// across threads.
class Catalog {
public:
  static constexpr double kDefaultCurrencyPerDollar = 1.20;

  Catalog() = default;
  // Validates all invariants and throws ValidationError listing every
  // violation found.
  Catalog(std::vector<InstanceTypeSpec> instances, std::vector<RegionSpec> regions,
          std::vector<PriceEntry> prices, double currency_per_dollar = kDefaultCurrencyPerDollar);

  const std::vector<InstanceTypeSpec>& instances() const noexcept { return instances_; }
  const std::vector<RegionSpec>& regions() const noexcept { return regions_; }
  const std::vector<PriceEntry>& prices() const noexcept { return prices_; }
  double currency_per_dollar() const noexcept { return currency_per_dollar_; }

  const InstanceTypeSpec* find_instance(std::string_view name) const;
  const RegionSpec* find_region(std::string_view name) const;
  const PriceEntry* find_price(std::string_view instance, std::string_view region) const;

  const InstanceTypeSpec& instance(std::string_view name) const;
  const RegionSpec& region(std::string_view name) const;

private:
  std::vector<InstanceTypeSpec> instances_;
  std::vector<RegionSpec> regions_;
  std::vector<PriceEntry> prices_;
  double currency_per_dollar_ = kDefaultCurrencyPerDollar;
  std::map<std::string, std::size_t, std::less<>> instance_index_;
  std::map<std::string, std::size_t, std::less<>> region_index_;
  std::map<std::pair<std::string, std::string>, std::size_t> price_index_;
};

// Returns every invariant violation; empty means the catalog is valid.
std::vector<Diagnostic> validate_catalog(const std::vector<InstanceTypeSpec>& instances,
                                         const std::vector<RegionSpec>& regions,
                                         const std::vector<PriceEntry>& prices,
                                         double currency_per_dollar);

Catalog parse_catalog(std::string_view json_text);
Catalog load_catalog(const std::string& path);
std::string serialize_catalog(const Catalog& catalog);

// Hourly rate in dollars. Throws NotFoundError when the (instance, region)
// pair has no price entry or the reserved rate is absent.
double lookup_rate(const Catalog& catalog, std::string_view instance, std::string_view region,
                   PaymentModel model);

}  // namespace spotsim
