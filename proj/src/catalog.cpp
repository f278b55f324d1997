#include "spotsim/catalog.hpp"

#include <cmath>
#include <set>

#include "json_util.hpp"

namespace spotsim {

using detail::json;

std::string_view to_string(PaymentModel model) {
  switch (model) {
    case PaymentModel::on_demand: return "on_demand";
    case PaymentModel::spot: return "spot";
    case PaymentModel::reserved_upfront: return "reserved_upfront";
  }
  return "unknown";
}

PaymentModel parse_payment_model(std::string_view text) {
  if (text == "on_demand" || text == "on-demand") return PaymentModel::on_demand;
  if (text == "spot") return PaymentModel::spot;
  if (text == "reserved_upfront" || text == "reserved") return PaymentModel::reserved_upfront;
  throw ParseError("unknown payment model '" + std::string(text) + "'");
}

int RegionSpec::pool_capacity(std::string_view family) const {
  auto it = spot_pool.find(std::string(family));
  return it == spot_pool.end() ? 0 : it->second;
}

std::vector<Diagnostic> validate_catalog(const std::vector<InstanceTypeSpec>& instances,
                                         const std::vector<RegionSpec>& regions,
                                         const std::vector<PriceEntry>& prices,
                                         double currency_per_dollar) {
  std::vector<Diagnostic> out;
  auto fail = [&](std::string loc, std::string msg) { out.push_back({std::move(loc), std::move(msg)}); };

  std::set<std::string, std::less<>> names;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& it = instances[i];
    const auto loc = detail::index_loc("instances", i) + " (" + it.name + ")";
    if (it.name.empty()) fail(loc, "name must not be empty");
    if (!names.insert(it.name).second) fail(loc, "duplicate instance name '" + it.name + "'");
    if (it.vcpus < 1) fail(loc, "vcpus must be >= 1");
    if (it.gpus < 0) fail(loc, "gpus must be >= 0");
    if (!(it.network_gbps > 0)) fail(loc, "network_gbps must be > 0");
    if (it.clock_ghz < 0) fail(loc, "clock_ghz must be >= 0");
    if (it.family.empty()) fail(loc, "family must not be empty");
  }

  if (regions.empty()) fail("regions", "catalog must contain at least one region");
  std::set<std::string, std::less<>> region_names;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    const auto loc = detail::index_loc("regions", i) + " (" + r.name + ")";
    if (r.name.empty()) fail(loc, "name must not be empty");
    if (!region_names.insert(r.name).second) fail(loc, "duplicate region name '" + r.name + "'");
    for (const auto& [family, cap] : r.spot_pool)
      if (cap < 0) fail(loc + ".spot_pool." + family, "capacity must be >= 0");
    if (r.weight && !(*r.weight >= 0)) fail(loc + ".weight", "weight must be >= 0");
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    const auto& p = prices[i];
    const auto loc = detail::index_loc("prices", i) + " (" + p.instance + " @ " + p.region + ")";
    if (!names.count(p.instance)) fail(loc, "references unknown instance '" + p.instance + "'");
    if (!region_names.count(p.region)) fail(loc, "references unknown region '" + p.region + "'");
    if (!(p.on_demand_per_hour > 0)) fail(loc, "on_demand_per_hour must be > 0");
    if (!(p.spot_fraction > 0 && p.spot_fraction <= 1)) fail(loc, "spot_fraction must be in (0, 1]");
    if (p.reserved_upfront_per_hour && !(*p.reserved_upfront_per_hour > 0))
      fail(loc, "reserved_upfront_per_hour must be > 0");
    if (!seen.emplace(p.instance, p.region).second) fail(loc, "duplicate price entry");
  }

  if (!(currency_per_dollar > 0)) fail("currency_per_dollar", "must be > 0");
  return out;
}

Catalog::Catalog(std::vector<InstanceTypeSpec> instances, std::vector<RegionSpec> regions,
                 std::vector<PriceEntry> prices, double currency_per_dollar)
    : instances_(std::move(instances)),
      regions_(std::move(regions)),
      prices_(std::move(prices)),
      currency_per_dollar_(currency_per_dollar) {
  auto diags = validate_catalog(instances_, regions_, prices_, currency_per_dollar_);
  if (!diags.empty()) throw ValidationError(std::move(diags));
  for (std::size_t i = 0; i < instances_.size(); ++i) instance_index_.emplace(instances_[i].name, i);
  for (std::size_t i = 0; i < regions_.size(); ++i) region_index_.emplace(regions_[i].name, i);
  for (std::size_t i = 0; i < prices_.size(); ++i)
    price_index_.emplace(std::make_pair(prices_[i].instance, prices_[i].region), i);
}

const InstanceTypeSpec* Catalog::find_instance(std::string_view name) const {
  auto it = instance_index_.find(name);
  return it == instance_index_.end() ? nullptr : &instances_[it->second];
}

const RegionSpec* Catalog::find_region(std::string_view name) const {
  auto it = region_index_.find(name);
  return it == region_index_.end() ? nullptr : &regions_[it->second];
}

const PriceEntry* Catalog::find_price(std::string_view instance, std::string_view region) const {
  auto it = price_index_.find({std::string(instance), std::string(region)});
  return it == price_index_.end() ? nullptr : &prices_[it->second];
}

const InstanceTypeSpec& Catalog::instance(std::string_view name) const {
  if (auto* p = find_instance(name)) return *p;
  throw NotFoundError("unknown instance type '" + std::string(name) + "'");
}

const RegionSpec& Catalog::region(std::string_view name) const {
  if (auto* p = find_region(name)) return *p;
  throw NotFoundError("unknown region '" + std::string(name) + "'");
}

namespace {

InstanceTypeSpec parse_instance(const json& j, const std::string& loc) {
  InstanceTypeSpec s;
  s.name = detail::get_string(j, "name", loc);
  s.vcpus = static_cast<int>(detail::get_integer(j, "vcpus", loc));
  s.gpus = detail::has(j, "gpus") ? static_cast<int>(detail::get_integer(j, "gpus", loc)) : 0;
  if (detail::has(j, "gpu_model")) s.gpu_model = detail::get_string(j, "gpu_model", loc);
  s.clock_ghz = detail::opt_number(j, "clock_ghz", loc).value_or(0.0);
  s.network_gbps = detail::get_number(j, "network_gbps", loc);
  s.efa = detail::has(j, "efa") ? detail::get_bool(j, "efa", loc) : false;
  s.family = detail::get_string(j, "family", loc);
  return s;
}

RegionSpec parse_region(const json& j, const std::string& loc) {
  RegionSpec r;
  r.name = detail::get_string(j, "name", loc);
  if (detail::has(j, "spot_pool")) {
    const json& pool = j.at("spot_pool");
    if (!pool.is_object()) throw ParseError(loc + ".spot_pool: expected an object");
    for (const auto& [family, cap] : pool.items()) {
      if (!cap.is_number_integer())
        throw ParseError(loc + ".spot_pool." + family + ": capacity must be an integer");
      r.spot_pool[family] = cap.get<int>();
    }
  }
  r.weight = detail::opt_number(j, "weight", loc);
  return r;
}

PriceEntry parse_price(const json& j, const std::string& loc) {
  PriceEntry p;
  p.instance = detail::get_string(j, "instance", loc);
  p.region = detail::get_string(j, "region", loc);
  p.on_demand_per_hour = detail::get_number(j, "on_demand_per_hour", loc);
  p.spot_fraction = detail::opt_number(j, "spot_fraction", loc).value_or(0.30);
  p.reserved_upfront_per_hour = detail::opt_number(j, "reserved_upfront_per_hour", loc);
  return p;
}

}  // namespace

Catalog parse_catalog(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "catalog");
  if (!doc.is_object()) throw ParseError("catalog: top level must be an object");

  std::vector<InstanceTypeSpec> instances;
  std::vector<RegionSpec> regions;
  std::vector<PriceEntry> prices;

  const json& ji = detail::require_array(doc, "instances", "catalog");
  for (std::size_t i = 0; i < ji.size(); ++i)
    instances.push_back(parse_instance(ji[i], detail::index_loc("instances", i)));
  const json& jr = detail::require_array(doc, "regions", "catalog");
  for (std::size_t i = 0; i < jr.size(); ++i)
    regions.push_back(parse_region(jr[i], detail::index_loc("regions", i)));
  const json& jp = detail::require_array(doc, "prices", "catalog");
  for (std::size_t i = 0; i < jp.size(); ++i)
    prices.push_back(parse_price(jp[i], detail::index_loc("prices", i)));

  const double cpd =
      detail::opt_number(doc, "currency_per_dollar", "catalog").value_or(Catalog::kDefaultCurrencyPerDollar);
  return Catalog(std::move(instances), std::move(regions), std::move(prices), cpd);
}

Catalog load_catalog(const std::string& path) {
  return parse_catalog(detail::read_text_file(path));
}

std::string serialize_catalog(const Catalog& catalog) {
  json doc;
  doc["instances"] = json::array();
  for (const auto& s : catalog.instances()) {
    json j{{"name", s.name},
           {"vcpus", s.vcpus},
           {"gpus", s.gpus},
           {"clock_ghz", s.clock_ghz},
           {"network_gbps", s.network_gbps},
           {"efa", s.efa},
           {"family", s.family}};
    if (s.gpu_model) j["gpu_model"] = *s.gpu_model;
    doc["instances"].push_back(std::move(j));
  }
  doc["regions"] = json::array();
  for (const auto& r : catalog.regions()) {
    json j{{"name", r.name}, {"spot_pool", json::object()}};
    for (const auto& [family, cap] : r.spot_pool) j["spot_pool"][family] = cap;
    if (r.weight) j["weight"] = *r.weight;
    doc["regions"].push_back(std::move(j));
  }
  doc["prices"] = json::array();
  for (const auto& p : catalog.prices()) {
    json j{{"instance", p.instance},
           {"region", p.region},
           {"on_demand_per_hour", p.on_demand_per_hour},
           {"spot_fraction", p.spot_fraction}};
    if (p.reserved_upfront_per_hour) j["reserved_upfront_per_hour"] = *p.reserved_upfront_per_hour;
    doc["prices"].push_back(std::move(j));
  }
  doc["currency_per_dollar"] = catalog.currency_per_dollar();
  return doc.dump(2);
}

double lookup_rate(const Catalog& catalog, std::string_view instance, std::string_view region,
                   PaymentModel model) {
  const PriceEntry* p = catalog.find_price(instance, region);
  if (!p)
    throw NotFoundError("no price entry for '" + std::string(instance) + "' in '" + std::string(region) + "'");
  switch (model) {
    case PaymentModel::on_demand: return p->on_demand_per_hour;
    case PaymentModel::spot: return p->spot_per_hour();
    case PaymentModel::reserved_upfront:
      if (!p->reserved_upfront_per_hour)
        throw NotFoundError("no reserved rate for '" + std::string(instance) + "' in '" +
                            std::string(region) + "'");
      return *p->reserved_upfront_per_hour;
  }
  throw NotFoundError("unknown payment model");
}

}  // namespace spotsim
