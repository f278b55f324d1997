#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "spotsim/spotsim.h"

namespace {

std::string data(const char* rel) { return std::string(SPOTSIM_DATA_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::strlen(spotsim_version()) > 0);
  CHECK(std::string(spotsim_status_string(SPOTSIM_OK)) == "ok");
  CHECK(spotsim_last_error() != nullptr);
}

TEST_CASE("argument errors") {
  double out = 0;
  CHECK(spotsim_pp_ratio(1.0, 0.0, &out) == SPOTSIM_VALIDATION);
  CHECK(std::strlen(spotsim_last_error()) > 0);
  CHECK(spotsim_pp_ratio(1.0, 1.0, nullptr) == SPOTSIM_INVALID_ARGUMENT);
  spotsim_catalog* c = nullptr;
  CHECK(spotsim_catalog_load("/nonexistent.json", &c) == SPOTSIM_IO);
  CHECK(c == nullptr);
  CHECK(spotsim_catalog_load(nullptr, &c) == SPOTSIM_INVALID_ARGUMENT);
  spotsim_catalog_free(nullptr);
  spotsim_string_free(nullptr);
}

TEST_CASE("arithmetic") {
  double out = 0;
  REQUIRE(spotsim_pp_ratio(24.0, 2.0, &out) == SPOTSIM_OK);
  CHECK(out == 0.5);
  const int n[] = {1, 2, 4};
  const double ns[] = {10, 18, 30};
  double eff[3];
  REQUIRE(spotsim_parallel_efficiency(n, ns, 3, eff) == SPOTSIM_OK);
  CHECK(eff[2] == doctest::Approx(0.75));
  REQUIRE(spotsim_cloud_cost_per_us(1.0, 24.0, &out) == SPOTSIM_OK);
  CHECK(out == doctest::Approx(1000));
  REQUIRE(spotsim_onprem_cost_per_us(10.0, 500, 400, 1.0, &out) == SPOTSIM_OK);
  CHECK(out == doctest::Approx(500 + 100.0 / 365 * 400));
  REQUIRE(spotsim_cost_per_fe(2, 1, 1, 0.5, 3, 2, &out) == SPOTSIM_OK);
  CHECK(out == doctest::Approx(15));
}

TEST_CASE("catalog, benchmarks and recommendation") {
  spotsim_catalog* c = nullptr;
  REQUIRE(spotsim_catalog_load(data("catalog_aws.json").c_str(), &c) == SPOTSIM_OK);
  CHECK(spotsim_catalog_instance_count(c) > 40);
  double rate = 0;
  REQUIRE(spotsim_catalog_lookup_rate(c, "g4dn.4xl", "us-east-1", SPOTSIM_SPOT, &rate) == SPOTSIM_OK);
  CHECK(rate == doctest::Approx(1.204 * 0.3));
  CHECK(spotsim_catalog_lookup_rate(c, "c5n.18xl", "us-east-1", SPOTSIM_SPOT, &rate) == SPOTSIM_NOT_FOUND);

  spotsim_benchmarks* b = nullptr;
  REQUIRE(spotsim_benchmarks_load(data("benchmarks.csv").c_str(), &b) == SPOTSIM_OK);
  spotsim_recommendation* r = nullptr;
  REQUIRE(spotsim_recommend(b, c, "cmet_complex", 9.0, SPOTSIM_MIN_COST, SPOTSIM_SPOT, nullptr, &r) == SPOTSIM_OK);
  REQUIRE(spotsim_recommendation_count(r) > 3);
  CHECK(std::string(spotsim_recommendation_instance(r, 0)).rfind("g4dn", 0) == 0);
  CHECK(spotsim_recommendation_instance(r, 10000) == nullptr);
  spotsim_recommendation_free(r);

  double h = 0;
  REQUIRE(spotsim_predict_runtime_h(b, "cmet_complex", "g4dn.4xl", &h) == SPOTSIM_OK);
  CHECK(h == doctest::Approx(10.0 / 61.866 * 24.0));

  char* json = nullptr;
  REQUIRE(spotsim_bench_report_json(b, c, nullptr, &json) == SPOTSIM_OK);
  const auto doc = nlohmann::json::parse(json);
  spotsim_string_free(json);
  CHECK(doc["rows"].size() == spotsim_benchmarks_count(b));
  CHECK(doc["frontier"].contains("rib"));

  spotsim_benchmarks_free(b);
  spotsim_catalog_free(c);
}

TEST_CASE("validation diagnostics") {
  spotsim_diagnostics* d = nullptr;
  REQUIRE(spotsim_validate_catalog_file(data("catalog_aws.json").c_str(), &d) == SPOTSIM_OK);
  CHECK(spotsim_diagnostics_count(d) == 0);
  spotsim_diagnostics_free(d);
  CHECK(spotsim_validate_catalog_file("/nonexistent.json", &d) == SPOTSIM_IO);
}

TEST_CASE("simulation through handles") {
  spotsim_scenario* s = nullptr;
  REQUIRE(spotsim_scenario_load(data("scenarios/study2_toy.json").c_str(), &s) == SPOTSIM_OK);
  spotsim_result* a = nullptr;
  spotsim_result* b = nullptr;
  REQUIRE(spotsim_simulate(s, &a) == SPOTSIM_OK);
  REQUIRE(spotsim_simulate(s, &b) == SPOTSIM_OK);
  CHECK(spotsim_result_total_cost(a) == spotsim_result_total_cost(b));
  CHECK(spotsim_result_failed_jobs(a) == 0);
  CHECK(spotsim_result_cost_per_ddg(a) * 20 == doctest::Approx(spotsim_result_total_cost(a)));
  char* json = nullptr;
  REQUIRE(spotsim_result_summary_json(a, &json) == SPOTSIM_OK);
  CHECK(nlohmann::json::parse(json)["seed"] == 42);
  spotsim_string_free(json);
  spotsim_scenario_set_seed(s, 99);
  spotsim_result_free(b);
  REQUIRE(spotsim_simulate(s, &b) == SPOTSIM_OK);
  REQUIRE(spotsim_result_summary_json(b, &json) == SPOTSIM_OK);
  CHECK(nlohmann::json::parse(json)["seed"] == 99);
  spotsim_string_free(json);
  spotsim_result_free(a);
  spotsim_result_free(b);
  spotsim_scenario_free(s);
}
