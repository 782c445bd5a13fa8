#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "crshare/config.h"

using namespace crshare;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    auto c = config_from_json(j);
    apply_defaults(c);
    validate(c);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string field_of(const json& j) {
  try {
    auto c = config_from_json(j);
    apply_defaults(c);
    validate(c);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults validate and fill per-provider vectors") {
  ScenarioConfig c;
  apply_defaults(c);
  CHECK_NOTHROW(validate(c));
  CHECK(c.mean_rates.size() == 5);
  CHECK(c.rate_correlation.size() == 5);
  CHECK(c.rate_correlation[2][2] == 1.0);
  CHECK(c.rate_correlation[0][3] == 0.0);
  CHECK(c.sharing_group == 5);
}

TEST_CASE("scalars broadcast over providers") {
  auto c = config_from_json(json{{"n_providers", 3}, {"mean_rates", 1e-3}, {"rate_correlation", 0.4}});
  apply_defaults(c);
  CHECK(c.mean_rates == std::vector<double>{1e-3, 1e-3, 1e-3});
  REQUIRE(c.rate_correlation.size() == 3);
  CHECK(c.rate_correlation[0][1] == doctest::Approx(0.4));
  CHECK(c.rate_correlation[1][1] == 1.0);
}

TEST_CASE("aggregate rates scale with node count") {
  ScenarioConfig c;
  c.n_nodes = 50;
  c.mean_rate_scale = 2.0;
  apply_defaults(c);
  CHECK(c.aggregate_mean_rates()[0] == doctest::Approx(50 * 2.0 * kDefaultMeanRatePerNode));
}

TEST_CASE("validation errors name the field") {
  CHECK(field_of(json{{"n_providers", 2}, {"rate_correlation", {{1.0, 0.2}, {0.2, 0.9}}}}) ==
        "rate_correlation[1][1]");
  CHECK(field_of(json{{"n_providers", 2}, {"rate_correlation", {{1.0, 0.2}, {0.3, 1.0}}}}) ==
        "rate_correlation[0][1]");
  CHECK(field_of(json{{"n_providers", 6}}) == "n_providers");
  CHECK(field_of(json{{"horizon_t", 0}}) == "horizon_t");
  CHECK(field_of(json{{"mean_rates", {1e-3, -1e-3, 1e-3, 1e-3, 1e-3}}}) == "mean_rates[1]");
  CHECK(field_of(json{{"grid_dims", {0, 3}}}) == "grid_dims");
  CHECK(field_of(json{{"bogus", 1}}) == "bogus");
  CHECK(field_of(json{{"seed", -4}}) == "seed");
  CHECK(field_of(json{{"n_nodes", "many"}}) == "n_nodes");
}

TEST_CASE("non-PSD correlation has its own diagnostic") {
  const json j{{"n_providers", 3},
               {"rate_correlation", {{1.0, 0.9, -0.9}, {0.9, 1.0, 0.9}, {-0.9, 0.9, 1.0}}}};
  CHECK(error_of(j).find("positive semi-definite") != std::string::npos);
  // Singular but PSD is accepted.
  CHECK(error_of(json{{"n_providers", 3}, {"rate_correlation", 1.0}}).empty());
}

TEST_CASE("arrival schedule is checked") {
  CHECK(field_of(json{{"n_providers", 1}, {"arrival_schedule", {{{1.0, 5.0}, {1.0, 5.0}}}}}) ==
        "arrival_schedule[0][1]");
  CHECK(field_of(json{{"n_providers", 1}, {"arrival_schedule", {{{1.0, 0.0}}}}}) == "arrival_schedule[0][0]");
  CHECK(field_of(json{{"n_providers", 2}, {"arrival_schedule", {{{1.0, 1.0}}}}}) == "arrival_schedule");
}

TEST_CASE("file errors are distinct") {
  std::string missing, syntax;
  try {
    load_config("/nonexistent/dir/scenario.json");
  } catch (const ConfigError& e) {
    missing = e.what();
  }
  CHECK(missing.find("cannot open file") != std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "crshare_bad_syntax.json";
  {
    std::ofstream out(path);
    out << "{\n  \"n_nodes\": 10,\n  oops\n}\n";
  }
  try {
    load_config(path);
  } catch (const ConfigError& e) {
    syntax = e.what();
  }
  std::filesystem::remove(path);
  CHECK(syntax.find("not valid JSON") != std::string::npos);
  CHECK(syntax.find("line 3") != std::string::npos);
}

TEST_CASE("config survives a JSON round trip") {
  auto c = config_from_json(json{{"n_providers", 3},
                                 {"mean_rates", {1e-3, 2e-3, 3e-3}},
                                 {"rate_stddevs", 1e-4},
                                 {"rate_correlation", 0.25},
                                 {"grid_dims", {2, 3}},
                                 {"cost_efficiency_mode", "spectrum"},
                                 {"seed", 99}});
  apply_defaults(c);
  auto back = config_from_json(json::parse(config_to_json(c).dump()));
  apply_defaults(back);
  CHECK(back.mean_rates == c.mean_rates);
  CHECK(back.rate_stddevs == c.rate_stddevs);
  CHECK(back.rate_correlation == c.rate_correlation);
  CHECK(back.grid_dims.rows == 2);
  CHECK(back.grid_dims.cols == 3);
  CHECK(back.cost_efficiency_mode == CostEfficiencyMode::kSpectrum);
  CHECK(back.seed == 99);
}

TEST_CASE("resize_providers keeps the correlation valid") {
  auto c = config_from_json(json{{"n_providers", 5}, {"rate_correlation", 0.3}, {"mean_rates", {1, 2, 3, 4, 5}}});
  apply_defaults(c);
  resize_providers(c, 2);
  CHECK(c.n_providers == 2);
  CHECK(c.mean_rates == std::vector<double>{1, 2});
  CHECK(c.sharing_group == 2);
  CHECK_NOTHROW(validate(c));

  resize_providers(c, 4);
  CHECK(c.mean_rates == std::vector<double>{1, 2, 2, 2});
  REQUIRE(c.rate_correlation.size() == 4);
  CHECK(c.rate_correlation[3][0] == doctest::Approx(0.3));
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("provider_shares follows the sharing group") {
  ScenarioConfig c;
  apply_defaults(c);
  c.sharing_group = 3;
  CHECK(c.provider_shares(0));
  CHECK(c.provider_shares(2));
  CHECK_FALSE(c.provider_shares(3));
  c.sharing_group = 1;
  CHECK_FALSE(c.provider_shares(0));
  c.sharing_group = 5;
  c.sharing_enabled = false;
  CHECK_FALSE(c.provider_shares(0));
}
