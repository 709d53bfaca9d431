#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hetnet/topology.hpp"

using namespace hetnet;

namespace {

std::string thirteen_station_csv() {
  std::ostringstream s;
  s << "#bounds,0,0,2000,2000\n"
    << "#tier,Macro,1000,40000,20000000\n"
    << "#tier,Micro,100,1000,10000000\n"
    << "id,tier,x_m,y_m\n";
  s << "0,Macro,600,700\n1,Macro,1400,700\n2,Macro,1000,1393\n";
  for (int i = 0; i < 10; ++i) s << 3 + i << ",Micro," << 100 + 150 * i << ",1800\n";
  return s.str();
}

std::size_t near_micro(const NetworkTopology& t, double radius) {
  std::size_t count = 0;
  for (auto u : t.users) {
    for (const auto& s : t.stations) {
      if (s.tier == Tier::Micro && distance(u, s.position) <= radius) {
        ++count;
        break;
      }
    }
  }
  return count;
}

}  // namespace

TEST_SUITE("topology") {
  TEST_CASE("three macro and ten micro rows give thirteen stations") {
    std::istringstream in(thirteen_station_csv());
    auto t = parse_topology(in);
    CHECK(t.n_stations() == 13);
    CHECK(t.n_macro() == 3);
    CHECK(t.n_micro() == 10);
    CHECK(t.n_users() == 0);
    CHECK(t.stations[0].p_max_mw == 40000.0);
    CHECK(t.stations[5].band_total_hz == 10e6);
  }

  TEST_CASE("tier defaults from the header override built-in limits") {
    std::istringstream in("#bounds,0,0,100,100\n#tier,Micro,5,50,1000\n0,Macro,10,10\n1,Micro,20,20\n");
    auto t = parse_topology(in);
    CHECK(t.stations[1].p_min_mw == 5.0);
    CHECK(t.stations[1].p_max_mw == 50.0);
    CHECK(t.stations[0].p_max_mw == default_tier_limits(Tier::Macro).p_max_mw);
  }

  TEST_CASE("empty station list is rejected") {
    std::istringstream in("#bounds,0,0,100,100\n");
    CHECK_THROWS_AS(parse_topology(in), TopologyValidationError);
  }

  TEST_CASE("unknown tier names the offending line") {
    std::istringstream in("#bounds,0,0,100,100\n0,Macro,10,10\n1,pico,20,20\n");
    try {
      parse_topology(in, "layout.csv");
      FAIL("expected a parse error");
    } catch (const TopologyParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("layout.csv") != std::string::npos);
      CHECK(std::string(e.what()).find("pico") != std::string::npos);
    }
  }

  TEST_CASE("malformed rows and missing bounds are parse errors") {
    std::istringstream short_row("#bounds,0,0,100,100\n0,Macro,10\n");
    CHECK_THROWS_AS(parse_topology(short_row), TopologyParseError);
    std::istringstream bad_number("#bounds,0,0,100,100\n0,Macro,ten,10\n");
    CHECK_THROWS_AS(parse_topology(bad_number), TopologyParseError);
    std::istringstream no_bounds("0,Macro,10,10\n");
    CHECK_THROWS_AS(parse_topology(no_bounds), TopologyParseError);
  }

  TEST_CASE("validation catches out-of-bounds, duplicates and inverted limits") {
    std::istringstream outside("#bounds,0,0,100,100\n0,Macro,150,10\n");
    CHECK_THROWS_AS(parse_topology(outside), TopologyValidationError);
    std::istringstream dup_id("#bounds,0,0,100,100\n0,Macro,10,10\n0,Micro,20,20\n");
    CHECK_THROWS_AS(parse_topology(dup_id), TopologyValidationError);
    std::istringstream dup_pos("#bounds,0,0,100,100\n0,Macro,10,10\n1,Micro,10,10\n");
    CHECK_THROWS_AS(parse_topology(dup_pos), TopologyValidationError);
    std::istringstream inverted("#bounds,0,0,100,100\n#tier,Micro,100,50,1000\n0,Micro,10,10\n");
    CHECK_THROWS_AS(parse_topology(inverted), TopologyValidationError);
    std::istringstream micro_over_macro(
        "#bounds,0,0,100,100\n#tier,Micro,100,90000,1000\n0,Macro,10,10\n1,Micro,20,20\n");
    CHECK_THROWS_AS(parse_topology(micro_over_macro), TopologyValidationError);
  }

  TEST_CASE("write then parse round-trips stations and bounds") {
    auto t = generate_scenario(ScenarioKind::Mixed, 5, 99);
    std::ostringstream out;
    write_topology(out, t);
    std::istringstream in(out.str());
    auto back = parse_topology(in);
    CHECK(back.stations == t.stations);
    CHECK(back.bounds == t.bounds);
  }

  TEST_CASE("scenario cardinalities") {
    for (auto kind : kAllScenarios) {
      auto t = generate_scenario(kind, 50, 3);
      CAPTURE(to_string(kind));
      CHECK(t.n_macro() == 3);
      CHECK(t.n_micro() == (kind == ScenarioKind::SparseSuburban ? 0u : 10u));
      CHECK(t.n_users() == 50);
    }
  }

  TEST_CASE("generators are deterministic and keep everything in bounds") {
    for (auto kind : kAllScenarios) {
      for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
        auto a = generate_scenario(kind, 40, seed);
        auto b = generate_scenario(kind, 40, seed);
        CHECK(a == b);
        for (const auto& s : a.stations) CHECK(a.bounds.contains(s.position));
        for (auto u : a.users) CHECK(a.bounds.contains(u));
      }
    }
    auto m1 = generate_scenario(ScenarioKind::Mixed, 10, 1);
    auto m2 = generate_scenario(ScenarioKind::Mixed, 10, 2);
    CHECK_FALSE(m1.stations == m2.stations);
  }

  TEST_CASE("macros sit on an 800 m equilateral triangle centered in bounds") {
    auto t = generate_scenario(ScenarioKind::DenseUrban, 1, 0);
    std::vector<Vec2> macros;
    for (const auto& s : t.stations) {
      if (s.tier == Tier::Macro) macros.push_back(s.position);
    }
    REQUIRE(macros.size() == 3);
    CHECK(distance(macros[0], macros[1]) == doctest::Approx(800.0).epsilon(1e-12));
    CHECK(distance(macros[1], macros[2]) == doctest::Approx(800.0).epsilon(1e-12));
    CHECK(distance(macros[0], macros[2]) == doctest::Approx(800.0).epsilon(1e-12));
    Vec2 c{(macros[0].x + macros[1].x + macros[2].x) / 3.0, (macros[0].y + macros[1].y + macros[2].y) / 3.0};
    CHECK(c.x == doctest::Approx(1000.0));
    CHECK(c.y == doctest::Approx(1000.0));
  }

  TEST_CASE("hotspot users cluster within 150 m of micro stations") {
    for (std::uint64_t seed : {0ull, 7ull, 42ull, 1024ull}) {
      auto t = generate_scenario(ScenarioKind::Hotspot, 100, seed);
      CAPTURE(seed);
      CHECK(near_micro(t, 150.0) >= 80);
    }
  }

  TEST_CASE("uniform layouts do not cluster like hotspots") {
    auto t = generate_scenario(ScenarioKind::DenseUrban, 1000, 5);
    // Ten 150 m discs cover about 18% of the 4 km^2 area.
    CHECK(near_micro(t, 150.0) < 300);
  }

  TEST_CASE("place_users: counts, containment, determinism") {
    auto base = generate_scenario(ScenarioKind::SparseSuburban, 1, 0);
    auto fifty = place_users(base, 50, 8);
    CHECK(fifty.n_users() == 50);
    for (auto u : fifty.users) CHECK(fifty.bounds.contains(u));
    auto one = place_users(base, 1, 8);
    CHECK(one.n_users() == 1);
    CHECK(one.bounds.contains(one.users[0]));
    CHECK(place_users(base, 50, 8).users == fifty.users);
    CHECK_FALSE(place_users(base, 50, 9).users == fifty.users);
  }

  TEST_CASE("scenario names round-trip") {
    for (auto kind : kAllScenarios) CHECK(parse_scenario(to_string(kind)) == kind);
    CHECK_FALSE(parse_scenario("urban").has_value());
  }
}
