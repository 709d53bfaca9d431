#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hetnet {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

// Axis-aligned deployment area, meters.
struct Bounds {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 2000.0;
  double ymax = 2000.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Vec2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  bool contains(Vec2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  Vec2 clamp(Vec2 p) const;

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

enum class Tier { Macro, Micro };

std::string_view to_string(Tier tier);
std::optional<Tier> parse_tier(std::string_view text);

// Power limits are linear mW, band in Hz.
struct TierDefaults {
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
  double band_hz = 0.0;

  friend bool operator==(const TierDefaults&, const TierDefaults&) = default;
};

TierDefaults default_tier_limits(Tier tier);

struct BaseStation {
  int id = 0;
  Tier tier = Tier::Macro;
  Vec2 position;
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
  double band_total_hz = 0.0;

  friend bool operator==(const BaseStation&, const BaseStation&) = default;
};

class TopologyParseError : public std::runtime_error {
 public:
  TopologyParseError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class TopologyValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkTopology {
  std::vector<BaseStation> stations;
  std::vector<Vec2> users;
  Bounds bounds;

  std::size_t n_stations() const { return stations.size(); }
  std::size_t n_users() const { return users.size(); }
  std::size_t n_macro() const;
  std::size_t n_micro() const;

  // Throws TopologyValidationError. Users are optional because station files
  // carry no user positions.
  void validate(bool require_users = true) const;

  friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;
};

enum class ScenarioKind { DenseUrban, SparseSuburban, Hotspot, Mixed };

inline constexpr ScenarioKind kAllScenarios[] = {
    ScenarioKind::DenseUrban, ScenarioKind::SparseSuburban, ScenarioKind::Hotspot,
    ScenarioKind::Mixed};

// Kebab-case names: dense-urban, sparse-suburban, hotspot, mixed.
std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario(std::string_view text);

// How users are redrawn at every episode reset.
enum class UserLayout { Uniform, Hotspot, Fixed };

UserLayout user_layout_for(ScenarioKind kind);

inline constexpr double kHotspotSigmaM = 50.0;
inline constexpr double kHotspotFraction = 0.85;
inline constexpr double kMacroTriangleSideM = 800.0;

NetworkTopology parse_topology(std::istream& in, const std::string& source_name = "<stream>");
NetworkTopology load_topology(const std::filesystem::path& path);
void write_topology(std::ostream& out, const NetworkTopology& topology);

NetworkTopology generate_scenario(ScenarioKind kind, std::size_t n_users, std::uint64_t seed);
NetworkTopology place_users(NetworkTopology topology, std::size_t n_users, std::uint64_t seed);

// Samples user positions for one episode; Fixed returns the topology's users.
std::vector<Vec2> sample_users(const NetworkTopology& topology, UserLayout layout,
                               std::size_t n_users, std::uint64_t seed);

// Station-only layouts shared by the generators.
std::vector<Vec2> macro_triangle(const Bounds& bounds, double side_m = kMacroTriangleSideM);

}  // namespace hetnet
