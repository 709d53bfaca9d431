#include "hetnet/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "hetnet/rng.hpp"

namespace hetnet {
namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Vec2 uniform_point(const Bounds& bounds, Rng& rng) {
  std::uniform_real_distribution<double> ux(bounds.xmin, bounds.xmax);
  std::uniform_real_distribution<double> uy(bounds.ymin, bounds.ymax);
  double x = ux(rng);
  double y = uy(rng);
  return {x, y};
}

std::vector<Vec2> uniform_users(const Bounds& bounds, std::size_t n, Rng& rng) {
  std::vector<Vec2> users;
  users.reserve(n);
  for (std::size_t i = 0; i < n; ++i) users.push_back(uniform_point(bounds, rng));
  return users;
}

std::vector<Vec2> hotspot_users(const NetworkTopology& topology, std::size_t n, Rng& rng) {
  std::vector<Vec2> micros;
  for (const auto& bs : topology.stations) {
    if (bs.tier == Tier::Micro) micros.push_back(bs.position);
  }
  if (micros.empty()) return uniform_users(topology.bounds, n, rng);

  auto clustered = static_cast<std::size_t>(std::ceil(kHotspotFraction * static_cast<double>(n)));
  clustered = std::min(clustered, n);
  std::uniform_int_distribution<std::size_t> pick(0, micros.size() - 1);
  std::normal_distribution<double> offset(0.0, kHotspotSigmaM);

  std::vector<Vec2> users;
  users.reserve(n);
  for (std::size_t i = 0; i < clustered; ++i) {
    Vec2 center = micros[pick(rng)];
    double dx = offset(rng);
    double dy = offset(rng);
    users.push_back(topology.bounds.clamp({center.x + dx, center.y + dy}));
  }
  for (std::size_t i = clustered; i < n; ++i) users.push_back(uniform_point(topology.bounds, rng));
  return users;
}

BaseStation make_station(int id, Tier tier, Vec2 position) {
  auto limits = default_tier_limits(tier);
  return {id, tier, position, limits.p_min_mw, limits.p_max_mw, limits.band_hz};
}

// Fixed ring of micro cells around the deployment center.
std::vector<Vec2> micro_ring(const Bounds& bounds, std::size_t count) {
  constexpr double kRadiusM = 650.0;
  std::vector<Vec2> out;
  Vec2 c = bounds.center();
  for (std::size_t k = 0; k < count; ++k) {
    double angle = (18.0 + 36.0 * static_cast<double>(k)) * std::numbers::pi / 180.0;
    out.push_back({c.x + kRadiusM * std::cos(angle), c.y + kRadiusM * std::sin(angle)});
  }
  return out;
}

}  // namespace

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Vec2 Bounds::clamp(Vec2 p) const {
  return {std::clamp(p.x, xmin, xmax), std::clamp(p.y, ymin, ymax)};
}

std::string_view to_string(Tier tier) { return tier == Tier::Macro ? "Macro" : "Micro"; }

std::optional<Tier> parse_tier(std::string_view text) {
  auto t = lower(trim(text));
  if (t == "macro") return Tier::Macro;
  if (t == "micro") return Tier::Micro;
  return std::nullopt;
}

TierDefaults default_tier_limits(Tier tier) {
  if (tier == Tier::Macro) return {1000.0, 40000.0, 20e6};
  return {100.0, 1000.0, 10e6};
}

TopologyParseError::TopologyParseError(const std::string& source, int line,
                                       const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::size_t NetworkTopology::n_macro() const {
  return static_cast<std::size_t>(std::count_if(
      stations.begin(), stations.end(), [](const auto& s) { return s.tier == Tier::Macro; }));
}

std::size_t NetworkTopology::n_micro() const { return n_stations() - n_macro(); }

void NetworkTopology::validate(bool require_users) const {
  if (!(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin)) {
    throw TopologyValidationError("bounds must have positive extent");
  }
  if (stations.empty()) throw TopologyValidationError("topology has no base stations");
  if (require_users && users.empty()) throw TopologyValidationError("topology has no users");

  std::set<int> ids;
  double min_macro_pmax = INFINITY;
  double max_micro_pmax = 0.0;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const auto& bs = stations[i];
    std::string tag = "station " + std::to_string(bs.id);
    if (!ids.insert(bs.id).second) throw TopologyValidationError("duplicate " + tag);
    if (!bounds.contains(bs.position)) throw TopologyValidationError(tag + " lies outside bounds");
    if (!(bs.p_min_mw > 0.0)) throw TopologyValidationError(tag + ": p_min must be > 0");
    if (!(bs.p_max_mw > bs.p_min_mw)) throw TopologyValidationError(tag + ": p_max must exceed p_min");
    if (!(bs.band_total_hz > 0.0)) throw TopologyValidationError(tag + ": band must be > 0");
    for (std::size_t j = 0; j < i; ++j) {
      if (stations[j].position == bs.position) {
        throw TopologyValidationError(tag + " shares its position with station " +
                                      std::to_string(stations[j].id));
      }
    }
    if (bs.tier == Tier::Macro) {
      min_macro_pmax = std::min(min_macro_pmax, bs.p_max_mw);
    } else {
      max_micro_pmax = std::max(max_micro_pmax, bs.p_max_mw);
    }
  }
  if (min_macro_pmax < max_micro_pmax) {
    throw TopologyValidationError("a micro station's p_max exceeds a macro station's p_max");
  }
  for (const auto& u : users) {
    if (!bounds.contains(u)) throw TopologyValidationError("user position outside bounds");
  }
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::DenseUrban: return "dense-urban";
    case ScenarioKind::SparseSuburban: return "sparse-suburban";
    case ScenarioKind::Hotspot: return "hotspot";
    case ScenarioKind::Mixed: return "mixed";
  }
  return "unknown";
}

std::optional<ScenarioKind> parse_scenario(std::string_view text) {
  auto t = lower(trim(text));
  std::replace(t.begin(), t.end(), '_', '-');
  for (auto kind : kAllScenarios) {
    if (t == to_string(kind)) return kind;
  }
  if (t == "denseurban") return ScenarioKind::DenseUrban;
  if (t == "sparsesuburban") return ScenarioKind::SparseSuburban;
  return std::nullopt;
}

UserLayout user_layout_for(ScenarioKind kind) {
  return kind == ScenarioKind::Hotspot ? UserLayout::Hotspot : UserLayout::Uniform;
}

NetworkTopology parse_topology(std::istream& in, const std::string& source_name) {
  NetworkTopology topo;
  bool have_bounds = false;
  TierDefaults macro = default_tier_limits(Tier::Macro);
  TierDefaults micro = default_tier_limits(Tier::Micro);

  struct Row {
    int line;
    int id;
    Tier tier;
    Vec2 pos;
  };
  std::vector<Row> rows;

  auto to_double = [&](const std::string& field, int line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
      throw TopologyParseError(source_name, line, "invalid number '" + field + "'");
    }
    return value;
  };
  auto to_int = [&](const std::string& field, int line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw TopologyParseError(source_name, line, "invalid station id '" + field + "'");
    }
    return value;
  };

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (line.front() == '#') {
      auto directive = lower(fields[0]);
      if (directive == "#bounds") {
        if (fields.size() != 5) {
          throw TopologyParseError(source_name, line_no, "#bounds expects xmin,ymin,xmax,ymax");
        }
        topo.bounds = {to_double(fields[1], line_no), to_double(fields[2], line_no),
                       to_double(fields[3], line_no), to_double(fields[4], line_no)};
        have_bounds = true;
      } else if (directive == "#tier") {
        if (fields.size() != 5) {
          throw TopologyParseError(source_name, line_no,
                                   "#tier expects tier,p_min_mW,p_max_mW,band_Hz");
        }
        auto tier = parse_tier(fields[1]);
        if (!tier) throw TopologyParseError(source_name, line_no, "unknown tier '" + fields[1] + "'");
        TierDefaults d{to_double(fields[2], line_no), to_double(fields[3], line_no),
                       to_double(fields[4], line_no)};
        (*tier == Tier::Macro ? macro : micro) = d;
      }
      continue;  // other '#' lines are comments
    }
    if (lower(fields[0]) == "id") continue;  // column-name header
    if (fields.size() != 4) {
      throw TopologyParseError(source_name, line_no, "expected id,tier,x_m,y_m");
    }
    auto tier = parse_tier(fields[1]);
    if (!tier) throw TopologyParseError(source_name, line_no, "unknown tier '" + fields[1] + "'");
    rows.push_back({line_no, to_int(fields[0], line_no), *tier,
                    {to_double(fields[2], line_no), to_double(fields[3], line_no)}});
  }
  if (!have_bounds) throw TopologyParseError(source_name, line_no, "missing #bounds header");

  for (const auto& row : rows) {
    const auto& d = row.tier == Tier::Macro ? macro : micro;
    topo.stations.push_back({row.id, row.tier, row.pos, d.p_min_mw, d.p_max_mw, d.band_hz});
  }
  topo.validate(/*require_users=*/false);
  return topo;
}

NetworkTopology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file " + path.string());
  return parse_topology(in, path.string());
}

void write_topology(std::ostream& out, const NetworkTopology& topology) {
  const auto& b = topology.bounds;
  out << "#bounds," << format_number(b.xmin) << ',' << format_number(b.ymin) << ','
      << format_number(b.xmax) << ',' << format_number(b.ymax) << '\n';
  for (Tier tier : {Tier::Macro, Tier::Micro}) {
    auto it = std::find_if(topology.stations.begin(), topology.stations.end(),
                           [tier](const auto& s) { return s.tier == tier; });
    TierDefaults d = default_tier_limits(tier);
    if (it != topology.stations.end()) d = {it->p_min_mw, it->p_max_mw, it->band_total_hz};
    out << "#tier," << to_string(tier) << ',' << format_number(d.p_min_mw) << ','
        << format_number(d.p_max_mw) << ',' << format_number(d.band_hz) << '\n';
  }
  out << "id,tier,x_m,y_m\n";
  for (const auto& s : topology.stations) {
    out << s.id << ',' << to_string(s.tier) << ',' << format_number(s.position.x) << ','
        << format_number(s.position.y) << '\n';
  }
}

std::vector<Vec2> macro_triangle(const Bounds& bounds, double side_m) {
  double radius = side_m / std::sqrt(3.0);
  Vec2 c = bounds.center();
  std::vector<Vec2> out;
  for (double deg : {90.0, 210.0, 330.0}) {
    double a = deg * std::numbers::pi / 180.0;
    out.push_back({c.x + radius * std::cos(a), c.y + radius * std::sin(a)});
  }
  return out;
}

NetworkTopology generate_scenario(ScenarioKind kind, std::size_t n_users, std::uint64_t seed) {
  if (n_users == 0) throw std::invalid_argument("generate_scenario: n_users must be >= 1");
  NetworkTopology topo;
  int id = 0;
  for (auto p : macro_triangle(topo.bounds)) topo.stations.push_back(make_station(id++, Tier::Macro, p));

  constexpr std::size_t kMicroCount = 10;
  switch (kind) {
    case ScenarioKind::SparseSuburban:
      break;
    case ScenarioKind::DenseUrban:
    case ScenarioKind::Hotspot:
      for (auto p : micro_ring(topo.bounds, kMicroCount)) {
        topo.stations.push_back(make_station(id++, Tier::Micro, p));
      }
      break;
    case ScenarioKind::Mixed: {
      auto rng = make_rng(seed, 11);
      while (topo.n_micro() < kMicroCount) {
        Vec2 p = uniform_point(topo.bounds, rng);
        bool taken = std::any_of(topo.stations.begin(), topo.stations.end(),
                                 [&](const auto& s) { return s.position == p; });
        if (!taken) topo.stations.push_back(make_station(id++, Tier::Micro, p));
      }
      break;
    }
  }
  topo.users = sample_users(topo, user_layout_for(kind), n_users, mix_seed(seed, 12));
  topo.validate();
  return topo;
}

NetworkTopology place_users(NetworkTopology topology, std::size_t n_users, std::uint64_t seed) {
  topology.users = sample_users(topology, UserLayout::Uniform, n_users, seed);
  return topology;
}

std::vector<Vec2> sample_users(const NetworkTopology& topology, UserLayout layout,
                               std::size_t n_users, std::uint64_t seed) {
  Rng rng(seed);
  switch (layout) {
    case UserLayout::Uniform: return uniform_users(topology.bounds, n_users, rng);
    case UserLayout::Hotspot: return hotspot_users(topology, n_users, rng);
    case UserLayout::Fixed: return topology.users;
  }
  return {};
}

}  // namespace hetnet
