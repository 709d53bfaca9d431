#include "hetnet/wire.hpp"

#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace hetnet {

using nlohmann::json;

namespace {

struct WireError {
  std::string message;
};

json error_reply(const json& id, const std::string& message) {
  return json{{"id", id}, {"kind", "error"}, {"message", message}};
}

ActionVector read_action(const json& req) {
  auto it = req.find("action");
  if (it == req.end() || !it->is_array()) throw WireError{"step needs an \"action\" array"};
  ActionVector a;
  a.reserve(it->size());
  for (const auto& v : *it) {
    if (v.is_number()) {
      a.push_back(v.get<double>());
    } else if (v.is_null()) {
      a.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      throw WireError{"action entries must be numbers"};
    }
  }
  return a;
}

}  // namespace

WireServer::WireServer(EnvConfig config) : env_(std::move(config)) {}

std::string WireServer::handle(std::string_view line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::parse_error&) {
    return error_reply(nullptr, "malformed message").dump();
  }
  if (!req.is_object()) return error_reply(nullptr, "message must be an object").dump();
  json id = req.contains("id") ? req["id"] : json(nullptr);
  auto kind_it = req.find("kind");
  if (kind_it == req.end() || !kind_it->is_string()) return error_reply(id, "missing \"kind\"").dump();
  const std::string kind = kind_it->get<std::string>();

  try {
    if (kind == "reset") {
      auto seed_it = req.find("seed");
      std::uint64_t seed = 0;
      if (seed_it != req.end()) {
        if (seed_it->is_number_unsigned()) {
          seed = seed_it->get<std::uint64_t>();
        } else if (seed_it->is_number_integer() && seed_it->get<std::int64_t>() >= 0) {
          seed = static_cast<std::uint64_t>(seed_it->get<std::int64_t>());
        } else {
          throw WireError{"seed must be a non-negative integer"};
        }
      }
      StateVector s = env_.reset(seed);
      return json{{"id", id}, {"kind", "state_reply"}, {"state", s}}.dump();
    }
    if (kind == "step") {
      if (!env_.started()) throw WireError{"step before reset"};
      if (env_.done()) throw WireError{"episode finished; reset first"};
      ActionVector a = read_action(req);
      if (a.size() != env_.action_dim()) {
        throw WireError{"action has " + std::to_string(a.size()) + " entries, expected " +
                        std::to_string(env_.action_dim())};
      }
      StepOutcome out = env_.step(a);
      return json{{"id", id}, {"kind", "step_reply"}, {"state", out.next_state}, {"reward", out.reward},
                  {"done", out.done}}
          .dump();
    }
    if (kind == "spaces") {
      return json{{"id", id},
                  {"kind", "spaces_reply"},
                  {"state_dim", env_.state_dim()},
                  {"action_dim", env_.action_dim()}}
          .dump();
    }
    if (kind == "close") {
      closed_ = true;
      return json{{"id", id}, {"kind", "close"}}.dump();
    }
    return error_reply(id, "unknown kind \"" + kind + "\"").dump();
  } catch (const WireError& e) {
    return error_reply(id, e.message).dump();
  } catch (const std::exception& e) {
    return error_reply(id, e.what()).dump();
  }
}

int serve(const EnvConfig& config, std::istream& in, std::ostream& out) {
  WireServer server(config);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << server.handle(line) << '\n' << std::flush;
    if (server.closed()) return 0;
  }
  return 0;
}

}  // namespace hetnet
