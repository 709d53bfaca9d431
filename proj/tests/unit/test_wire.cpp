#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "hetnet/policy.hpp"
#include "hetnet/wire.hpp"

using namespace hetnet;
using nlohmann::json;

namespace {

EnvConfig dense_urban(std::size_t users) {
  EnvConfig c;
  c.topology = generate_scenario(ScenarioKind::DenseUrban, users, 0);
  c.user_layout = user_layout_for(ScenarioKind::DenseUrban);
  c.n_users = users;
  c.horizon = 8;
  return c;
}

json ask(WireServer& s, const json& req) { return json::parse(s.handle(req.dump())); }

}  // namespace

TEST_SUITE("wire") {
  TEST_CASE("spaces report the full-size layout") {
    WireServer s(dense_urban(50));
    auto r = ask(s, {{"id", 3}, {"kind", "spaces"}});
    CHECK(r["kind"] == "spaces_reply");
    CHECK(r["id"] == 3);
    CHECK(r["state_dim"] == 839);
    CHECK(r["action_dim"] == 76);
  }

  TEST_CASE("reset is reproducible per seed") {
    WireServer s(dense_urban(20));
    auto a = ask(s, {{"id", 1}, {"kind", "reset"}, {"seed", 7}});
    auto b = ask(s, {{"id", 2}, {"kind", "reset"}, {"seed", 7}});
    auto c = ask(s, {{"id", 3}, {"kind", "reset"}, {"seed", 8}});
    CHECK(a["kind"] == "state_reply");
    CHECK(a["state"] == b["state"]);
    CHECK(a["state"] != c["state"]);
  }

  TEST_CASE("protocol errors keep the session alive") {
    WireServer s(testing::tiny_env(3));
    auto early = ask(s, {{"id", 1}, {"kind", "step"}, {"action", json::array({0.5, 0.5, 0.5, 0.5})}});
    CHECK(early["kind"] == "error");
    CHECK(early["id"] == 1);

    for (const char* line : {"", "{", "[1,2]", "42", "{\"kind\":5}", "{\"id\":9}", "{\"kind\":\"dance\"}",
                             "{\"kind\":\"reset\",\"seed\":-1}", "{\"kind\":\"reset\",\"seed\":\"x\"}",
                             "\xff\xfe", "{\"kind\":\"step\",\"action\":\"no\"}"}) {
      auto r = json::parse(s.handle(line));
      CHECK(r["kind"] == "error");
      CHECK(r["message"].is_string());
    }

    ask(s, {{"kind", "reset"}, {"seed", 1}});
    auto wrong = ask(s, {{"id", "w"}, {"kind", "step"}, {"action", json::array({0.5, 0.5})}});
    CHECK(wrong["kind"] == "error");
    CHECK(wrong["id"] == "w");
    auto typed = ask(s, {{"kind", "step"}, {"action", json::array({0.5, "a", 0.5, 0.5})}});
    CHECK(typed["kind"] == "error");
    auto ok = ask(s, {{"kind", "step"}, {"action", json::array({0.5, 0.5, 0.5, 0.5})}});
    CHECK(ok["kind"] == "step_reply");
  }

  TEST_CASE("random request fuzzing never breaks the one-reply contract") {
    WireServer s(testing::tiny_env(3));
    Rng rng = make_rng(5);
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 500; ++i) {
      json req = {{"id", i}};
      switch (pick(rng)) {
        case 0: req["kind"] = "reset"; req["seed"] = i; break;
        case 1:
        case 2: {
          req["kind"] = "step";
          json a = json::array();
          int n = pick(rng) == 0 ? 3 : 4;
          for (int k = 0; k < n; ++k) a.push_back(u(rng));
          req["action"] = a;
          break;
        }
        case 3: req["kind"] = "spaces"; break;
        case 4: req["kind"] = "bogus"; break;
        default: req["junk"] = u(rng); break;
      }
      auto reply = s.handle(req.dump());
      CHECK(reply.find('\n') == std::string::npos);
      auto r = json::parse(reply);
      CHECK(r["id"] == i);
      CHECK(r["kind"].is_string());
    }
    CHECK_FALSE(s.closed());
  }

  TEST_CASE("a proxied episode reproduces the native trajectory exactly") {
    auto cfg = dense_urban(20);
    WireServer s(cfg);
    HetNetEnv native(cfg);
    RandomPolicy wire_actor(3), native_actor(3);

    auto first = ask(s, {{"kind", "reset"}, {"seed", 99}});
    auto s0 = native.reset(99);
    CHECK(first["state"].get<std::vector<double>>() == s0);
    for (int t = 0; t < cfg.horizon; ++t) {
      auto a = native_actor.act(native);
      CHECK(wire_actor.act(native) == a);
      auto out = native.step(a);
      auto r = ask(s, {{"kind", "step"}, {"action", a}});
      REQUIRE(r["kind"] == "step_reply");
      CHECK(r["reward"].get<double>() == out.reward);
      CHECK(r["done"].get<bool>() == out.done);
      CHECK(r["state"].get<std::vector<double>>() == out.next_state);
    }
    auto after = ask(s, {{"kind", "step"}, {"action", std::vector<double>(cfg.topology.n_stations() * 2 + 20, 0.5)}});
    CHECK(after["kind"] == "error");
  }

  TEST_CASE("serve loop answers line by line and stops at close") {
    std::istringstream in(
        "{\"id\":1,\"kind\":\"spaces\"}\n\n{\"id\":2,\"kind\":\"close\"}\n{\"id\":3,\"kind\":\"spaces\"}\n");
    std::ostringstream out;
    CHECK(serve(testing::tiny_env(3), in, out) == 0);
    std::istringstream lines(out.str());
    std::string l1, l2, l3;
    std::getline(lines, l1);
    std::getline(lines, l2);
    CHECK_FALSE(std::getline(lines, l3));
    CHECK(json::parse(l1)["kind"] == "spaces_reply");
    CHECK(json::parse(l2) == json{{"id", 2}, {"kind", "close"}});
  }
}
