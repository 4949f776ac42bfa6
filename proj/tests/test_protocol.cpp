#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <set>
#include <thread>

#include "hiertask/errors.hpp"
#include "hiertask/protocol.hpp"
#include "hiertask/services.hpp"
#include "hiertask/transport.hpp"
#include "test_util.hpp"

using namespace hiertask;

TEST_CASE("every fixture envelope round-trips identically") {
  const auto lines =
      testutil::read_lines(testutil::share_dir() / "fixtures/envelopes.jsonl");
  REQUIRE(lines.size() == 7);  // one worked example per msg-type
  std::set<std::string> seen_types;
  for (const auto& line : lines) {
    const auto e = decode(line);
    seen_types.insert(to_string(e.type));
    const auto again = decode(encode(e));
    CHECK(again == e);
    // the encoded form parses to the same JSON as the fixture line
    CHECK(nlohmann::json::parse(encode(e)) == nlohmann::json::parse(line));
  }
  CHECK(seen_types.size() == 7);
}

TEST_CASE("decode rejects malformed input") {
  SUBCASE("empty object misses msg-type") {
    CHECK_THROWS_WITH_AS(decode("{}"), doctest::Contains("type"), DecodeError);
  }
  SUBCASE("truncated line reports the byte offset") {
    const std::string line =
        R"({"type":"Ack","msg_id":"a-1","sent_at":0,"payload":{)";
    try {
      decode(line);
      FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
      CHECK(e.byte_offset > 0);
    }
  }
  SUBCASE("unknown msg-type") {
    CHECK_THROWS_AS(
        decode(R"({"type":"Nope","msg_id":"x","sent_at":0,"payload":{}})"),
        DecodeError);
  }
  SUBCASE("missing payload") {
    CHECK_THROWS_AS(decode(R"({"type":"Ack","msg_id":"x","sent_at":0})"),
                    DecodeError);
  }
  SUBCASE("empty msg_id") {
    CHECK_THROWS_AS(
        decode(R"({"type":"Ack","msg_id":"","sent_at":0,"payload":{}})"),
        DecodeError);
  }
  SUBCASE("non-object payload") {
    CHECK_THROWS_AS(
        decode(R"({"type":"Ack","msg_id":"x","sent_at":0,"payload":3})"),
        DecodeError);
  }
}

TEST_CASE("round-trip property over synthesized envelopes") {
  std::mt19937 rng(2024);
  const MsgType types[] = {MsgType::TaskRequest, MsgType::StrategyResponse,
                           MsgType::InstructionDispatch, MsgType::Observation,
                           MsgType::Status, MsgType::Ack, MsgType::Error};
  for (int i = 0; i < 200; ++i) {
    Envelope e;
    e.type = types[rng() % 7];
    e.msg_id = "m-" + std::to_string(rng());
    if (rng() % 2) e.correlates_to = "c-" + std::to_string(rng());
    e.sent_at = static_cast<std::int64_t>(rng());
    e.payload = {{"k", std::to_string(rng())},
                 {"n", static_cast<int>(rng() % 1000)},
                 {"nested", {{"x", true}}}};
    CHECK(decode(encode(e)) == e);
  }
}

TEST_CASE("normalize_envelope renames ids in order of first appearance") {
  std::map<std::string, std::string> rename;
  auto a = normalize_envelope(
      nlohmann::json::parse(
          R"({"type":"Status","msg_id":"edge-7","correlates_to":"client-1","sent_at":123,"payload":{}})"),
      rename);
  CHECK(a.at("msg_id") == "m1");
  CHECK(a.at("correlates_to") == "m2");
  CHECK(a.at("sent_at") == 0);
  auto b = normalize_envelope(
      nlohmann::json::parse(
          R"({"type":"Ack","msg_id":"client-1","sent_at":9,"payload":{}})"),
      rename);
  CHECK(b.at("msg_id") == "m2");  // stable mapping across the log
}

TEST_CASE("in-process channel pair delivers FIFO and closes cleanly") {
  auto [a, b] = make_in_process_pair();
  for (int i = 0; i < 5; ++i) {
    Envelope e;
    e.type = MsgType::Ack;
    e.msg_id = "a-" + std::to_string(i);
    e.payload = {{"i", i}};
    CHECK(a->send(e));
  }
  for (int i = 0; i < 5; ++i) {
    const auto e = b->receive();
    REQUIRE(e.has_value());
    CHECK(e->msg_id == "a-" + std::to_string(i));
  }
  a->close();
  CHECK_FALSE(b->receive().has_value());
  CHECK_FALSE(b->send(Envelope{MsgType::Ack, "x", {}, 0, {}}));
}

TEST_CASE("tcp channel carries envelopes over a real socket") {
  TcpListener listener("127.0.0.1", 0);
  const int port = listener.bound_port();
  REQUIRE(port > 0);

  std::thread server([&] {
    auto conn = listener.accept();
    REQUIRE(conn);
    while (auto msg = conn->receive()) {
      Envelope reply;
      reply.type = MsgType::Ack;
      reply.msg_id = "srv-1";
      reply.correlates_to = msg->msg_id;
      reply.payload = msg->payload;
      conn->send(reply);
    }
  });

  auto client = tcp_dial("127.0.0.1", port);
  Envelope e;
  e.type = MsgType::TaskRequest;
  e.msg_id = "cli-1";
  e.payload = {{"task", {{"id", "t"}, {"description", "d"}}}};
  CHECK(client->send(e));
  const auto reply = client->receive();
  REQUIRE(reply.has_value());
  CHECK(reply->type == MsgType::Ack);
  CHECK(reply->correlates_to == "cli-1");
  CHECK(reply->payload == e.payload);
  client->close();
  server.join();
  listener.close();
}

TEST_CASE("garbage on the wire is answered with an Error envelope") {
  // raw socket writing a non-JSON line at a DeviceService listener
  World world =
      World::load(testutil::share_dir() / "worlds/survey_and_fetch.json");
  DeviceService device(std::move(world));
  TcpListener listener("127.0.0.1", 0);
  const int port = listener.bound_port();
  std::thread dt([&] { device.serve(listener); });

  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) ==
          0);
  const char garbage[] = "this is not an envelope\n";
  REQUIRE(::send(fd, garbage, sizeof(garbage) - 1, 0) > 0);
  std::string reply;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    REQUIRE(n > 0);
    reply.append(buf, static_cast<std::size_t>(n));
    if (reply.find('\n') != std::string::npos) break;
  }
  const auto e = decode(reply.substr(0, reply.find('\n')));
  CHECK(e.type == MsgType::Error);
  CHECK(e.payload.contains("byte_offset"));
  ::close(fd);
  listener.close();
  dt.join();
}

TEST_CASE("parse_address") {
  const auto [host, port] = parse_address("127.0.0.1:7102");
  CHECK(host == "127.0.0.1");
  CHECK(port == 7102);
  CHECK_THROWS_AS(parse_address("nocolon"), ConfigError);
  CHECK_THROWS_AS(parse_address("host:"), ConfigError);
  CHECK_THROWS_AS(parse_address(":123"), ConfigError);
}

TEST_CASE("causality: correlates_to always points backward in a log") {
  // use the fixture fetch run's edge log shape via a tiny synthetic exchange
  auto [client, server] = make_in_process_pair();
  std::vector<nlohmann::json> log;
  auto record = [&log](const std::string& dir, const Envelope& e) {
    log.push_back({{"dir", dir},
                   {"envelope", nlohmann::json::parse(encode(e))}});
  };
  LoggingChannel logged_client(std::move(client), record);

  std::thread peer([&] {
    auto msg = server->receive();
    Envelope reply;
    reply.type = MsgType::Status;
    reply.msg_id = "peer-1";
    reply.correlates_to = msg->msg_id;
    reply.payload = {{"state", "done"}};
    server->send(reply);
    server->close();
  });

  Envelope req;
  req.type = MsgType::TaskRequest;
  req.msg_id = "cli-1";
  req.payload = {{"task", {{"id", "t"}, {"description", "d"}}}};
  logged_client.send(req);
  (void)logged_client.receive();
  peer.join();

  std::set<std::string> seen;
  for (const auto& entry : log) {
    const auto& env = entry.at("envelope");
    if (env.contains("correlates_to")) {
      CHECK(seen.contains(env.at("correlates_to").get<std::string>()));
    }
    seen.insert(env.at("msg_id").get<std::string>());
  }
}
