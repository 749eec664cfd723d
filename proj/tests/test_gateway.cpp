#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <boost/asio.hpp>

#include "cspmon/error.hpp"
#include "cspmon/gateway/listener.hpp"
#include "cspmon/gateway/queue.hpp"

using namespace cspmon;
using namespace cspmon::gateway;
using nlohmann::json;

namespace {

// A cut-down speed monitor: unsafe speeds must be followed by a stop.
const char* kModel =
    "channel system_init, speed_ok, protective_stop\n"
    "channel foot_pedal_pressed : Bool\n"
    "channel speed : {0..4}\n"
    "P = system_init -> RUN\n"
    "RUN = foot_pedal_pressed?_ -> RUN\n"
    "   [] speed?v:{0..1} -> speed_ok -> RUN\n"
    "   [] speed?v:{2..4} -> protective_stop -> RUN\n";

const char* kMapping =
    "# test mapping\n"
    "unmatched = drop\n"
    "prelude = system_init\n"
    "rule 10 pedal when down == true emit foot_pedal_pressed.True\n"
    "rule 10 pedal when down == false emit foot_pedal_pressed.False\n"
    "rule 5 armSpeed emit speed.bin($v, 10)\n"
    "rule 5 monitor when verdict == \"ok\" emit speed_ok\n"
    "rule 5 monitor when verdict == \"stop\" emit protective_stop\n";

std::shared_ptr<const ResolvedSpec> model() {
  static auto s = resolve_text(kModel);
  return s;
}

std::shared_ptr<const MappingTable> table(const char* text = kMapping) {
  return std::make_shared<MappingTable>(parse_mapping(text, *model()));
}

EventId ev(const std::string& name) { return model()->parse_event(name); }

EventId mapped(const std::string& raw_json, const MappingTable& t) {
  auto r = map_event(raw_event_from_json(json::parse(raw_json)), t, *model());
  REQUIRE(std::holds_alternative<EventId>(r));
  return std::get<EventId>(r);
}

ErrorKind mapping_error(const std::string& text) {
  try {
    parse_mapping(text, *model());
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("mapping parsed");
  return ErrorKind::Format;
}

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("cspmon_gw_" + name);
  std::ofstream(path) << content;
  return path.string();
}

std::string pedal(bool down) { return json{{"name", "pedal"}, {"down", down}}.dump(); }
std::string arm(double v) { return json{{"name", "armSpeed"}, {"v", v}}.dump(); }
std::string verdict(const char* v) { return json{{"name", "monitor"}, {"verdict", v}}.dump(); }

/// Starts a listener on a free loopback port.
struct Loopback {
  explicit Loopback(Endpoint::Scheme scheme = Endpoint::Scheme::Tcp, ListenOptions opts = {})
      : listener(model(), "P", table(), std::move(opts)) {
    Endpoint ep;
    ep.scheme = scheme;
    ep.host = "127.0.0.1";
    ep.path = "/events";
    listener.start(ep);
  }
  Endpoint endpoint() const { return listener.endpoint(); }
  Listener listener;
};

/// Offline counterpart of a connection: the same session logic fed directly.
std::vector<json> offline(const std::vector<std::string>& messages, OnReject policy = OnReject::Halt) {
  GatewaySession s(model(), "P", table(), policy);
  std::vector<json> frames;
  for (const auto& m : messages) {
    Reply r = s.handle(m);
    if (r.frame) frames.push_back(*r.frame);
    if (r.halt) break;
  }
  return frames;
}

}  // namespace

TEST_CASE("mapping translates raw events") {
  auto t = table();
  CHECK(mapped(R"({"name":"pedal","down":true})", *t) == ev("foot_pedal_pressed.True"));
  CHECK(mapped(R"({"name":"pedal","fields":{"down":false}})", *t) == ev("foot_pedal_pressed.False"));
  CHECK(mapped(R"({"name":"armSpeed","v":0.37})", *t) == ev("speed.3"));
  CHECK(mapped(R"({"name":"armSpeed","v":0.0})", *t) == ev("speed.0"));
  CHECK(mapped(R"({"name":"monitor","verdict":"stop"})", *t) == ev("protective_stop"));
  CHECK(t->prelude == std::vector<EventId>{ev("system_init")});
}

TEST_CASE("binning out of range is an error, not a clamp") {
  auto t = table();
  for (double v : {99.0, 0.5, -0.01}) {
    try {
      map_event(raw_event_from_json(json{{"name", "armSpeed"}, {"v", v}}), *t, *model());
      FAIL("mapped " << v);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::PayloadOutOfRange);
    }
  }
}

TEST_CASE("unmatched events follow the policy") {
  auto drop = table();
  auto r = map_event(raw_event_from_json(json{{"name", "heartbeat"}}), *drop, *model());
  CHECK(std::holds_alternative<Dropped>(r));
  // A pedal event with no matching condition is unmatched too.
  r = map_event(raw_event_from_json(json{{"name", "pedal"}, {"down", 3}}), *drop, *model());
  CHECK(std::holds_alternative<Dropped>(r));

  auto strict = table("unmatched = error\n");
  CHECK(strict->rules.empty());
  try {
    map_event(raw_event_from_json(json{{"name", "pedal"}, {"down", true}}), *strict, *model());
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnmatchedEvent);
  }
}

TEST_CASE("first rule by priority wins, ties by file order") {
  auto t = table(
      "rule 1 x emit speed.0\n"
      "rule 9 x when k >= 2 emit speed.2\n"
      "rule 9 x when k >= 1 emit speed.1\n"
      "rule 9 x when k >= 3 emit speed.3\n");
  CHECK(mapped(R"({"name":"x","k":5})", *t) == ev("speed.2"));
  CHECK(mapped(R"({"name":"x","k":1})", *t) == ev("speed.1"));
  CHECK(mapped(R"({"name":"x","k":0})", *t) == ev("speed.0"));
}

TEST_CASE("field references and range conditions") {
  auto t = table(
      "rule 0 s when v >= 0 and v < 2 emit speed.$v\n"
      "rule 0 p emit foot_pedal_pressed.$down\n");
  CHECK(mapped(R"({"name":"s","v":1})", *t) == ev("speed.1"));
  CHECK(mapped(R"({"name":"p","down":false})", *t) == ev("foot_pedal_pressed.False"));
  CHECK_THROWS_AS(mapped(R"({"name":"s","v":3})", *t), Error);  // unmatched under the default policy
}

TEST_CASE("mapping files are validated against the channels") {
  CHECK(mapping_error("rule 0 x emit nosuch\n") == ErrorKind::UnknownChannel);
  CHECK(mapping_error("rule 0 x emit speed\n") == ErrorKind::ArityMismatch);
  CHECK(mapping_error("rule 0 x emit speed_ok.1\n") == ErrorKind::ArityMismatch);
  CHECK(mapping_error("rule 0 x emit speed.7\n") == ErrorKind::BadPayload);
  CHECK(mapping_error("rule 0 x emit foot_pedal_pressed.3\n") == ErrorKind::BadPayload);
  CHECK(mapping_error("rule x emit speed_ok\n") == ErrorKind::Syntax);
  CHECK(mapping_error("unmatched = maybe\n") == ErrorKind::Syntax);
  CHECK(mapping_error("prelude = nosuch\n") == ErrorKind::UnknownChannel);
  try {
    parse_mapping("unmatched = drop\n\nrule 0 x emit nosuch\n", *model());
  } catch (const Error& e) {
    CHECK(e.pos().line == 3);
  }
}

TEST_CASE("reading event logs") {
  auto t = table();
  auto empty = temp_file("empty.jsonl", "");
  CHECK(read_trace_file(empty, *t, *model()) == std::vector<EventId>{ev("system_init")});

  auto log = temp_file("log.jsonl", pedal(true) + "\n\n" + R"({"name":"heartbeat"})" + "\n" + arm(0.2) + "\n" +
                                        R"({"event":"speed_ok"})" + "\n");
  CHECK(read_trace_file(log, *t, *model()) ==
        std::vector<EventId>{ev("system_init"), ev("foot_pedal_pressed.True"), ev("speed.2"), ev("speed_ok")});

  auto bad = temp_file("bad.jsonl", pedal(true) + "\n" + arm(0.1) + "\n{\"name\": \n" + arm(0.1) + "\n");
  try {
    read_trace_file(bad, *t, *model());
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK(e.pos().line == 3);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }

  auto range = temp_file("range.jsonl", pedal(true) + "\n" + arm(9.0) + "\n");
  try {
    read_trace_file(range, *t, *model());
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PayloadOutOfRange);
    CHECK(e.pos().line == 2);
  }
  CHECK_THROWS_AS(read_trace_file("/nonexistent/x.jsonl", *t, *model()), Error);
}

TEST_CASE("bounded queue preserves order and blocks when full") {
  BoundedQueue<int> q(4);
  std::atomic<int> pushed{0};
  std::thread producer([&] {
    for (int i = 0; i < 100; ++i) {
      REQUIRE(q.push(int(i)));
      ++pushed;
    }
    q.close();
  });
  while (pushed < 4) std::this_thread::yield();
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(pushed == 4);  // blocked on the fifth
  std::vector<int> got;
  while (auto v = q.pop()) got.push_back(*v);
  producer.join();
  REQUIRE(got.size() == 100);
  for (int i = 0; i < 100; ++i) CHECK(got[i] == i);
  CHECK_FALSE(q.push(1));
  CHECK_FALSE(q.pop());
}

TEST_CASE("endpoints parse") {
  auto t = parse_endpoint("tcp://0.0.0.0:7780");
  CHECK(t.scheme == Endpoint::Scheme::Tcp);
  CHECK(t.host == "0.0.0.0");
  CHECK(t.port == 7780);
  auto w = parse_endpoint("ws://localhost:9000/events");
  CHECK(w.scheme == Endpoint::Scheme::WebSocket);
  CHECK(w.path == "/events");
  CHECK(w.to_string() == "ws://localhost:9000/events");
  CHECK_THROWS_AS(parse_endpoint("udp://x:1"), Error);
  CHECK_THROWS_AS(parse_endpoint("tcp://x"), Error);
  CHECK_THROWS_AS(parse_endpoint("tcp://x:99999"), Error);
}

TEST_CASE("client sends one event then closes") {
  std::vector<ConnectionFrame> frames;
  std::mutex mu;
  ListenOptions opts;
  opts.on_frame = [&](const ConnectionFrame& f) {
    std::lock_guard lock(mu);
    frames.push_back(f);
  };
  Loopback lb(Endpoint::Scheme::Tcp, opts);
  {
    boost::asio::io_context ioc;
    boost::asio::ip::tcp::socket sock(ioc);
    sock.connect({boost::asio::ip::make_address("127.0.0.1"), lb.endpoint().port});
    std::string line = pedal(true) + "\n";
    boost::asio::write(sock, boost::asio::buffer(line));
    sock.shutdown(boost::asio::ip::tcp::socket::shutdown_send);
    boost::asio::streambuf buf;
    boost::system::error_code ec;
    boost::asio::read_until(sock, buf, '\n', ec);
    REQUIRE_FALSE(ec);
    std::istream in(&buf);
    std::string reply;
    std::getline(in, reply);
    auto f = json::parse(reply);
    CHECK(f["outcome"] == "accepted");
    CHECK(f["index"] == 1);
    boost::asio::read_until(sock, buf, '\n', ec);
    CHECK(ec == boost::asio::error::eof);  // server closed its side
  }
  lb.listener.stop();
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].frame["outcome"] == "accepted");
}

TEST_CASE("a stream of safe speeds is accepted in order") {
  Loopback lb;
  std::vector<std::string> msgs;
  for (int i = 0; i < 50; ++i) {
    msgs.push_back(arm(0.1 * (i % 2)));
    msgs.push_back(verdict("ok"));
  }
  auto frames = replay(lb.endpoint(), msgs);
  REQUIRE(frames.size() == 100);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i]["outcome"] == "accepted");
    CHECK(frames[i]["index"] == i + 1);  // index 0 is the prelude
  }
}

TEST_CASE("unsafe speed then pedal is rejected at the pedal and halts") {
  Loopback lb;
  std::vector<std::string> msgs{pedal(true), arm(0.3), pedal(false), arm(0.0), verdict("ok")};
  auto frames = replay(lb.endpoint(), msgs);
  REQUIRE(frames.size() == 3);
  CHECK(frames[1]["outcome"] == "accepted");
  CHECK(frames[2]["outcome"] == "rejected");
  CHECK(frames[2]["index"] == 3);
  CHECK(frames[2]["acceptable"] == json::array({"protective_stop"}));
}

TEST_CASE("reset policy continues after a rejection") {
  ListenOptions opts;
  opts.on_reject = OnReject::Reset;
  Loopback lb(Endpoint::Scheme::Tcp, opts);
  std::vector<std::string> msgs{arm(0.3), pedal(false), arm(0.0), verdict("ok")};
  auto frames = replay(lb.endpoint(), msgs);
  REQUIRE(frames.size() == 4);
  CHECK(frames[1]["outcome"] == "rejected");
  CHECK(frames[2]["outcome"] == "accepted");
  CHECK(frames[2]["index"] == 1);  // fresh session after the prelude
  CHECK(frames[3]["outcome"] == "accepted");
}

TEST_CASE("malformed input and mapping errors halt with an error frame") {
  Loopback lb;
  auto frames = replay(lb.endpoint(), {pedal(true), "{oops", pedal(true)});
  REQUIRE(frames.size() == 2);
  CHECK(frames[1].contains("error"));
  frames = replay(lb.endpoint(), {arm(42.0), pedal(true)});
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].contains("error"));
}

TEST_CASE("websocket endpoints answer like tcp") {
  Loopback ws(Endpoint::Scheme::WebSocket);
  std::vector<std::string> msgs{pedal(true), arm(0.1), verdict("ok"), R"({"name":"heartbeat"})", arm(0.4),
                                verdict("ok")};
  auto frames = replay(ws.endpoint(), msgs);
  CHECK(frames == offline(msgs));
  REQUIRE(frames.size() == 5);
  CHECK(frames.back()["outcome"] == "rejected");

  Endpoint wrong = ws.endpoint();
  wrong.path = "/elsewhere";
  CHECK_THROWS_AS(replay(wrong, msgs), Error);
}

TEST_CASE("chunked delivery does not change the verdicts") {
  Loopback lb;
  std::mt19937 rng(7);
  std::vector<std::string> msgs;
  for (int i = 0; i < 40; ++i) {
    if (rng() % 3 == 0) msgs.push_back(pedal(rng() % 2));
    msgs.push_back(arm(0.1 * (rng() % 2)));
    msgs.push_back(R"({"event":"speed_ok"})");
  }
  auto whole = replay(lb.endpoint(), msgs);
  CHECK(whole == offline(msgs));
  for (std::size_t chunk : {1, 2, 3, 7, 16, 61}) {
    CHECK(replay(lb.endpoint(), msgs, chunk) == whole);
  }
}

TEST_CASE("connections are independent") {
  Loopback lb;
  std::vector<std::string> good{pedal(true), arm(0.1), verdict("ok")};
  std::vector<std::string> bad{arm(0.3), verdict("ok")};
  std::vector<std::vector<json>> results(8);
  std::vector<std::thread> clients;
  for (int i = 0; i < 8; ++i) {
    clients.emplace_back([&, i] { results[i] = replay(lb.endpoint(), i % 2 ? bad : good); });
  }
  for (auto& c : clients) c.join();
  for (int i = 0; i < 8; ++i) CHECK(results[i] == offline(i % 2 ? bad : good));
  CHECK(lb.listener.connections_accepted() == 8);
}

TEST_CASE("offline and online replay agree on random logs") {
  Loopback lb;
  Loopback ws(Endpoint::Scheme::WebSocket);
  std::mt19937 rng(11);
  for (int round = 0; round < 30; ++round) {
    std::vector<std::string> msgs;
    int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      switch (rng() % 5) {
        case 0: msgs.push_back(pedal(rng() % 2)); break;
        case 1: msgs.push_back(arm(0.1 * (rng() % 5))); break;
        case 2: msgs.push_back(verdict(rng() % 2 ? "ok" : "stop")); break;
        case 3: msgs.push_back(R"({"name":"heartbeat"})"); break;
        default: msgs.push_back(arm(0.1 * (rng() % 2))); msgs.push_back(verdict("ok")); break;
      }
    }
    auto expected = offline(msgs);
    CHECK(replay(lb.endpoint(), msgs, rng() % 2 ? 0 : 1 + rng() % 20) == expected);
    CHECK(replay(ws.endpoint(), msgs) == expected);
  }
}

TEST_CASE("stop returns with a client still connected") {
  Loopback lb;
  boost::asio::io_context ioc;
  boost::asio::ip::tcp::socket sock(ioc);
  sock.connect({boost::asio::ip::make_address("127.0.0.1"), lb.endpoint().port});
  std::string line = pedal(true) + "\n";
  boost::asio::write(sock, boost::asio::buffer(line));
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  lb.listener.stop();
  CHECK(lb.listener.connections_accepted() == 1);
}
