#include <doctest.h>

#include <chrono>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/server.hpp"

using namespace cyclic_swarm;
namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

ScenarioConfig scenario() {
  ScenarioConfig c;
  c.model = Model::Linear;
  c.n = 6;
  c.prng_seed = 7;
  c.schedule = ControlSchedule({{0.0, {0, 0}, LeaderSet::from_string("110111")}}, 50.0);
  return c;
}

// Runs a server on its own thread for the lifetime of the fixture.
struct Running {
  Session session{scenario(), {}};
  SessionServer server{session, [] {
                         ServerOptions o;
                         o.tick_period = std::chrono::milliseconds(10);
                         return o;
                       }()};
  std::thread thread{[this] { server.run(); }};
  ~Running() {
    server.stop();
    thread.join();
  }
};

tcp::socket connect(net::io_context& ioc, std::uint16_t port) {
  tcp::socket s(ioc);
  s.connect({net::ip::make_address("127.0.0.1"), port});
  return s;
}

struct LineReader {
  tcp::socket& socket;
  std::string buf;
  json next() {
    const auto n = net::read_until(socket, net::dynamic_buffer(buf), '\n');
    auto j = json::parse(buf.substr(0, n));
    buf.erase(0, n);
    return j;
  }
  // Skips snapshots until a message with `key` arrives.
  json await(const char* key) {
    for (int i = 0; i < 1000; ++i) {
      auto j = next();
      if (j.contains(key)) return j;
    }
    FAIL("no message with key " << key);
    return {};
  }
};

}  // namespace

TEST_CASE("line clients receive snapshots, acks and rejects") {
  Running r;
  REQUIRE(r.server.port() != 0);
  net::io_context ioc;
  auto sock = connect(ioc, r.server.port());
  net::write(sock, net::buffer(std::string(R"({"v":1,"cmd":"set_uc","ux":6,"uy":3})") + "\n"));
  LineReader in{sock, {}};
  const auto ack = in.await("ack");
  CHECK(ack["v"] == 1);
  CHECK(ack["ack"]["cmd"] == "set_uc");

  json snap;
  for (int i = 0; i < 50; ++i) snap = in.await("snapshot");
  CHECK(snap["snapshot"]["u_c"] == json::array({6.0, 3.0}));
  CHECK(snap["snapshot"]["n_l"] == 5);
  CHECK(snap["snapshot"]["t"].get<double>() > 0.0);

  net::write(sock, net::buffer(std::string("{\"cmd\":\"pause\"}\n")));
  const auto rej = in.await("reject");
  CHECK(rej["v"] == 1);
  CHECK_FALSE(rej["reject"]["reason"].get<std::string>().empty());
}

TEST_CASE("a silent client is a listening line client") {
  Running r;
  net::io_context ioc;
  auto sock = connect(ioc, r.server.port());
  LineReader in{sock, {}};
  const auto first = in.await("snapshot");
  const auto second = in.await("snapshot");
  CHECK(second["snapshot"]["seq"].get<std::uint64_t>() > first["snapshot"]["seq"].get<std::uint64_t>());
}

TEST_CASE("websocket clients speak the same protocol on /session") {
  Running r;
  net::io_context ioc;
  websocket::stream<tcp::socket> ws(connect(ioc, r.server.port()));
  ws.handshake("127.0.0.1", "/session");
  beast::flat_buffer buf;
  ws.read(buf);
  CHECK(json::parse(beast::buffers_to_string(buf.data())).contains("snapshot"));
  buf.clear();
  ws.text(true);
  ws.write(net::buffer(std::string(R"({"v":1,"cmd":"set_leaders","flags":"100000"})")));
  json ack;
  for (int i = 0; i < 1000 && !ack.contains("ack"); ++i) {
    ws.read(buf);
    ack = json::parse(beast::buffers_to_string(buf.data()));
    buf.clear();
  }
  CHECK(ack["ack"]["cmd"] == "set_leaders");
  json snap;
  do {
    ws.read(buf);
    snap = json::parse(beast::buffers_to_string(buf.data()));
    buf.clear();
  } while (!snap.contains("snapshot"));
  CHECK(snap["snapshot"]["n_l"] == 1);
  ws.close(websocket::close_code::normal);
}

TEST_CASE("other http paths get 404") {
  Running r;
  net::io_context ioc;
  auto sock = connect(ioc, r.server.port());
  http::request<http::empty_body> req(http::verb::get, "/elsewhere", 11);
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  CHECK(res.result() == http::status::not_found);
}

TEST_CASE("binding a taken port is an io error") {
  Running r;
  Session other(scenario());
  ServerOptions o;
  o.port = r.server.port();
  CHECK_THROWS_AS(SessionServer(other, o), IoError);
}
