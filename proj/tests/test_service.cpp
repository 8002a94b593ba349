#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <unistd.h>

#include "opscore/dataset/controllers.hpp"
#include "opscore/dataset/scoring.hpp"
#include "opscore/service/server.hpp"
#include "opscore/sim/scenario_io.hpp"

using namespace opscore;
using namespace opscore::service;
namespace fs = std::filesystem;

namespace {

const reward::DynamicModel& dyn_model() {
  static const auto m = [] {
    auto d = reward::DynamicModel::initialized(11);
    d.stats = reward::FeatureStats{Vec3(30, 15, 4), Vec3(8, 6, 2)};
    return d;
  }();
  return m;
}
const reward::SafetyModel& safety_model() {
  static const auto m = reward::SafetyModel::initialized(12);
  return m;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("opscore_service_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ServiceContext make_context(const std::string& name) {
  ServiceContext c;
  const auto sc = sim::reference_scenario();
  c.scenarios.emplace("reference", sim::Simulator(sc.excavator, sc.world));
  c.dynamic = &dyn_model();
  c.safety = &safety_model();
  c.record_dir = scratch_dir(name + "_rec");
  c.sessions_dir = scratch_dir(name + "_sessions");
  return c;
}

std::string msg(const ClientMessage& m) { return to_json(m).dump(); }

std::string type_of(const Json& j) { return j.at("type").get<std::string>(); }

void check_close(const reward::RewardBreakdown& a, const reward::RewardBreakdown& b, double tol) {
  CHECK(std::abs(a.r_g - b.r_g) <= tol);
  CHECK(std::abs(a.r_d - b.r_d) <= tol);
  CHECK(std::abs(a.r_s - b.r_s) <= tol);
  CHECK(std::abs(a.total - b.total) <= tol);
}

// Offline scoring of a session file, as the score subcommand does it.
std::vector<dataset::SessionScorer::StepScore> offline(const ServiceContext& c, const fs::path& file) {
  const auto log = dataset::read_session(file);
  dataset::SessionScorer scorer(c.scenarios.at(log.scenario), c.dynamic, c.safety);
  return dataset::score_steps(log, scorer);
}

}  // namespace

TEST_CASE("client messages round trip") {
  const std::vector<ClientMessage> all = {ControlMessage{JointVector(0.1, -0.2, 1.0, -1.0)}, ResetMessage{42},
                                          StartMessage{"reference"}, ReplayMessage{"abc"}};
  for (const auto& m : all) {
    const auto back = parse_client_message(msg(m));
    CHECK(back.index() == m.index());
    CHECK(to_json(back) == to_json(m));
    CHECK(to_json(m).at("schema_version") == 1);
  }
}

TEST_CASE("server messages round trip") {
  StateMessage s;
  s.t = 7;
  s.joints = JointVector(0.1, 0.2, 0.3, 0.4);
  s.bucket = Vec3(1.0 / 3.0, -150.25, 2.0);
  s.engine = {30.5, 12.25, 4.125};
  s.infractions_step << 1, 0, 0, 0, 0;
  s.infractions_total << 2, 1, 0, 0, 1;
  s.rewards = {0.1, 0.2, 0.3, 0.6};
  s.score_so_far = -26;
  SummaryMessage sum{"live-x", -26, false, s.infractions_total, 281};
  ErrorMessage e{"OUT_OF_RANGE", "nope"};
  for (const ServerMessage& m : std::vector<ServerMessage>{s, sum, e}) {
    const auto j = to_json(m);
    CHECK(j.at("schema_version") == 1);
    CHECK(to_json(parse_server_message(j.dump())) == j);
  }
  const auto back = std::get<StateMessage>(parse_server_message(to_json(ServerMessage{s}).dump()));
  CHECK(back.bucket(0) == 1.0 / 3.0);
}

TEST_CASE("client message validation") {
  auto code_of = [](const std::string& text) {
    try {
      parse_client_message(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("not json") == ErrorCode::MalformedMessage);
  CHECK(code_of("[1,2]") == ErrorCode::MalformedMessage);
  CHECK(code_of(R"({"type":"reset","seed":1})") == ErrorCode::MalformedMessage);
  CHECK(code_of(R"({"schema_version":2,"type":"reset","seed":1})") == ErrorCode::VersionMismatch);
  CHECK(code_of(R"({"schema_version":1,"type":"jump"})") == ErrorCode::MalformedMessage);
  CHECK(code_of(R"({"schema_version":1,"type":"control","setpoints":[0,0,0]})") == ErrorCode::MalformedMessage);
  CHECK(code_of(R"({"schema_version":1,"type":"control","setpoints":[0,0,"a",0]})") == ErrorCode::MalformedMessage);
  CHECK(code_of(R"({"schema_version":1,"type":"reset","seed":-3})") == ErrorCode::MalformedMessage);
  CHECK(code_of(R"({"schema_version":1,"type":"start"})") == ErrorCode::MalformedMessage);
}

TEST_CASE("session errors leave the session running") {
  const auto c = make_context("errors");
  FeedbackSession s(c);
  auto out = s.handle("{oops");
  REQUIRE(out.size() == 1);
  CHECK(out[0]["code"] == "MALFORMED_MESSAGE");
  out = s.handle(R"({"schema_version":9,"type":"reset","seed":0})");
  CHECK(out[0]["code"] == "VERSION_MISMATCH");
  out = s.handle(msg(StartMessage{"quarry"}));
  CHECK(out[0]["code"] == "UNKNOWN_SCENARIO");
  CHECK(s.mode() == FeedbackSession::Mode::idle);

  out = s.handle(msg(StartMessage{"reference"}));
  REQUIRE(out.size() == 1);
  CHECK(type_of(out[0]) == "state");
  CHECK(out[0]["t"] == 0);

  s.handle(msg(ControlMessage{JointVector(0.5, 0, 0, 0)}));
  out = s.handle(msg(ControlMessage{JointVector(0.2, 1.7, 0, 0)}));
  REQUIRE(out.size() == 1);
  CHECK(out[0]["code"] == "OUT_OF_RANGE");
  CHECK(s.held_setpoints() == JointVector(0.5, 0, 0, 0));
  out = s.tick();
  REQUIRE(out.size() == 1);
  CHECK(out[0]["t"] == 1);
}

TEST_CASE("idle controls keep the task reward constant") {
  const auto c = make_context("idle");
  FeedbackSession s(c);
  std::vector<Json> states = s.handle(msg(ResetMessage{3}));
  for (int i = 0; i < 20; ++i) {
    auto out = s.tick();
    states.insert(states.end(), out.begin(), out.end());
  }
  REQUIRE(states.size() == 21);
  for (std::size_t i = 0; i < states.size(); ++i) {
    CHECK(states[i]["t"] == static_cast<int>(i));
    CHECK(states[i]["rewards"]["r_g"].get<double>() == states[0]["rewards"]["r_g"].get<double>());
  }
  CHECK(states[0]["rewards"]["r_g"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("latest setpoints before a tick win") {
  const auto c = make_context("latest");
  FeedbackSession s(c);
  s.handle(msg(StartMessage{"reference"}));
  s.handle(msg(ControlMessage{JointVector(0.9, 0.9, 0.9, 0.9)}));
  s.handle(msg(ControlMessage{JointVector(-0.3, 0.1, 0.0, 0.2)}));
  for (int i = 0; i < 3; ++i) s.tick();
  // End the session to get the recording.
  s.handle(msg(ResetMessage{0}));
  REQUIRE(s.last_recording());
  const auto log = dataset::read_session(*s.last_recording());
  REQUIRE(log.steps.size() == 4);
  CHECK(log.steps[0].action == JointVector::Zero());
  for (std::size_t i = 1; i < 4; ++i) CHECK(log.steps[i].action == JointVector(-0.3, 0.1, 0.0, 0.2));
}

TEST_CASE("full live session: gapless, one summary, recording matches offline scoring") {
  const auto c = make_context("full");
  FeedbackSession s(c);
  std::vector<Json> out = s.handle(msg(ResetMessage{5}));
  s.handle(msg(ControlMessage{JointVector(0.4, 0.3, -0.2, 0.1)}));
  for (int i = 0; i < 400 && s.mode() == FeedbackSession::Mode::live; ++i) {
    auto step = s.tick();
    out.insert(out.end(), step.begin(), step.end());
  }
  CHECK(s.tick().empty());
  std::vector<Json> states;
  int summaries = 0;
  for (const auto& m : out) {
    if (type_of(m) == "state") states.push_back(m);
    if (type_of(m) == "summary") ++summaries;
  }
  CHECK(summaries == 1);
  CHECK(type_of(out.back()) == "summary");
  REQUIRE(states.size() == 281);
  for (std::size_t i = 0; i < states.size(); ++i) CHECK(states[i]["t"] == static_cast<int>(i));

  REQUIRE(s.last_recording());
  const auto scored = offline(c, *s.last_recording());
  REQUIRE(scored.size() == states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto st = std::get<StateMessage>(parse_server_message(states[i].dump()));
    check_close(st.rewards, scored[i].rewards, 1e-6);
    CHECK(st.score_so_far == scored[i].score_so_far);
  }
  const auto summary = std::get<SummaryMessage>(parse_server_message(out.back().dump()));
  const auto log = dataset::read_session(*s.last_recording());
  CHECK(summary.final_score == dataset::score_session(log));
  CHECK(summary.is_expert == (summary.final_score > -25));
  CHECK(summary.steps == 281);
  CHECK(summary.session_id == log.session_id);
}

TEST_CASE("reset mid-session closes the previous session with a summary") {
  const auto c = make_context("reset");
  FeedbackSession s(c);
  s.handle(msg(StartMessage{"reference"}));
  s.tick();
  const auto out = s.handle(msg(ResetMessage{9}));
  REQUIRE(out.size() == 2);
  CHECK(type_of(out[0]) == "summary");
  CHECK(out[0]["steps"] == 2);
  CHECK(type_of(out[1]) == "state");
  CHECK(out[1]["t"] == 0);
}

TEST_CASE("replay streams the offline scores") {
  auto c = make_context("replay");
  const auto& sim = c.scenarios.at("reference");
  auto log = dataset::run_scripted_controller(dataset::ControllerKind::novice, sim, 4);
  log.session_id = "novice-4";
  dataset::write_session(c.sessions_dir / "novice-4.jsonl", log);

  FeedbackSession s(c);
  CHECK(s.handle(msg(ReplayMessage{"novice-4"})).empty());
  std::vector<Json> out;
  while (s.mode() == FeedbackSession::Mode::replay) {
    auto step = s.tick();
    out.insert(out.end(), step.begin(), step.end());
  }
  const auto scored = offline(c, c.sessions_dir / "novice-4.jsonl");
  REQUIRE(out.size() == scored.size() + 1);
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto st = std::get<StateMessage>(parse_server_message(out[i].dump()));
    CHECK(st.t == log.steps[i].t);
    check_close(st.rewards, scored[i].rewards, 1e-6);
    CHECK(st.joints == log.steps[i].joints);
  }
  const auto summary = std::get<SummaryMessage>(parse_server_message(out.back().dump()));
  CHECK(summary.session_id == "novice-4");
  CHECK(summary.final_score == log.final_score);
  CHECK(summary.totals == log.total_infractions());

  CHECK(s.handle(msg(ReplayMessage{"missing"}))[0]["code"] == "NOT_FOUND");
  CHECK(s.handle(msg(ReplayMessage{"../novice-4"}))[0]["code"] == "NOT_FOUND");
}

// Scripted socket client.
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct RunningServer {
  FeedbackServer server;
  std::thread thread;
  RunningServer(ServiceContext c, double tick_hz) : server(std::move(c), ServerOptions{"127.0.0.1", 0, tick_hz}) {
    thread = std::thread([this] { server.run(); });
  }
  ~RunningServer() {
    server.stop();
    thread.join();
  }
};

struct Client {
  asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};
  beast::flat_buffer buffer;

  Client(unsigned short port, const std::string& target = "/session") {
    ws.next_layer().connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), port));
    ws.handshake("127.0.0.1", target);
  }
  void send(const std::string& text) { ws.write(asio::buffer(text)); }
  Json receive() {
    buffer.consume(buffer.size());
    ws.read(buffer);
    return Json::parse(beast::buffers_to_string(buffer.data()));
  }
};

}  // namespace

TEST_CASE("server rejects other paths and busy ports") {
  RunningServer rs(make_context("paths"), 100);
  CHECK_THROWS(Client(rs.server.port(), "/other"));
  try {
    FeedbackServer second(make_context("paths2"), ServerOptions{"127.0.0.1", rs.server.port(), 10});
    FAIL("second bind succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BindFailure);
  }
  try {
    FeedbackServer bad(make_context("paths3"), ServerOptions{"not-an-address", 0, 10});
    FAIL("bad address accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BindFailure);
  }
}

TEST_CASE("scripted client: live session over the socket") {
  const auto c = make_context("socket");
  const auto record_dir = c.record_dir;
  RunningServer rs(c, 400);
  Client client(rs.server.port());
  client.send("garbage");
  CHECK(client.receive()["code"] == "MALFORMED_MESSAGE");
  client.send(msg(ControlMessage{JointVector(1.7, 0, 0, 0)}));
  CHECK(client.receive()["code"] == "OUT_OF_RANGE");
  client.send(msg(ResetMessage{2}));
  client.send(msg(ControlMessage{JointVector(0.3, 0.2, -0.1, 0.0)}));

  std::vector<Json> states;
  Json summary;
  while (true) {
    Json m = client.receive();
    if (type_of(m) == "summary") {
      summary = m;
      break;
    }
    REQUIRE(type_of(m) == "state");
    states.push_back(m);
  }
  REQUIRE(states.size() == 281);
  for (std::size_t i = 0; i < states.size(); ++i) CHECK(states[i]["t"] == static_cast<int>(i));
  const auto file = record_dir / (summary["session_id"].get<std::string>() + ".jsonl");
  REQUIRE(fs::exists(file));
  const auto scored = offline(c, file);
  REQUIRE(scored.size() == states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto st = std::get<StateMessage>(parse_server_message(states[i].dump()));
    check_close(st.rewards, scored[i].rewards, 1e-6);
  }
}

TEST_CASE("scripted client: replay over the socket") {
  auto c = make_context("socket_replay");
  auto log = dataset::run_scripted_controller(dataset::ControllerKind::expert, c.scenarios.at("reference"), 1);
  log.session_id = "expert-1";
  const auto file = c.sessions_dir / "expert-1.jsonl";
  dataset::write_session(file, log);
  const auto scored = offline(c, file);

  RunningServer rs(c, 400);
  Client client(rs.server.port());
  client.send(msg(ReplayMessage{"expert-1"}));
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto st = std::get<StateMessage>(parse_server_message(client.receive().dump()));
    CHECK(st.t == log.steps[i].t);
    check_close(st.rewards, scored[i].rewards, 1e-6);
  }
  CHECK(type_of(client.receive()) == "summary");
}

TEST_CASE("stream sustains the 10 Hz tick for a full session") {
  RunningServer rs(make_context("rate"), 10.0);
  Client client(rs.server.port());
  client.send(msg(ResetMessage{0}));
  using Clock = std::chrono::steady_clock;
  std::vector<Clock::time_point> arrivals;
  int last_t = -1;
  while (true) {
    Json m = client.receive();
    if (type_of(m) == "summary") break;
    arrivals.push_back(Clock::now());
    CHECK(m["t"] == last_t + 1);
    last_t = m["t"];
  }
  REQUIRE(arrivals.size() == 281);
  // Ticked states only; state 0 is sent on reset, off the tick grid.
  const double span = std::chrono::duration<double>(arrivals.back() - arrivals[1]).count();
  const double rate = (arrivals.size() - 2) / span;
  MESSAGE("measured rate " << rate << " Hz");
  // 1% allowance for scheduling jitter on the last arrival.
  CHECK(rate >= 10.0 * 0.99);
  double max_gap = 0;
  for (std::size_t i = 2; i < arrivals.size(); ++i)
    max_gap = std::max(max_gap, std::chrono::duration<double>(arrivals[i] - arrivals[i - 1]).count());
  CHECK(max_gap < 0.2);
}
