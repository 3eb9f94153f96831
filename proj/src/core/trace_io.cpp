#include "trace_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace craft {

namespace {

void put(std::string& s, double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v == 0.0 ? 0.0 : v);
  s += buf;
}

void put_state(std::string& s, const physics::BodyState& b, int digits) {
  s += '[';
  s += std::to_string(b.id);
  for (double v : {b.position.x, b.position.y, b.angle, b.linear_velocity.x, b.linear_velocity.y,
                   b.angular_velocity}) {
    s += ',';
    put(s, v, digits);
  }
  s += ']';
}

void put_states(std::string& s, const std::vector<physics::BodyState>& states, int digits) {
  s += '[';
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) s += ',';
    put_state(s, states[i], digits);
  }
  s += ']';
}

physics::BodyState state_from_json(const nlohmann::json& j) {
  physics::BodyState b;
  b.id = j.at(0).get<int>();
  b.position = {j.at(1).get<double>(), j.at(2).get<double>()};
  b.angle = j.at(3).get<double>();
  b.linear_velocity = {j.at(4).get<double>(), j.at(5).get<double>()};
  b.angular_velocity = j.at(6).get<double>();
  return b;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const physics::SimulationTrace& trace) {
  constexpr int kExact = 17;
  constexpr int kTick = 9;
  std::string line = "{\"type\":\"header\",\"scene_id\":";
  line += nlohmann::json(trace.scene_id).dump();
  line += ",\"dt\":";
  put(line, trace.dt, kExact);
  line += ",\"tick_count\":" + std::to_string(trace.tick_count);
  line += ",\"engine_version\":" + nlohmann::json(trace.engine_version).dump();
  line += ",\"removed_object_id\":";
  line += trace.removed_object_id ? std::to_string(*trace.removed_object_id) : "null";
  line += ",\"initial_state\":";
  put_states(line, trace.initial_state(), kExact);
  line += ",\"final_state\":";
  put_states(line, trace.final_state(), kExact);
  line += "}\n";
  out << line;

  for (int t = 0; t < trace.tick_count; ++t) {
    line = "{\"tick\":" + std::to_string(t) + ",\"states\":";
    put_states(line, trace.states[t], kTick);
    line += ",\"contacts\":[";
    const auto& contacts = trace.contacts[t];
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      const auto& c = contacts[i];
      if (i) line += ',';
      line += '[' + std::to_string(c.a) + ',' + std::to_string(c.b);
      for (double v : {c.normal.x, c.normal.y, c.normal_speed, c.normal_impulse}) {
        line += ',';
        put(line, v, kTick);
      }
      line += ']';
    }
    line += "]}\n";
    out << line;
  }
}

std::string trace_to_jsonl(const physics::SimulationTrace& trace) {
  std::ostringstream out;
  write_trace_jsonl(out, trace);
  return out.str();
}

physics::SimulationTrace read_trace_jsonl(std::istream& in) {
  physics::SimulationTrace trace;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::parse, "trace file is empty");
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("type", "") != "header") fail(ErrorKind::parse, "trace header missing");
    trace.scene_id = header.at("scene_id").get<std::string>();
    trace.dt = header.at("dt").get<double>();
    trace.tick_count = header.at("tick_count").get<int>();
    trace.engine_version = header.at("engine_version").get<std::string>();
    if (!header.at("removed_object_id").is_null()) {
      trace.removed_object_id = header["removed_object_id"].get<int>();
    }
    std::vector<physics::BodyState> initial;
    std::vector<physics::BodyState> final_state;
    for (const auto& s : header.at("initial_state")) initial.push_back(state_from_json(s));
    for (const auto& s : header.at("final_state")) final_state.push_back(state_from_json(s));

    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      if (rec.at("tick").get<int>() != static_cast<int>(trace.states.size())) {
        fail(ErrorKind::parse, "trace ticks out of order");
      }
      std::vector<physics::BodyState> states;
      for (const auto& s : rec.at("states")) states.push_back(state_from_json(s));
      std::vector<physics::ContactRecord> contacts;
      for (const auto& c : rec.at("contacts")) {
        physics::ContactRecord r;
        r.a = c.at(0).get<int>();
        r.b = c.at(1).get<int>();
        r.normal = {c.at(2).get<double>(), c.at(3).get<double>()};
        r.normal_speed = c.at(4).get<double>();
        r.normal_impulse = c.at(5).get<double>();
        contacts.push_back(r);
      }
      trace.states.push_back(std::move(states));
      trace.contacts.push_back(std::move(contacts));
    }
    if (static_cast<int>(trace.states.size()) != trace.tick_count) {
      fail(ErrorKind::parse, "trace has " + std::to_string(trace.states.size()) +
                                 " ticks, header says " + std::to_string(trace.tick_count));
    }
    if (trace.tick_count > 0) {
      trace.states.front() = std::move(initial);
      trace.states.back() = std::move(final_state);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed trace: ") + e.what());
  }
  return trace;
}

}  // namespace craft
