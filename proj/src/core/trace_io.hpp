#pragma once

#include <iosfwd>
#include <string>

#include "physics.hpp"

namespace craft {

// JSON-lines: one header record, then one record per tick.
//   {"type":"header","scene_id":..,"dt":..,"tick_count":..,"engine_version":..,
//    "removed_object_id":null|id,"initial_state":[..],"final_state":[..]}
//   {"tick":k,"states":[[id,x,y,angle,vx,vy,w],..],"contacts":[[a,b,nx,ny,speed,impulse],..]}
// Header snapshots are written at round-trip precision; tick records at 9 digits.
void write_trace_jsonl(std::ostream& out, const physics::SimulationTrace& trace);
std::string trace_to_jsonl(const physics::SimulationTrace& trace);
physics::SimulationTrace read_trace_jsonl(std::istream& in);

}  // namespace craft
