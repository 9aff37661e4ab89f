#pragma once

#include <string>
#include <vector>

#include "restore/sampler.hpp"

namespace restore::io {

inline constexpr const char* kVersion = "restore-0.1.0";

// Shortest exact decimal round-trip is not needed; %.17g guarantees the bits.
std::string format_double(double v);

char event_code(EventKind k);  // I, L, R, F

// Event log: header `t,kind,x0,...,x{d-1}`, one row per event.
void write_events_csv(const std::string& path, const Trajectory& traj);

// Draw table: header `x0,...,x{d-1}`, one row per draw.
void write_draws_csv(const std::string& path, const std::vector<Vec>& draws);

void write_text(const std::string& path, const std::string& content);

}  // namespace restore::io
