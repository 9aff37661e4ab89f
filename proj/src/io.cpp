#include "restore/io.hpp"

#include <cstdio>
#include <fstream>

namespace restore::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

char event_code(EventKind k) {
    switch (k) {
        case EventKind::Initial: return 'I';
        case EventKind::LocalMove: return 'L';
        case EventKind::Regeneration: return 'R';
        case EventKind::FinalState: return 'F';
    }
    return '?';
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RestoreError("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_events_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "t,kind";
    for (int a = 0; a < traj.dim; ++a) out << ",x" << a;
    out << "\n";
    for (const Event& e : traj.events) {
        out << format_double(e.t) << ',' << event_code(e.kind);
        for (int a = 0; a < traj.dim; ++a) out << ',' << format_double(e.x[static_cast<std::size_t>(a)]);
        out << "\n";
    }
    if (!out) throw RestoreError("write failed: " + path);
}

void write_draws_csv(const std::string& path, const std::vector<Vec>& draws) {
    std::ofstream out = open_out(path);
    const std::size_t dim = draws.empty() ? 1 : draws.front().size();
    for (std::size_t a = 0; a < dim; ++a) out << (a ? "," : "") << 'x' << a;
    out << "\n";
    for (const Vec& x : draws) {
        for (std::size_t a = 0; a < dim; ++a) out << (a ? "," : "") << format_double(x[a]);
        out << "\n";
    }
    if (!out) throw RestoreError("write failed: " + path);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
    if (!out) throw RestoreError("write failed: " + path);
}

}  // namespace restore::io
