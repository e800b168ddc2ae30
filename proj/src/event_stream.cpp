#include "pprtrack/event_stream.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pprtrack {
namespace {

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

bool skippable(std::string_view line) {
    return line.empty() || line.front() == '#';
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

double parse_double(std::string_view s, std::size_t line_no, const char* what) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line_no, std::string("bad ") + what + " '" + std::string(s) + "'");
    }
    return value;
}

Snapshot parse_snapshot(std::string_view s, std::size_t line_no) {
    Snapshot value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line_no, "bad snapshot id '" + std::string(s) + "'");
    }
    return value;
}

} // namespace

ParsedStream read_event_stream(std::istream& in) {
    ParsedStream stream;
    std::string raw;
    std::size_t line_no = 0;
    Snapshot prev = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (skippable(line)) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw ParseError(line_no, "expected 4 tab-separated fields, got " +
                                          std::to_string(fields.size()));
        }
        Snapshot snap = parse_snapshot(fields[0], line_no);
        if (snap < 0) {
            throw ParseError(line_no, "snapshot id must be >= 0");
        }
        if (snap < prev) {
            throw ParseError(line_no, "snapshot ids must be non-decreasing (" +
                                          std::to_string(snap) + " after " +
                                          std::to_string(prev) + ")");
        }
        if (fields[1].empty() || fields[2].empty()) {
            throw ParseError(line_no, "empty node id");
        }
        double delta = parse_double(fields[3], line_no, "delta_weight");
        if (delta == 0.0) {
            throw ParseError(line_no, "delta_weight must be nonzero");
        }
        prev = snap;
        EdgeEvent e;
        e.src = stream.nodes.intern(fields[1]);
        e.dst = stream.nodes.intern(fields[2]);
        e.delta_w = delta;
        e.snapshot = snap;
        stream.events.push_back(e);
        stream.max_snapshot = std::max(stream.max_snapshot, snap);
    }
    return stream;
}

ParsedStream read_event_stream_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open event stream '" + path + "'");
    }
    return read_event_stream(in);
}

void write_event_stream(std::ostream& out, std::span<const EdgeEvent> events,
                        const NodeTable& nodes) {
    out << "# snapshot\tsrc\tdst\tdelta_weight\n";
    std::ostringstream fmt;
    fmt.precision(17);
    for (const EdgeEvent& e : events) {
        fmt.str("");
        fmt << e.delta_w;
        out << e.snapshot << '\t' << nodes.name(e.src) << '\t' << nodes.name(e.dst)
            << '\t' << fmt.str() << '\n';
    }
}

std::vector<std::string> read_node_list(std::istream& in) {
    std::vector<std::string> out;
    std::string raw;
    while (std::getline(in, raw)) {
        std::string_view line = strip_cr(raw);
        if (skippable(line)) continue;
        out.emplace_back(line);
    }
    return out;
}

std::vector<std::string> read_node_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open node list '" + path + "'");
    }
    return read_node_list(in);
}

std::span<const EdgeEvent> initial_build(std::span<const EdgeEvent> events) {
    std::size_t n = 0;
    while (n < events.size() && events[n].snapshot == 0) ++n;
    return events.subspan(0, n);
}

std::vector<std::span<const EdgeEvent>> snapshot_batches(
    std::span<const EdgeEvent> events, Snapshot max_snapshot) {
    std::vector<std::span<const EdgeEvent>> batches;
    if (max_snapshot <= 0) return batches;
    batches.resize(static_cast<std::size_t>(max_snapshot));
    std::size_t i = initial_build(events).size();
    for (Snapshot t = 1; t <= max_snapshot; ++t) {
        std::size_t start = i;
        while (i < events.size() && events[i].snapshot == t) ++i;
        batches[static_cast<std::size_t>(t - 1)] = events.subspan(start, i - start);
    }
    return batches;
}

} // namespace pprtrack
