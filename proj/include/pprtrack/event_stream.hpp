#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pprtrack/graph.hpp"
#include "pprtrack/types.hpp"

namespace pprtrack {

// A fully parsed event stream: interned ids plus the event list in stream
// order. max_snapshot is 0 for a stream with only initial-build events.
struct ParsedStream {
    NodeTable nodes;
    std::vector<EdgeEvent> events;
    Snapshot max_snapshot = 0;
};

// Reads the tab-separated event format:
//   snapshot_id<TAB>src<TAB>dst<TAB>delta_weight
// Lines starting with '#' and blank lines are skipped. Enforces
// non-decreasing snapshot ids >= 0 and delta_weight != 0; throws ParseError
// with the offending line number.
ParsedStream read_event_stream(std::istream& in);
ParsedStream read_event_stream_file(const std::string& path);

void write_event_stream(std::ostream& out, std::span<const EdgeEvent> events,
                        const NodeTable& nodes);

// Tracked-nodes file: one id per line, '#' comments.
std::vector<std::string> read_node_list(std::istream& in);
std::vector<std::string> read_node_list_file(const std::string& path);

// Events with snapshot == 0 (the initial build), as a prefix span.
std::span<const EdgeEvent> initial_build(std::span<const EdgeEvent> events);

// Per-snapshot batches for snapshots 1..max_snapshot; snapshots absent from
// the stream yield empty batches.
std::vector<std::span<const EdgeEvent>> snapshot_batches(
    std::span<const EdgeEvent> events, Snapshot max_snapshot);

} // namespace pprtrack
