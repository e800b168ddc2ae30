#include "doctest.h"

#include <random>
#include <sstream>

#include "pprtrack/event_stream.hpp"
#include "pprtrack/graph.hpp"

using namespace pprtrack;

namespace {

EdgeEvent ev(NodeId s, NodeId d, double w, Snapshot t = 1) {
    return EdgeEvent{s, d, w, t};
}

// Independent degree recomputation from stored out-edges.
double recompute_degree(const DynamicGraph& g, NodeId u) {
    double sum = 0.0;
    for (const auto& [v, w] : g.out_edges(u)) sum += w;
    return sum;
}

} // namespace

TEST_CASE("apply_event inserts, accumulates degree, creates endpoints") {
    DynamicGraph g;
    g.apply_event(ev(0, 1, 2.0));
    g.apply_event(ev(0, 2, 0.5));
    CHECK(g.degree(0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(g.weight(0, 2) == doctest::Approx(0.5));
    CHECK(g.degree(2) == 0.0);
    CHECK(g.node_count() == 3);
}

TEST_CASE("apply_event exact cancellation removes the edge") {
    DynamicGraph g;
    g.apply_event(ev(0, 1, 2.0));
    g.apply_event(ev(0, 1, -2.0));
    CHECK(g.weight(0, 1) == 0.0);
    CHECK(g.out_edges(0).empty());
    CHECK(g.degree(0) == 0.0);
}

TEST_CASE("apply_event rejects overdraining deletions") {
    DynamicGraph g;
    g.apply_event(ev(0, 1, 2.0));
    CHECK_THROWS_AS(g.apply_event(ev(0, 1, -3.0)), NegativeWeightError);
    // Strong guarantee: nothing changed.
    CHECK(g.weight(0, 1) == doctest::Approx(2.0));
    CHECK(g.degree(0) == doctest::Approx(2.0));
}

TEST_CASE("neighbors lists positive out-edges only") {
    DynamicGraph g;
    g.apply_event(ev(0, 1, 1.0));
    g.apply_event(ev(0, 2, 1.0));
    CHECK(g.neighbors(0) ==
          std::vector<std::pair<NodeId, double>>{{1, 1.0}, {2, 1.0}});
    CHECK(g.neighbors(42).empty());
    g.apply_event(ev(0, 1, -1.0));
    CHECK(g.neighbors(0) == std::vector<std::pair<NodeId, double>>{{2, 1.0}});
}

TEST_CASE("mirror_stream interleaves reversed events") {
    std::vector<EdgeEvent> in{ev(0, 1, 1.0, 1)};
    auto out = mirror_stream(in);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == ev(0, 1, 1.0, 1));
    CHECK(out[1] == ev(1, 0, 1.0, 1));

    CHECK(mirror_stream(std::vector<EdgeEvent>{}).empty());

    std::vector<EdgeEvent> two{ev(0, 1, 1.0, 1), ev(2, 3, 2.0, 1)};
    auto mirrored = mirror_stream(two);
    REQUIRE(mirrored.size() == 4);
    CHECK(mirrored[1] == ev(1, 0, 1.0, 1));
    CHECK(mirrored[2] == ev(2, 3, 2.0, 1));
    CHECK(mirrored[3] == ev(3, 2, 2.0, 1));
}

TEST_CASE("multigraph semantics: repeated unit inserts accumulate weight") {
    DynamicGraph g;
    for (int i = 0; i < 7; ++i) g.apply_event(ev(0, 1, 1.0));
    CHECK(g.weight(0, 1) == doctest::Approx(7.0));
    CHECK(g.degree(0) == doctest::Approx(7.0));
}

TEST_CASE("degree consistency and replay determinism under random streams") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 12;
        std::vector<EdgeEvent> events;
        DynamicGraph g;
        for (int i = 0; i < 300; ++i) {
            NodeId u = rng() % n, v = rng() % n;
            double w = 0.25 * (1 + rng() % 8);
            if (rng() % 4 == 0) {
                // deletions only up to the current weight
                double cur = g.weight(u, v);
                if (cur <= 0.0) continue;
                w = -std::min(cur, w);
            }
            EdgeEvent e = ev(u, v, w);
            g.apply_event(e);
            events.push_back(e);
        }
        for (NodeId u = 0; u < g.node_count(); ++u) {
            CHECK(g.degree(u) == doctest::Approx(recompute_degree(g, u)).epsilon(1e-9));
        }
        // replay from scratch matches
        DynamicGraph h;
        for (const auto& e : events) h.apply_event(e);
        for (NodeId u = 0; u < g.node_count(); ++u) {
            CHECK(h.degree(u) == g.degree(u));
            CHECK(h.out_edges(u).size() == g.out_edges(u).size());
            for (const auto& [v, w] : g.out_edges(u)) {
                CHECK(h.weight(u, v) == w);
            }
        }
    }
}

TEST_CASE("in-edges mirror out-edges") {
    DynamicGraph g;
    g.apply_event(ev(0, 1, 2.0));
    g.apply_event(ev(2, 1, 0.5));
    CHECK(g.in_edges(1).size() == 2);
    CHECK(g.in_edges(1).at(0) == doctest::Approx(2.0));
    g.apply_event(ev(0, 1, -2.0));
    CHECK(g.in_edges(1).size() == 1);
}

TEST_CASE("node table interning is append-only and stable") {
    NodeTable t;
    CHECK(t.intern("alice") == 0);
    CHECK(t.intern("bob") == 1);
    CHECK(t.intern("alice") == 0);
    CHECK(t.name(1) == "bob");
    CHECK(t.find("carol") == std::nullopt);
    CHECK(t.size() == 2);
}

TEST_CASE("event stream parsing") {
    SUBCASE("well-formed with comments and CRLF") {
        std::istringstream in(
            "# header comment\n"
            "0\ta\tb\t1.5\r\n"
            "0\tb\tc\t2\n"
            "\n"
            "1\ta\tc\t-0.5\n"
            "3\tc\ta\t1\n");
        auto s = read_event_stream(in);
        REQUIRE(s.events.size() == 4);
        CHECK(s.max_snapshot == 3);
        CHECK(s.nodes.size() == 3);
        CHECK(s.events[0].delta_w == doctest::Approx(1.5));
        CHECK(s.events[2].snapshot == 1);
    }
    SUBCASE("decreasing snapshot ids rejected with line number") {
        std::istringstream in("1\ta\tb\t1\n0\tb\ta\t1\n");
        CHECK_THROWS_WITH_AS(read_event_stream(in),
                             doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("zero delta rejected") {
        std::istringstream in("0\ta\tb\t0\n");
        CHECK_THROWS_AS(read_event_stream(in), ParseError);
    }
    SUBCASE("wrong field count rejected") {
        std::istringstream in("0\ta\tb\n");
        CHECK_THROWS_AS(read_event_stream(in), ParseError);
    }
    SUBCASE("negative snapshot rejected") {
        std::istringstream in("-1\ta\tb\t1\n");
        CHECK_THROWS_AS(read_event_stream(in), ParseError);
    }
}

TEST_CASE("event stream write/read round trip") {
    std::istringstream in("0\ta\tb\t1.25\n1\tb\tc\t-0.25\n");
    auto s = read_event_stream(in);
    std::ostringstream out;
    write_event_stream(out, s.events, s.nodes);
    std::istringstream back(out.str());
    auto s2 = read_event_stream(back);
    REQUIRE(s2.events.size() == s.events.size());
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        CHECK(s2.events[i].delta_w == s.events[i].delta_w);
        CHECK(s2.events[i].snapshot == s.events[i].snapshot);
        CHECK(s2.nodes.name(s2.events[i].src) == s.nodes.name(s.events[i].src));
    }
}

TEST_CASE("snapshot batching covers gaps with empty batches") {
    std::istringstream in("0\ta\tb\t1\n1\tb\tc\t1\n3\tc\ta\t1\n");
    auto s = read_event_stream(in);
    CHECK(initial_build(s.events).size() == 1);
    auto batches = snapshot_batches(s.events, s.max_snapshot);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].size() == 1);
    CHECK(batches[1].empty());
    CHECK(batches[2].size() == 1);
}

TEST_CASE("node list file parsing") {
    std::istringstream in("# tracked\nalice\nbob\r\n\ncarol\n");
    auto names = read_node_list(in);
    CHECK(names == std::vector<std::string>{"alice", "bob", "carol"});
}
