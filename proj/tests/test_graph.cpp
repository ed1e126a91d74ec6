#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pirpath/graph.hpp"

using namespace pirpath;

TEST_CASE("parse: T16 fixture has 16 nodes, 24 undirected edges") {
    RoadNetwork net = fixtures::t16();
    CHECK(net.node_count() == 16);
    CHECK(net.edge_count() == 24);
    CHECK_FALSE(net.directed);
    // symmetric adjacency with equal weights both ways
    for (uint32_t u = 0; u < net.node_count(); ++u)
        for (const auto& a : net.adjacency[u]) {
            bool found = false;
            for (const auto& b : net.adjacency[a.target])
                if (b.target == u && b.weight == a.weight) found = true;
            CHECK(found);
        }
}

TEST_CASE("parse: single node, empty edge list") {
    std::istringstream ci("v 7 0.5 0.5\n");
    std::istringstream ei("p undirected 1 0\n");
    RoadNetwork net = parse_network(ci, ei);
    CHECK(net.node_count() == 1);
    CHECK(net.edge_count() == 0);
}

TEST_CASE("parse: rejects malformed lines and dangling endpoints") {
    {
        std::istringstream ci("v 0 zero 0\n");
        std::istringstream ei("p undirected 1 0\n");
        CHECK_THROWS_AS(parse_network(ci, ei), ParseError);
    }
    {
        std::istringstream ci("v 0 0 0\n");
        std::istringstream ei("p undirected 1 1\ne 0 3 1.0\n");
        CHECK_THROWS_AS(parse_network(ci, ei), ValidationError);
    }
    {
        std::istringstream ci("v 0 0 0\nv 1 1 0\n");
        std::istringstream ei("p undirected 2 1\ne 0 1 -2.0\n");
        CHECK_THROWS_AS(parse_network(ci, ei), ValidationError);
    }
    {
        std::istringstream ci("v 0 0 0\nv 1 1 0\n");
        std::istringstream ei("p undirected 3 1\ne 0 1 1.0\n");
        CHECK_THROWS_AS(parse_network(ci, ei), ValidationError);
    }
}

TEST_CASE("parse: comments and blank lines ignored") {
    std::istringstream ci("# header\nv 0 0 0\n\nv 1 1 0\n");
    std::istringstream ei("p undirected 2 1\n# note\ne 0 1 2.5\n");
    RoadNetwork net = parse_network(ci, ei);
    CHECK(net.node_count() == 2);
    CHECK(net.edges[0].weight == 2.5);
}

TEST_CASE("dijkstra: T16 corner to corner costs 6") {
    RoadNetwork net = fixtures::t16();
    auto oracle = fixtures::all_pairs_oracle(net);
    uint32_t s = *net.index_of(0), t = *net.index_of(15);
    CHECK(oracle[s][t] == 6.0);
    auto p = dijkstra(net, s, t);
    REQUIRE(p.has_value());
    CHECK(p->total_cost == 6.0);
    CHECK(p->edge_sequence.size() == 6);
    // path cost equals sum of member edge weights
    double sum = 0;
    for (EdgeId e : p->edge_sequence) sum += net.edges[e].weight;
    CHECK(sum == p->total_cost);
}

TEST_CASE("dijkstra: s == t gives empty path of cost 0") {
    RoadNetwork net = fixtures::t16();
    auto p = dijkstra(net, 3, 3);
    REQUIRE(p.has_value());
    CHECK(p->total_cost == 0.0);
    CHECK(p->edge_sequence.empty());
}

TEST_CASE("dijkstra: two-node single edge") {
    RoadNetwork net = fixtures::make_network({{0, {0, 0}}, {1, {1, 0}}}, {{0, 1, 5.0}}, false);
    auto p = dijkstra(net, 0, 1);
    REQUIRE(p.has_value());
    CHECK(p->total_cost == 5.0);
    CHECK(p->edge_sequence.size() == 1);
}

TEST_CASE("dijkstra: unreachable target reported, not thrown") {
    RoadNetwork net = fixtures::make_network({{0, {0, 0}}, {1, {1, 0}}}, {}, false);
    CHECK_FALSE(dijkstra(net, 0, 1).has_value());
}

TEST_CASE("dijkstra_restricted: full set equals unrestricted, row restriction works") {
    RoadNetwork net = fixtures::t16();
    std::vector<char> all(net.node_count(), 1);
    for (uint32_t s = 0; s < net.node_count(); ++s)
        for (uint32_t t = 0; t < net.node_count(); ++t) {
            auto a = dijkstra(net, s, t);
            auto b = dijkstra_restricted(net, all, s, t);
            REQUIRE(a.has_value() == b.has_value());
            if (a) {
                CHECK(a->total_cost == b->total_cost);
                CHECK(a->edge_sequence == b->edge_sequence);  // tie rule makes this exact
            }
        }

    // bottom row only: ids 0..3
    std::vector<char> row(net.node_count(), 0);
    for (NodeId id = 0; id < 4; ++id) row[*net.index_of(id)] = 1;
    auto p = dijkstra_restricted(net, row, *net.index_of(0), *net.index_of(3));
    REQUIRE(p.has_value());
    CHECK(p->total_cost == 3.0);  // along the row

    // excluding every s-t cut -> unreachable
    std::vector<char> cut(net.node_count(), 1);
    for (NodeId id = 4; id < 8; ++id) cut[*net.index_of(id)] = 0;  // remove second row
    CHECK_FALSE(dijkstra_restricted(net, cut, *net.index_of(0), *net.index_of(15)).has_value());
}

TEST_CASE("dijkstra matches Floyd-Warshall oracle on random graphs") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + int(rng() % 12);
        std::vector<std::pair<NodeId, Coord>> nodes;
        for (int i = 0; i < n; ++i)
            nodes.push_back({NodeId(i), {double(rng() % 100), double(rng() % 100)}});
        std::vector<fixtures::EdgeSpec> edges;
        std::uniform_real_distribution<double> wd(0.1, 10.0);
        bool directed = trial % 2 == 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && rng() % 3 == 0 && (directed || i < j))
                    edges.push_back({NodeId(i), NodeId(j), wd(rng)});
        RoadNetwork net = fixtures::make_network(nodes, edges, directed);
        auto oracle = fixtures::all_pairs_oracle(net);
        for (uint32_t s = 0; s < net.node_count(); ++s) {
            auto tree = dijkstra_tree(net, s);
            for (uint32_t t = 0; t < net.node_count(); ++t) {
                if (oracle[s][t] >= kInfiniteCost)
                    CHECK(tree.dist[t] >= kInfiniteCost);
                else
                    CHECK(fixtures::close(tree.dist[t], oracle[s][t]));
            }
        }
    }
}

TEST_CASE("directed: dijkstra(net,s,t) == dijkstra(reverse(net),t,s)") {
    std::mt19937 rng(7);
    std::vector<std::pair<NodeId, Coord>> nodes;
    for (int i = 0; i < 15; ++i)
        nodes.push_back({NodeId(i), {double(rng() % 50), double(rng() % 50)}});
    std::vector<fixtures::EdgeSpec> edges;
    std::uniform_real_distribution<double> wd(0.5, 4.0);
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            if (i != j && rng() % 4 == 0) edges.push_back({NodeId(i), NodeId(j), wd(rng)});
    RoadNetwork net = fixtures::make_network(nodes, edges, true);
    RoadNetwork rev = reverse(net);
    for (uint32_t s = 0; s < net.node_count(); ++s)
        for (uint32_t t = 0; t < net.node_count(); ++t) {
            auto a = dijkstra(net, s, t);
            auto b = dijkstra(rev, t, s);
            REQUIRE(a.has_value() == b.has_value());
            if (a) CHECK(fixtures::close(a->total_cost, b->total_cost));
        }
}
