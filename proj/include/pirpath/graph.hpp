#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pirpath {

using NodeId = uint32_t;
using EdgeId = uint32_t;

struct Coord {
    double x = 0.0;
    double y = 0.0;
};

class ParseError : public std::exception {
public:
    ParseError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

class ValidationError : public std::exception {
public:
    ValidationError(std::string msg) : msg_(std::move(msg)) {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

/// Directed or undirected road network. Nodes are stored densely, sorted by
/// their external id; adjacency targets are dense indices. Undirected edges
/// appear once in the edge table and twice in adjacency (same EdgeId).
struct RoadNetwork {
    struct Arc {
        uint32_t target;  // dense index
        double weight;
        EdgeId edge;
    };
    struct Edge {
        uint32_t from;  // dense index
        uint32_t to;
        double weight;
    };

    bool directed = false;
    std::vector<NodeId> node_ids;  // ascending
    std::vector<Coord> coords;
    std::vector<std::vector<Arc>> adjacency;
    std::vector<Edge> edges;

    size_t node_count() const { return node_ids.size(); }
    size_t edge_count() const { return edges.size(); }

    std::optional<uint32_t> index_of(NodeId id) const;
    NodeId id_of(uint32_t index) const { return node_ids[index]; }
};

struct Path {
    std::vector<EdgeId> edge_sequence;
    std::vector<uint32_t> node_sequence;  // dense indices, size = edges + 1
    double total_cost = 0.0;
};

/// Parses the two text inputs: a coordinates file with `v <id> <x> <y>` lines
/// and an edge file with a `p <directed|undirected> <nodes> <edges>` header
/// followed by `e <from> <to> <weight>` lines. `#` lines are comments.
RoadNetwork parse_network(std::istream& coord_text, std::istream& edge_text);
RoadNetwork parse_network_files(const std::string& coord_path, const std::string& edge_path);

/// Single-source shortest path tree. Frontier ties are broken by smaller
/// node index, which (ids being sorted) means smaller node id; this makes
/// every extracted path deterministic.
struct ShortestPathTree {
    std::vector<double> dist;          // infinity if unreachable
    std::vector<int64_t> pred_node;    // -1 at source / unreachable
    std::vector<EdgeId> pred_edge;
};

constexpr double kInfiniteCost = 1e300;

ShortestPathTree dijkstra_tree(const RoadNetwork& net, uint32_t source,
                               const std::vector<char>* allowed = nullptr);

std::optional<Path> dijkstra(const RoadNetwork& net, uint32_t source, uint32_t target);

/// Shortest path restricted to the induced subgraph on `allowed` nodes.
std::optional<Path> dijkstra_restricted(const RoadNetwork& net, const std::vector<char>& allowed,
                                        uint32_t source, uint32_t target);

std::optional<Path> extract_path(const RoadNetwork& net, const ShortestPathTree& tree,
                                 uint32_t source, uint32_t target);

RoadNetwork reverse(const RoadNetwork& net);

}  // namespace pirpath
