#include "pirpath/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace pirpath {

std::optional<uint32_t> RoadNetwork::index_of(NodeId id) const {
    auto it = std::lower_bound(node_ids.begin(), node_ids.end(), id);
    if (it == node_ids.end() || *it != id) return std::nullopt;
    return static_cast<uint32_t>(it - node_ids.begin());
}

namespace {

bool is_blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

RoadNetwork parse_network(std::istream& coord_text, std::istream& edge_text) {
    struct RawNode {
        NodeId id;
        Coord c;
    };
    std::vector<RawNode> raw_nodes;
    std::string line;
    size_t lineno = 0;
    while (std::getline(coord_text, line)) {
        ++lineno;
        if (is_blank_or_comment(line)) continue;
        std::istringstream ss(line);
        char tag;
        RawNode n;
        if (!(ss >> tag >> n.id >> n.c.x >> n.c.y) || tag != 'v')
            throw ParseError("coordinate file: malformed line " + std::to_string(lineno));
        raw_nodes.push_back(n);
    }

    std::sort(raw_nodes.begin(), raw_nodes.end(),
              [](const RawNode& a, const RawNode& b) { return a.id < b.id; });
    for (size_t i = 1; i < raw_nodes.size(); ++i)
        if (raw_nodes[i].id == raw_nodes[i - 1].id)
            throw ValidationError("duplicate node id " + std::to_string(raw_nodes[i].id));

    RoadNetwork net;
    net.node_ids.reserve(raw_nodes.size());
    net.coords.reserve(raw_nodes.size());
    for (const RawNode& n : raw_nodes) {
        net.node_ids.push_back(n.id);
        net.coords.push_back(n.c);
    }
    net.adjacency.assign(net.node_ids.size(), {});

    bool saw_header = false;
    size_t declared_nodes = 0, declared_edges = 0;
    lineno = 0;
    while (std::getline(edge_text, line)) {
        ++lineno;
        if (is_blank_or_comment(line)) continue;
        std::istringstream ss(line);
        char tag;
        ss >> tag;
        if (tag == 'p') {
            std::string mode;
            if (!(ss >> mode >> declared_nodes >> declared_edges) ||
                (mode != "directed" && mode != "undirected"))
                throw ParseError("edge file: malformed header at line " + std::to_string(lineno));
            net.directed = (mode == "directed");
            saw_header = true;
        } else if (tag == 'e') {
            if (!saw_header)
                throw ParseError("edge file: edge before header at line " + std::to_string(lineno));
            NodeId from_id, to_id;
            double w;
            if (!(ss >> from_id >> to_id >> w))
                throw ParseError("edge file: malformed line " + std::to_string(lineno));
            if (!(w > 0.0))
                throw ValidationError("edge file line " + std::to_string(lineno) +
                                      ": non-positive weight");
            auto fi = net.index_of(from_id);
            auto ti = net.index_of(to_id);
            if (!fi || !ti)
                throw ValidationError("edge file line " + std::to_string(lineno) +
                                      ": dangling endpoint");
            EdgeId eid = static_cast<EdgeId>(net.edges.size());
            net.edges.push_back({*fi, *ti, w});
            net.adjacency[*fi].push_back({*ti, w, eid});
            if (!net.directed && *fi != *ti) net.adjacency[*ti].push_back({*fi, w, eid});
        } else {
            throw ParseError("edge file: unknown tag at line " + std::to_string(lineno));
        }
    }
    if (!saw_header) throw ParseError("edge file: missing header");
    if (declared_nodes != net.node_count())
        throw ValidationError("node count mismatch: declared " + std::to_string(declared_nodes) +
                              ", found " + std::to_string(net.node_count()));
    if (declared_edges != net.edge_count())
        throw ValidationError("edge count mismatch: declared " + std::to_string(declared_edges) +
                              ", found " + std::to_string(net.edge_count()));
    return net;
}

RoadNetwork parse_network_files(const std::string& coord_path, const std::string& edge_path) {
    std::ifstream cf(coord_path);
    if (!cf) throw ParseError("cannot open " + coord_path);
    std::ifstream ef(edge_path);
    if (!ef) throw ParseError("cannot open " + edge_path);
    return parse_network(cf, ef);
}

ShortestPathTree dijkstra_tree(const RoadNetwork& net, uint32_t source,
                               const std::vector<char>* allowed) {
    const size_t n = net.node_count();
    ShortestPathTree tree;
    tree.dist.assign(n, kInfiniteCost);
    tree.pred_node.assign(n, -1);
    tree.pred_edge.assign(n, 0);

    using Entry = std::pair<double, uint32_t>;  // (dist, node); smaller node wins ties
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    tree.dist[source] = 0.0;
    pq.push({0.0, source});
    std::vector<char> settled(n, 0);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        for (const RoadNetwork::Arc& a : net.adjacency[u]) {
            if (allowed && !(*allowed)[a.target]) continue;
            double nd = d + a.weight;
            if (nd < tree.dist[a.target]) {
                tree.dist[a.target] = nd;
                tree.pred_node[a.target] = u;
                tree.pred_edge[a.target] = a.edge;
                pq.push({nd, a.target});
            }
        }
    }
    return tree;
}

std::optional<Path> extract_path(const RoadNetwork& net, const ShortestPathTree& tree,
                                 uint32_t source, uint32_t target) {
    (void)net;
    if (tree.dist[target] >= kInfiniteCost) return std::nullopt;
    Path p;
    p.total_cost = tree.dist[target];
    uint32_t cur = target;
    while (cur != source) {
        p.edge_sequence.push_back(tree.pred_edge[cur]);
        p.node_sequence.push_back(cur);
        cur = static_cast<uint32_t>(tree.pred_node[cur]);
    }
    p.node_sequence.push_back(source);
    std::reverse(p.edge_sequence.begin(), p.edge_sequence.end());
    std::reverse(p.node_sequence.begin(), p.node_sequence.end());
    return p;
}

std::optional<Path> dijkstra(const RoadNetwork& net, uint32_t source, uint32_t target) {
    ShortestPathTree tree = dijkstra_tree(net, source);
    return extract_path(net, tree, source, target);
}

std::optional<Path> dijkstra_restricted(const RoadNetwork& net, const std::vector<char>& allowed,
                                        uint32_t source, uint32_t target) {
    if (!allowed[source] || !allowed[target])
        throw ValidationError("dijkstra_restricted: endpoint not in allowed set");
    ShortestPathTree tree = dijkstra_tree(net, source, &allowed);
    return extract_path(net, tree, source, target);
}

RoadNetwork reverse(const RoadNetwork& net) {
    RoadNetwork rev = net;
    if (!net.directed) return rev;
    for (auto& adj : rev.adjacency) adj.clear();
    for (EdgeId eid = 0; eid < rev.edges.size(); ++eid) {
        auto& e = rev.edges[eid];
        std::swap(e.from, e.to);
        rev.adjacency[e.from].push_back({e.to, e.weight, eid});
    }
    return rev;
}

}  // namespace pirpath
