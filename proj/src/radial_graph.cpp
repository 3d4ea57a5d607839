#include "radial_graph.hpp"

#include <algorithm>
#include <deque>

namespace gridhub {

const std::string& branch_id(const Circuit& c, BranchRef b) {
    switch (b.kind) {
        case BranchRef::Line: return c.lines[b.index].id;
        case BranchRef::Transformer: return c.transformers[b.index].id;
        default: return c.switches[b.index].id;
    }
}

const std::string& branch_from(const Circuit& c, BranchRef b) {
    switch (b.kind) {
        case BranchRef::Line: return c.lines[b.index].from_node;
        case BranchRef::Transformer: return c.transformers[b.index].from_node;
        default: return c.switches[b.index].from_node;
    }
}

const std::string& branch_to(const Circuit& c, BranchRef b) {
    switch (b.kind) {
        case BranchRef::Line: return c.lines[b.index].to_node;
        case BranchRef::Transformer: return c.transformers[b.index].to_node;
        default: return c.switches[b.index].to_node;
    }
}

bool branch_closed(const Circuit& c, BranchRef b) {
    return b.kind != BranchRef::Switch || c.switches[b.index].status == SwitchStatus::Closed;
}

PhaseSet branch_phases(const Circuit& c, BranchRef b) {
    switch (b.kind) {
        case BranchRef::Line: return c.lines[b.index].phases;
        case BranchRef::Transformer: return PhaseSet::abc();
        default: return c.switches[b.index].phases;
    }
}

namespace {

std::vector<BranchRef> all_branches(const Circuit& c) {
    std::vector<BranchRef> out;
    out.reserve(c.lines.size() + c.transformers.size() + c.switches.size());
    for (int i = 0; i < int(c.lines.size()); ++i) out.push_back({BranchRef::Line, i});
    for (int i = 0; i < int(c.transformers.size()); ++i)
        out.push_back({BranchRef::Transformer, i});
    for (int i = 0; i < int(c.switches.size()); ++i) out.push_back({BranchRef::Switch, i});
    return out;
}

}  // namespace

RadialGraph build_radial_graph(const Circuit& c) {
    RadialGraph g;
    int n = int(c.nodes.size());
    g.adj.resize(n);
    g.reachable.assign(n, 0);
    g.parent.assign(n, -1);
    g.parent_branch.assign(n, BranchRef{});
    g.delivered.assign(n, PhaseSet{});
    g.source = c.node_index(c.source().node);

    for (BranchRef b : all_branches(c)) {
        if (!branch_closed(c, b)) continue;
        int u = c.node_index(branch_from(c, b));
        int v = c.node_index(branch_to(c, b));
        g.adj[u].push_back({v, b});
        g.adj[v].push_back({u, b});
    }

    // Spanning forest over all components; the source's component first so
    // reachability and delivered phases come out of the same walk.
    std::vector<int> depth(n, -1);
    std::vector<int> tree_parent(n, -1);
    std::vector<BranchRef> tree_branch(n);
    std::vector<std::pair<std::pair<int, int>, BranchRef>> extra_edges;

    auto bfs = [&](int root, bool from_source) {
        std::deque<int> q{root};
        depth[root] = 0;
        if (from_source) {
            g.reachable[root] = 1;
            g.delivered[root] = PhaseSet::abc();
            g.order.push_back(root);
        }
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (auto& [v, b] : g.adj[u]) {
                if (depth[v] < 0) {
                    depth[v] = depth[u] + 1;
                    tree_parent[v] = u;
                    tree_branch[v] = b;
                    if (from_source) {
                        g.reachable[v] = 1;
                        g.parent[v] = u;
                        g.parent_branch[v] = b;
                        g.delivered[v] = g.delivered[u].intersect(branch_phases(c, b));
                        g.order.push_back(v);
                    }
                    q.push_back(v);
                } else if (!(tree_parent[u] == v && branch_id(c, tree_branch[u]) == branch_id(c, b)) &&
                           u < v) {
                    extra_edges.push_back({{u, v}, b});
                }
            }
        }
    };

    if (g.source >= 0) bfs(g.source, true);
    for (int i = 0; i < n; ++i)
        if (depth[i] < 0) bfs(i, false);

    // Each non-tree edge closes exactly one fundamental cycle.
    for (auto& [uv, b] : extra_edges) {
        auto [u, v] = uv;
        std::vector<std::string> ids{branch_id(c, b)};
        int a = u, z = v;
        while (a != z) {
            if (depth[a] >= depth[z]) {
                ids.push_back(branch_id(c, tree_branch[a]));
                a = tree_parent[a];
            } else {
                ids.push_back(branch_id(c, tree_branch[z]));
                z = tree_parent[z];
            }
        }
        std::sort(ids.begin() + 1, ids.end());
        g.cycles.push_back(std::move(ids));
    }

    return g;
}

}  // namespace gridhub
