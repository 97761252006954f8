#pragma once

// Fractional splitting of tied atoms: route each supply node's mass to its
// candidate sinks so that every sink receives exactly its demand. Solved as a
// max-flow on the bipartite candidate graph (Edmonds-Karp; graphs are tiny).

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace gausscone {

struct TieSplit {
    int atom;
    int vertex;
    double mass;
};

struct SplitResult {
    bool feasible = false;
    std::vector<TieSplit> flows;   // positive flows only, ordered by (atom, vertex)
    std::vector<double> received;  // per sink
};

/// `supplies[s]` must be fully routed to sinks in `candidates[s]` so that sink t
/// receives `demands[t]`. `atom_ids[s]` labels the emitted flows.
inline SplitResult split_ties(const std::vector<double>& supplies, const std::vector<std::vector<int>>& candidates,
                              const std::vector<double>& demands, const std::vector<int>& atom_ids, double tol) {
    const int ns = static_cast<int>(supplies.size());
    const int nt = static_cast<int>(demands.size());
    // Node layout: 0 source, 1..ns supplies, ns+1..ns+nt sinks, ns+nt+1 sink.
    const int source = 0;
    const int sink = ns + nt + 1;
    const int nodes = sink + 1;
    struct Edge {
        int to;
        double cap;
        int rev;
    };
    std::vector<std::vector<Edge>> g(nodes);
    auto add = [&g](int a, int b, double cap) {
        g[a].push_back({b, cap, static_cast<int>(g[b].size())});
        g[b].push_back({a, 0.0, static_cast<int>(g[a].size()) - 1});
    };
    const double inf = std::numeric_limits<double>::infinity();
    for (int s = 0; s < ns; ++s) {
        add(source, 1 + s, supplies[s]);
        for (int t : candidates[s]) add(1 + s, 1 + ns + t, inf);
    }
    for (int t = 0; t < nt; ++t) add(1 + ns + t, sink, std::max(0.0, demands[t]));

    double total = 0.0;
    const double eps = tol * 1e-3;
    for (;;) {
        std::vector<int> prev_node(nodes, -1), prev_edge(nodes, -1);
        std::queue<int> q;
        q.push(source);
        prev_node[source] = source;
        while (!q.empty() && prev_node[sink] < 0) {
            const int a = q.front();
            q.pop();
            for (int e = 0; e < static_cast<int>(g[a].size()); ++e) {
                const auto& ed = g[a][e];
                if (ed.cap > eps && prev_node[ed.to] < 0) {
                    prev_node[ed.to] = a;
                    prev_edge[ed.to] = e;
                    q.push(ed.to);
                }
            }
        }
        if (prev_node[sink] < 0) break;
        double push = inf;
        for (int v = sink; v != source; v = prev_node[v]) push = std::min(push, g[prev_node[v]][prev_edge[v]].cap);
        for (int v = sink; v != source; v = prev_node[v]) {
            auto& ed = g[prev_node[v]][prev_edge[v]];
            ed.cap -= push;
            g[v][ed.rev].cap += push;
        }
        total += push;
    }

    SplitResult out;
    out.received.assign(nt, 0.0);
    for (int s = 0; s < ns; ++s) {
        for (const auto& ed : g[1 + s]) {
            if (ed.to <= ns || ed.to == sink) continue;
            const double f = g[ed.to][ed.rev].cap;  // reverse capacity carries the flow
            if (f > 0.0) {
                out.flows.push_back({atom_ids[s], ed.to - 1 - ns, f});
                out.received[ed.to - 1 - ns] += f;
            }
        }
    }
    std::sort(out.flows.begin(), out.flows.end(),
              [](const TieSplit& a, const TieSplit& b) { return a.atom != b.atom ? a.atom < b.atom : a.vertex < b.vertex; });
    double supply_total = 0.0;
    for (double s : supplies) supply_total += s;
    out.feasible = std::abs(total - supply_total) <= tol;
    for (int t = 0; t < nt; ++t) out.feasible = out.feasible && std::abs(out.received[t] - demands[t]) <= tol;
    return out;
}

} // namespace gausscone
