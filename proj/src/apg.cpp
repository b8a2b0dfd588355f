#include "treactor/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace treactor {

bool Apg::precedes(ReactionId a, ReactionId b) const {
    if (a == b) return true;
    if (topo_index[a] > topo_index[b]) return false;
    // BFS over successors; graphs here are small enough not to need caching.
    std::vector<bool> seen(succ.size(), false);
    std::queue<ReactionId> q;
    q.push(a);
    seen[a] = true;
    while (!q.empty()) {
        ReactionId cur = q.front();
        q.pop();
        for (ReactionId nxt : succ[cur]) {
            if (nxt == b) return true;
            if (!seen[nxt]) {
                seen[nxt] = true;
                q.push(nxt);
            }
        }
    }
    return false;
}

namespace {

std::string describe_cycle(const ReactorGraph& graph, const Apg& apg,
                           const std::vector<uint32_t>& indegree) {
    // Any reaction with leftover indegree lies on or downstream of a cycle;
    // walk predecessors until a reaction repeats.
    ReactionId start = 0;
    for (ReactionId r = 0; r < indegree.size(); ++r)
        if (indegree[r] > 0) { start = r; break; }
    std::vector<ReactionId> path;
    std::set<ReactionId> seen;
    ReactionId cur = start;
    while (!seen.count(cur)) {
        seen.insert(cur);
        path.push_back(cur);
        for (ReactionId p : apg.pred[cur])
            if (indegree[p] > 0) { cur = p; break; }
    }
    // cur repeats: the cycle is the path suffix starting at cur.
    auto it = std::find(path.begin(), path.end(), cur);
    std::string out;
    for (; it != path.end(); ++it) {
        if (!out.empty()) out += " -> ";
        out += graph.reaction(*it).name;
    }
    return out + " -> " + graph.reaction(cur).name;
}

} // namespace

Apg build_apg(const ReactorGraph& graph) {
    const size_t n = graph.num_reactions();
    Apg apg;
    apg.succ.resize(n);
    apg.pred.resize(n);

    std::vector<std::set<std::pair<ReactionId, ReactionId>>::value_type> edges;
    std::set<std::pair<ReactionId, ReactionId>> edge_set;
    auto add_edge = [&](ReactionId a, ReactionId b) {
        if (a == b) return;
        if (edge_set.insert({a, b}).second) {
            apg.succ[a].push_back(b);
            apg.pred[b].push_back(a);
        }
    };

    // Declaration order within one reactor.
    for (ReactorId r = 0; r < graph.num_reactors(); ++r) {
        const auto& rs = graph.reactor(r).reactions;
        for (size_t i = 0; i + 1 < rs.size(); ++i) add_edge(rs[i], rs[i + 1]);
    }

    // Writer precedes reader: an effect port reaches triggered reactions
    // through its zero-delay connections.
    for (ReactionId a = 0; a < n; ++a) {
        for (PortId p : graph.reaction(a).effects) {
            const auto& port = graph.port(p);
            for (ReactionId b : port.triggers) add_edge(a, b);
            for (PortId q : port.downstream)
                for (ReactionId b : graph.port(q).triggers) add_edge(a, b);
        }
    }

    // Kahn with a min-id heap gives the canonical linearization.
    std::vector<uint32_t> indegree(n, 0);
    for (ReactionId r = 0; r < n; ++r) indegree[r] = static_cast<uint32_t>(apg.pred[r].size());
    std::priority_queue<ReactionId, std::vector<ReactionId>, std::greater<>> ready;
    for (ReactionId r = 0; r < n; ++r)
        if (indegree[r] == 0) ready.push(r);

    apg.level.assign(n, 0);
    apg.topo_index.assign(n, 0);
    std::vector<uint32_t> remaining = indegree;
    while (!ready.empty()) {
        ReactionId r = ready.top();
        ready.pop();
        apg.topo_index[r] = static_cast<uint32_t>(apg.topo_order.size());
        apg.topo_order.push_back(r);
        for (ReactionId s : apg.succ[r]) {
            apg.level[s] = std::max(apg.level[s], apg.level[r] + 1);
            if (--remaining[s] == 0) ready.push(s);
        }
    }
    if (apg.topo_order.size() != n)
        throw CyclicDependency(describe_cycle(graph, apg, remaining));
    return apg;
}

} // namespace treactor
