#pragma once

#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "ocgfn/common.hpp"

namespace ocgfn::oracle {

// Fully enumerated environment DAG in topological order (state 0 is s_0).
// Refuses to build past the edge cap: oracles are exact or absent.
template <class Env>
struct Dag {
    struct Edge {
        int from, to, action;
    };

    const Env* env = nullptr;
    std::vector<typename Env::State> states;
    std::unordered_map<std::string, int> index;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> out_edges, in_edges;
    std::vector<int> terminals;

    int id_of(const typename Env::State& s) const {
        auto it = index.find(env->state_key(s));
        if (it == index.end()) throw std::runtime_error("Dag: unknown state");
        return it->second;
    }

    bool is_terminal(int id) const { return env->is_terminal(states[id]); }

    static Dag build(const Env& env, size_t edge_cap = 1000000) {
        // discovery
        std::vector<typename Env::State> found{env.initial_state()};
        std::unordered_map<std::string, int> idx{{env.state_key(found[0]), 0}};
        struct RawEdge {
            int from, to, action;
        };
        std::vector<RawEdge> raw;
        std::deque<int> queue{0};
        std::vector<int> legal;
        while (!queue.empty()) {
            const int sid = queue.front();
            queue.pop_front();
            if (env.is_terminal(found[sid])) continue;
            env.legal_actions(found[sid], legal);
            for (int a : legal) {
                auto next = env.apply(found[sid], a);
                auto key = env.state_key(next);
                auto [it, fresh] = idx.emplace(key, static_cast<int>(found.size()));
                if (fresh) {
                    found.push_back(next);
                    queue.push_back(it->second);
                }
                raw.push_back({sid, it->second, a});
                if (raw.size() > edge_cap)
                    throw std::runtime_error("Dag: edge cap exceeded");
            }
        }

        // Kahn topological order
        const int n = static_cast<int>(found.size());
        std::vector<int> indeg(n, 0);
        std::vector<std::vector<int>> adj(n);
        for (size_t e = 0; e < raw.size(); ++e) {
            indeg[raw[e].to] += 1;
            adj[raw[e].from].push_back(static_cast<int>(e));
        }
        std::vector<int> order;
        order.reserve(n);
        std::deque<int> ready;
        for (int i = 0; i < n; ++i)
            if (indeg[i] == 0) ready.push_back(i);
        while (!ready.empty()) {
            const int u = ready.front();
            ready.pop_front();
            order.push_back(u);
            for (int e : adj[u])
                if (--indeg[raw[e].to] == 0) ready.push_back(raw[e].to);
        }
        if (static_cast<int>(order.size()) != n)
            throw std::runtime_error("Dag: graph has a cycle");

        std::vector<int> rank(n);
        for (int i = 0; i < n; ++i) rank[order[i]] = i;

        Dag dag;
        dag.env = &env;
        dag.states.resize(n);
        dag.out_edges.assign(n, {});
        dag.in_edges.assign(n, {});
        for (int i = 0; i < n; ++i) dag.states[rank[i]] = std::move(found[i]);
        for (auto& [key, id] : idx) dag.index.emplace(key, rank[id]);
        dag.edges.reserve(raw.size());
        for (const auto& e : raw) {
            const int id = static_cast<int>(dag.edges.size());
            dag.edges.push_back({rank[e.from], rank[e.to], e.action});
            dag.out_edges[rank[e.from]].push_back(id);
            dag.in_edges[rank[e.to]].push_back(id);
        }
        for (int i = 0; i < n; ++i)
            if (env.is_terminal(dag.states[i])) dag.terminals.push_back(i);
        return dag;
    }
};

} // namespace ocgfn::oracle
