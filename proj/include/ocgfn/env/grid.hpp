#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ocgfn/common.hpp"

namespace ocgfn::env {

// Hypergrid generation task. A state is a coordinate vector plus a terminated
// flag; actions 0..ndim-1 increment one coordinate, action ndim terminates.
// The DAG is graded by (coordinate sum, terminated), so every action strictly
// increases that pair and trajectories are bounded by ndim*(side-1)+1 steps.
struct GridSpec {
    int side = 8; // cells per dimension (H)
    int ndim = 2;
};

struct GridState {
    std::vector<uint8_t> coords;
    bool terminated = false;

    bool operator==(const GridState& o) const {
        return terminated == o.terminated && coords == o.coords;
    }
};

class GridEnv {
public:
    using State = GridState;

    explicit GridEnv(GridSpec spec) : spec_(spec) {
        if (spec_.side < 4) throw std::invalid_argument("GridSpec: side must be >= 4");
        if (spec_.ndim < 1) throw std::invalid_argument("GridSpec: ndim must be >= 1");
    }

    const GridSpec& spec() const { return spec_; }

    State initial_state() const { return State{std::vector<uint8_t>(spec_.ndim, 0), false}; }

    bool is_terminal(const State& s) const { return s.terminated; }

    bool is_initial(const State& s) const {
        if (s.terminated) return false;
        for (uint8_t c : s.coords)
            if (c != 0) return false;
        return true;
    }

    // forward actions: one increment per dimension + stop
    int num_actions() const { return spec_.ndim + 1; }
    int stop_action() const { return spec_.ndim; }

    int max_trajectory_len() const { return spec_.ndim * (spec_.side - 1) + 1; }

    void legal_actions(const State& s, std::vector<int>& out) const {
        out.clear();
        if (s.terminated) return;
        for (int d = 0; d < spec_.ndim; ++d)
            if (s.coords[d] + 1 < spec_.side) out.push_back(d);
        out.push_back(stop_action());
    }

    // back-action a at state s: the forward action that produced s from its parent
    void legal_back_actions(const State& s, std::vector<int>& out) const {
        out.clear();
        if (s.terminated) {
            out.push_back(stop_action());
            return;
        }
        for (int d = 0; d < spec_.ndim; ++d)
            if (s.coords[d] > 0) out.push_back(d);
    }

    State apply(const State& s, int action) const {
        State n = s;
        if (action == stop_action()) {
            n.terminated = true;
        } else {
            n.coords[action] += 1;
        }
        return n;
    }

    State parent_via(const State& s, int back_action) const {
        State p = s;
        if (back_action == stop_action()) {
            p.terminated = false;
        } else {
            p.coords[back_action] -= 1;
        }
        return p;
    }

    std::vector<std::pair<int, State>> children(const State& s) const {
        if (s.terminated)
            throw std::invalid_argument("children: terminal state has no children");
        std::vector<int> acts;
        legal_actions(s, acts);
        std::vector<std::pair<int, State>> out;
        out.reserve(acts.size());
        for (int a : acts) out.emplace_back(a, apply(s, a));
        return out;
    }

    std::vector<std::pair<State, int>> parents(const State& s) const {
        if (is_initial(s))
            throw std::invalid_argument("parents: initial state has no parents");
        std::vector<int> acts;
        legal_back_actions(s, acts);
        std::vector<std::pair<State, int>> out;
        out.reserve(acts.size());
        for (int a : acts) out.emplace_back(parent_via(s, a), a);
        return out;
    }

    // one-hot per dimension + terminated bit
    int encoding_dim() const { return spec_.ndim * spec_.side + 1; }

    void encode(const State& s, double* out) const {
        std::fill(out, out + encoding_dim(), 0.0);
        for (int d = 0; d < spec_.ndim; ++d) out[d * spec_.side + s.coords[d]] = 1.0;
        out[spec_.ndim * spec_.side] = s.terminated ? 1.0 : 0.0;
    }

    std::string state_key(const State& s) const {
        std::string k;
        k.reserve(s.coords.size() + 1);
        for (uint8_t c : s.coords) k.push_back(static_cast<char>(c));
        k.push_back(s.terminated ? 1 : 0);
        return k;
    }

    // flat index of a terminal cell (row-major over coords)
    size_t cell_index(const State& s) const {
        size_t idx = 0;
        for (int d = 0; d < spec_.ndim; ++d) idx = idx * spec_.side + s.coords[d];
        return idx;
    }

    size_t num_cells() const {
        size_t n = 1;
        for (int d = 0; d < spec_.ndim; ++d) n *= spec_.side;
        return n;
    }

    std::vector<State> enumerate_terminals() const {
        std::vector<State> out;
        out.reserve(num_cells());
        State s{std::vector<uint8_t>(spec_.ndim, 0), true};
        enumerate_cells(0, s, out);
        return out;
    }

    State terminal_from_cell(size_t idx) const {
        State s{std::vector<uint8_t>(spec_.ndim, 0), true};
        for (int d = spec_.ndim - 1; d >= 0; --d) {
            s.coords[d] = static_cast<uint8_t>(idx % spec_.side);
            idx /= spec_.side;
        }
        return s;
    }

    State random_terminal(Rng& rng) const {
        State s{std::vector<uint8_t>(spec_.ndim, 0), true};
        for (int d = 0; d < spec_.ndim; ++d)
            s.coords[d] = static_cast<uint8_t>(rng.uniform_index(spec_.side));
        return s;
    }

    double reward(const State& x) const { return reward_gridworld(x, spec_); }

    // 0.5*prod_i 1[0.25 < |x_i/H - 0.5|] + 2*prod_i 1[0.3 < |x_i/H - 0.5| < 0.4] + 1e-6
    static double reward_gridworld(const State& x, const GridSpec& spec) {
        if (!x.terminated)
            throw std::invalid_argument("reward_gridworld: state is not terminal");
        double outer = 1.0, ring = 1.0;
        for (int d = 0; d < spec.ndim; ++d) {
            double t = std::abs(static_cast<double>(x.coords[d]) / spec.side - 0.5);
            if (!(t > 0.25)) outer = 0.0;
            if (!(t > 0.3 && t < 0.4)) ring = 0.0;
        }
        return 0.5 * outer + 2.0 * ring + 1e-6;
    }

private:
    void enumerate_cells(int dim, State& s, std::vector<State>& out) const {
        if (dim == spec_.ndim) {
            out.push_back(s);
            return;
        }
        for (int c = 0; c < spec_.side; ++c) {
            s.coords[dim] = static_cast<uint8_t>(c);
            enumerate_cells(dim + 1, s, out);
        }
    }

    GridSpec spec_;
};

// identity outcome map: the outcome of a terminal state is the state itself
template <class Env>
typename Env::State outcome_of(const Env& env, const typename Env::State& x) {
    if (!env.is_terminal(x))
        throw std::invalid_argument("outcome_of: state is not terminal");
    return x;
}

} // namespace ocgfn::env
