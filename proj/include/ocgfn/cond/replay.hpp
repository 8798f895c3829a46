#pragma once

#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/gfn/trajectory.hpp"

namespace ocgfn::cond {

// Bounded FIFO pool of pre-training trajectories, stored as action lists
// (states are cheap to rebuild). Also maintains a deduplicated pool of every
// outcome observed, which is the sampling support for Monte-Carlo conversion.
template <class Env>
class ReplayDataset {
public:
    explicit ReplayDataset(size_t capacity = 100000) : capacity_(capacity) {}

    size_t size() const { return trajs_.size(); }
    size_t capacity() const { return capacity_; }
    bool empty() const { return trajs_.empty(); }

    void push(const Env& env, const gfn::TrajectoryRecord<typename Env::State>& traj) {
        if (!env.is_terminal(traj.terminal()))
            throw std::invalid_argument("ReplayDataset: trajectory does not terminate");
        trajs_.push_back(traj.actions);
        if (trajs_.size() > capacity_) trajs_.pop_front();
        if (outcome_seen_.insert(env.state_key(traj.terminal())).second)
            outcomes_.push_back(traj.terminal());
    }

    const std::deque<std::vector<int>>& trajectories() const { return trajs_; }

    // distinct outcomes ever observed (not evicted with their trajectories)
    const std::vector<typename Env::State>& outcome_pool() const { return outcomes_; }

    // uniform trajectory, uniform edge; returns (state, action taken there)
    std::pair<typename Env::State, int> sample_transition(const Env& env, Rng& rng) const {
        if (trajs_.empty()) throw std::runtime_error("ReplayDataset: empty");
        const auto& acts = trajs_[rng.uniform_index(static_cast<int>(trajs_.size()))];
        const int k = rng.uniform_index(static_cast<int>(acts.size()));
        auto s = env.initial_state();
        for (int i = 0; i < k; ++i) s = env.apply(s, acts[i]);
        return {std::move(s), acts[k]};
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write replay file: " + path);
        out << "ocgfn-replay 1\n";
        for (const auto& acts : trajs_) {
            for (size_t i = 0; i < acts.size(); ++i) out << (i ? " " : "") << acts[i];
            out << "\n";
        }
    }

    static ReplayDataset load(const Env& env, const std::string& path, size_t capacity) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open replay file: " + path);
        std::string line;
        std::getline(in, line);
        if (line != "ocgfn-replay 1")
            throw std::runtime_error("bad replay file header: " + line);
        ReplayDataset d(capacity);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::vector<int> acts;
            int a;
            while (ss >> a) acts.push_back(a);
            auto traj = gfn::replay_actions(env, acts);
            d.push(env, traj);
        }
        return d;
    }

private:
    size_t capacity_;
    std::deque<std::vector<int>> trajs_;
    std::vector<typename Env::State> outcomes_;
    std::unordered_set<std::string> outcome_seen_;
};

} // namespace ocgfn::cond
