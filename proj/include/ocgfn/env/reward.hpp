#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/env/sequence.hpp"

namespace ocgfn::env {

enum class RewardKind { gridworld, lookup_table, landscape };

// Reward over terminal sequences: reward(x) = max(base(x), floor)^beta where
// base comes from an explicit lookup table or a synthetic landscape of
// Hamming-distance bumps (each bump is 1 at its center and decays by
// decay^distance).
class SequenceReward {
public:
    static SequenceReward from_table(std::unordered_map<std::string, double> table,
                                     double beta = 1.0, double floor = 1e-6) {
        SequenceReward r;
        r.kind_ = RewardKind::lookup_table;
        r.table_ = std::move(table);
        r.beta_ = beta;
        r.floor_ = floor;
        r.check_params();
        return r;
    }

    // text file of `sequence<TAB>value` lines; '#' starts a comment
    static SequenceReward load_table(const std::string& path, double beta = 1.0,
                                     double floor = 1e-6) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open reward table: " + path);
        std::unordered_map<std::string, double> table;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw std::runtime_error("reward table line missing tab: " + line);
            table[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
        }
        return from_table(std::move(table), beta, floor);
    }

    static SequenceReward landscape(const SeqEnv& env, uint64_t seed, int num_modes,
                                    double decay, double beta = 1.0, double floor = 1e-6) {
        if (num_modes < 1) throw std::invalid_argument("landscape: num_modes must be >= 1");
        if (!(decay > 0.0 && decay < 1.0))
            throw std::invalid_argument("landscape: decay must be in (0,1)");
        SequenceReward r;
        r.kind_ = RewardKind::landscape;
        r.beta_ = beta;
        r.floor_ = floor;
        r.decay_ = decay;
        Rng rng(Rng::derive(seed, 0xC3A7u));
        std::unordered_set<std::string> seen;
        while (static_cast<int>(r.centers_.size()) < num_modes) {
            SeqState c;
            for (int p = 0; p < env.spec().length; ++p)
                c.symbols.push_back(static_cast<uint8_t>(rng.uniform_index(env.spec().vocab_size)));
            if (seen.insert(env.state_key(c)).second) r.centers_.push_back(std::move(c));
        }
        r.check_params();
        return r;
    }

    double base(const SeqEnv& env, const SeqState& x) const {
        if (!env.is_terminal(x))
            throw std::invalid_argument("reward_sequence: state is not terminal");
        if (kind_ == RewardKind::lookup_table) {
            auto it = table_.find(env.to_text(x));
            if (it == table_.end())
                throw std::runtime_error("reward table has no entry for " + env.to_text(x));
            return it->second;
        }
        double b = 0.0;
        for (const auto& c : centers_) b += std::pow(decay_, hamming(x, c));
        return b;
    }

    double operator()(const SeqEnv& env, const SeqState& x) const {
        return std::pow(std::max(base(env, x), floor_), beta_);
    }

    double beta() const { return beta_; }
    double floor() const { return floor_; }
    const std::vector<SeqState>& centers() const { return centers_; }

    static int hamming(const SeqState& a, const SeqState& b) {
        int d = 0;
        for (size_t i = 0; i < a.symbols.size(); ++i) d += a.symbols[i] != b.symbols[i];
        return d;
    }

private:
    void check_params() const {
        if (beta_ < 1.0) throw std::invalid_argument("reward: beta must be >= 1");
        if (!(floor_ > 0.0)) throw std::invalid_argument("reward: floor must be positive");
    }

    RewardKind kind_ = RewardKind::landscape;
    std::unordered_map<std::string, double> table_;
    std::vector<SeqState> centers_;
    double decay_ = 0.5;
    double beta_ = 1.0;
    double floor_ = 1e-6;
};

} // namespace ocgfn::env
