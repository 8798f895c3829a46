#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "ocgfn/common.hpp"

namespace ocgfn::harness {

struct MetricsConfig {
    double mode_threshold = 2.0; // reward bar for a sample to count as a mode
    int top_k = 100;

    void validate() const {
        if (!(mode_threshold > 0.0))
            throw std::invalid_argument("MetricsConfig: mode_threshold must be positive");
        if (top_k < 1) throw std::invalid_argument("MetricsConfig: top_k must be >= 1");
    }
};

// Cumulative sample log: tracks distinct terminal states above the mode
// threshold, and the best rewards for top-K scoring. Distinctness is exact
// state identity (keys).
class SampleLog {
public:
    explicit SampleLog(MetricsConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    void add(const std::string& key, double reward) {
        add(key, reward, reward >= cfg_.mode_threshold);
    }

    // explicit mode predicate for tasks whose mode rule is not a plain
    // reward threshold
    void add(const std::string& key, double reward, bool counts_as_mode) {
        if (!distinct_.insert(key).second) return;
        rewards_.push_back(reward);
        if (counts_as_mode) modes_ += 1;
    }

    // distinct terminal states with reward >= threshold seen so far
    size_t num_modes() const { return modes_; }

    size_t num_distinct() const { return rewards_.size(); }

    // mean reward of the K best distinct samples (all if fewer than K)
    double top_k_score() const {
        if (rewards_.empty()) throw std::invalid_argument("top_k_score: empty sample log");
        const size_t k = std::min(rewards_.size(), static_cast<size_t>(cfg_.top_k));
        std::vector<double> best(rewards_);
        std::partial_sort(best.begin(), best.begin() + k, best.end(), std::greater<>());
        double sum = 0.0;
        for (size_t i = 0; i < k; ++i) sum += best[i];
        return sum / static_cast<double>(k);
    }

private:
    MetricsConfig cfg_;
    std::unordered_set<std::string> distinct_;
    std::vector<double> rewards_;
    size_t modes_ = 0;
};

// CSV with the fixed header step,seed,phase,success_rate,num_modes,top_k,l1,loss.
// Absent metrics are written as empty fields. Numeric formatting is exact
// (%.17g), so identical runs produce byte-identical files.
class MetricsCsv {
public:
    MetricsCsv(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write metrics csv: " + path);
        out_ << "step,seed,phase,success_rate,num_modes,top_k,l1,loss\n";
    }

    struct Row {
        long step = 0;
        uint64_t seed = 0;
        std::string phase;
        std::optional<double> success_rate, top_k, l1, loss;
        std::optional<long> num_modes;
    };

    void write(const Row& r) {
        out_ << r.step << "," << r.seed << "," << r.phase << "," << fmt(r.success_rate) << ","
             << (r.num_modes ? std::to_string(*r.num_modes) : "") << "," << fmt(r.top_k) << ","
             << fmt(r.l1) << "," << fmt(r.loss) << "\n";
    }

    void flush() { out_.flush(); }

private:
    static std::string fmt(const std::optional<double>& v) {
        if (!v) return "";
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", *v);
        return buf;
    }

    std::ofstream out_;
};

} // namespace ocgfn::harness
