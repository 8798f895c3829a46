#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ocgfn/common.hpp"
#include "ocgfn/nn/mlp.hpp"

namespace ocgfn::harness {

enum class Phase { pretrain, finetune, convert, eval, oracle_check, mcmc };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::pretrain: return "pretrain";
        case Phase::finetune: return "finetune";
        case Phase::convert: return "convert";
        case Phase::eval: return "eval";
        case Phase::oracle_check: return "oracle-check";
        default: return "mcmc";
    }
}

// Flat key=value run configuration. Every key has a typed default; unknown
// keys or malformed values are rejected. Presets bake in the per-task-family
// default hyperparameters; explicit keys override them.
struct RunConfig {
    // task
    std::string task = "grid"; // grid | seq
    int grid_side = 8;
    int grid_ndim = 2;
    int seq_vocab = 4;
    int seq_length = 8;
    int seq_word_bits = 0;

    // reward (downstream tasks)
    std::string reward_kind = "gridworld"; // gridworld | lookup | landscape
    double reward_beta = 1.0;
    double reward_floor = 1e-6;
    std::string reward_table_file;
    uint64_t landscape_seed = 1;
    int landscape_modes = 10;
    double landscape_decay = 0.5;

    // models
    std::vector<int> hidden = {256, 256};
    std::string activation = "leaky_relu";
    int rnd_embed = 32;
    double intrinsic_coef = 1.0;

    // optimization / exploration
    double lr = 1e-3;
    double lr_final = 0.0; // > 0: geometric decay from lr to lr_final over the run
    int batch = 16;
    double epsilon = 0.001;
    double temperature = 1.0;

    // training loop
    long iters = 20000;
    long eval_every = 500;
    int eval_outcomes = 256;
    int eval_trials = 1;
    std::string variant = "full"; // full | no-ot | no-ot-ct
    size_t replay_capacity = 100000;

    // fine-tuning
    double q_temperature = 2.0;
    double q_epsilon = 0.05;
    bool replay_mix = true;
    std::string pretrained_dir;
    long pretrained_seed = -1; // -1: use the run seed

    // conversion
    long convert_samples = 200000;
    std::string convert_mode = "exact"; // exact | amortized | mc
    int convert_mc_draws = 64;

    // mcmc
    int mcmc_chains = 16;
    long mcmc_steps = 100000;
    long mcmc_burn_in = 0;
    long mcmc_log_every = 1000;

    // metrics
    double mode_threshold = 2.0;
    int metrics_top_k = 100;

    // run control
    std::vector<uint64_t> seeds = {0};
    std::string out = "out";

    static RunConfig preset(const std::string& name) {
        RunConfig c;
        auto grid = [&](int side) {
            c.task = "grid";
            c.grid_side = side;
            c.hidden = {256, 256};
            c.activation = "leaky_relu";
            c.lr = 1e-3;
            c.batch = 16;
            c.epsilon = 0.001;
            c.iters = 20000;
            c.reward_kind = "gridworld";
            c.mode_threshold = 2.0;
        };
        auto seq = [&](int vocab, int length, int word_bits, double lr, double eps, int batch,
                       long iters) {
            c.task = "seq";
            c.seq_vocab = vocab;
            c.seq_length = length;
            c.seq_word_bits = word_bits;
            c.hidden = {2048, 2048};
            c.activation = "relu";
            c.lr = lr;
            c.epsilon = eps;
            c.batch = batch;
            c.iters = iters;
            c.reward_kind = "landscape";
            c.reward_beta = 3.0;
            c.mode_threshold = 0.5;
        };
        if (name == "grid-small") grid(8);
        else if (name == "grid-medium") grid(16);
        else if (name == "grid-large") grid(32);
        else if (name == "bit-small") seq(4, 8, 2, 5e-3, 0.0005, 16, 50000);
        else if (name == "bit-medium") seq(4, 12, 2, 5e-3, 0.0005, 16, 50000);
        else if (name == "bit-large") seq(16, 8, 4, 5e-3, 0.0005, 16, 50000);
        else if (name == "tfbind-like") seq(4, 8, 0, 1e-4, 0.001, 32, 5000);
        else if (name == "rna-like") seq(4, 14, 0, 1e-4, 0.001, 32, 5000);
        else if (name == "amp-like") seq(20, 50, 0, 1e-3, 0.01, 16, 5000);
        else throw std::invalid_argument("unknown preset: " + name);
        return c;
    }

    void set(const std::string& key, const std::string& value) {
        if (key == "task") task = value;
        else if (key == "grid.side") grid_side = to_int(key, value);
        else if (key == "grid.ndim") grid_ndim = to_int(key, value);
        else if (key == "seq.vocab") seq_vocab = to_int(key, value);
        else if (key == "seq.length") seq_length = to_int(key, value);
        else if (key == "seq.word_bits") seq_word_bits = to_int(key, value);
        else if (key == "reward.kind") reward_kind = value;
        else if (key == "reward.beta") reward_beta = to_double(key, value);
        else if (key == "reward.floor") reward_floor = to_double(key, value);
        else if (key == "reward.table_file") reward_table_file = value;
        else if (key == "reward.landscape_seed") landscape_seed = to_u64(key, value);
        else if (key == "reward.landscape_modes") landscape_modes = to_int(key, value);
        else if (key == "reward.landscape_decay") landscape_decay = to_double(key, value);
        else if (key == "model.hidden") hidden = to_int_list(key, value);
        else if (key == "model.activation") activation = value;
        else if (key == "model.rnd_embed") rnd_embed = to_int(key, value);
        else if (key == "model.intrinsic_coef") intrinsic_coef = to_double(key, value);
        else if (key == "opt.lr") lr = to_double(key, value);
        else if (key == "opt.lr_final") lr_final = to_double(key, value);
        else if (key == "opt.batch") batch = to_int(key, value);
        else if (key == "explore.epsilon") epsilon = to_double(key, value);
        else if (key == "explore.temperature") temperature = to_double(key, value);
        else if (key == "train.iters") iters = to_long(key, value);
        else if (key == "train.eval_every") eval_every = to_long(key, value);
        else if (key == "train.eval_outcomes") eval_outcomes = to_int(key, value);
        else if (key == "train.eval_trials") eval_trials = to_int(key, value);
        else if (key == "variant") variant = value;
        else if (key == "replay.capacity") replay_capacity = to_u64(key, value);
        else if (key == "finetune.q_temperature") q_temperature = to_double(key, value);
        else if (key == "finetune.q_epsilon") q_epsilon = to_double(key, value);
        else if (key == "finetune.replay_mix") replay_mix = to_bool(key, value);
        else if (key == "finetune.pretrained_dir") pretrained_dir = value;
        else if (key == "finetune.pretrained_seed") pretrained_seed = to_long(key, value);
        else if (key == "convert.samples") convert_samples = to_long(key, value);
        else if (key == "convert.mode") convert_mode = value;
        else if (key == "convert.mc_draws") convert_mc_draws = to_int(key, value);
        else if (key == "mcmc.chains") mcmc_chains = to_int(key, value);
        else if (key == "mcmc.steps") mcmc_steps = to_long(key, value);
        else if (key == "mcmc.burn_in") mcmc_burn_in = to_long(key, value);
        else if (key == "mcmc.log_every") mcmc_log_every = to_long(key, value);
        else if (key == "metrics.mode_threshold") mode_threshold = to_double(key, value);
        else if (key == "metrics.top_k") metrics_top_k = to_int(key, value);
        else if (key == "seeds") seeds = to_u64_list(key, value);
        else if (key == "out") out = value;
        else throw std::invalid_argument("unknown config key: " + key);
    }

    // `key = value` lines, '#' comments
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw std::runtime_error("bad config line: " + line);
                continue;
            }
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void validate() const {
        if (task != "grid" && task != "seq")
            throw std::invalid_argument("task must be grid or seq");
        if (task == "grid" && grid_side < 4)
            throw std::invalid_argument("grid.side must be >= 4");
        if (task == "grid" && grid_ndim < 1)
            throw std::invalid_argument("grid.ndim must be >= 1");
        if (task == "seq" && (seq_vocab < 2 || seq_length < 1))
            throw std::invalid_argument("seq.vocab must be >= 2 and seq.length >= 1");
        if (reward_kind != "gridworld" && reward_kind != "lookup" && reward_kind != "landscape")
            throw std::invalid_argument("reward.kind must be gridworld, lookup or landscape");
        if (reward_kind == "gridworld" && task != "grid")
            throw std::invalid_argument("reward.kind=gridworld requires task=grid");
        if (reward_kind == "lookup" && reward_table_file.empty())
            throw std::invalid_argument("reward.kind=lookup requires reward.table_file");
        if (reward_beta < 1.0) throw std::invalid_argument("reward.beta must be >= 1");
        if (!(reward_floor > 0.0)) throw std::invalid_argument("reward.floor must be positive");
        nn::activation_from_name(activation);
        if (hidden.empty()) throw std::invalid_argument("model.hidden must be nonempty");
        for (int h : hidden)
            if (h < 1) throw std::invalid_argument("model.hidden entries must be >= 1");
        if (!(lr > 0.0)) throw std::invalid_argument("opt.lr must be positive");
        if (lr_final < 0.0 || lr_final > lr)
            throw std::invalid_argument("opt.lr_final must be in [0, opt.lr]");
        if (batch < 1) throw std::invalid_argument("opt.batch must be >= 1");
        if (epsilon < 0.0 || epsilon > 1.0)
            throw std::invalid_argument("explore.epsilon must be in [0,1]");
        if (!(temperature > 0.0))
            throw std::invalid_argument("explore.temperature must be positive");
        if (iters < 1) throw std::invalid_argument("train.iters must be >= 1");
        if (eval_every < 1) throw std::invalid_argument("train.eval_every must be >= 1");
        if (eval_outcomes < 1) throw std::invalid_argument("train.eval_outcomes must be >= 1");
        if (variant != "full" && variant != "no-ot" && variant != "no-ot-ct")
            throw std::invalid_argument("variant must be full, no-ot or no-ot-ct");
        if (convert_mode != "exact" && convert_mode != "amortized" && convert_mode != "mc")
            throw std::invalid_argument("convert.mode must be exact, amortized or mc");
        if (mcmc_chains < 1) throw std::invalid_argument("mcmc.chains must be >= 1");
        if (mcmc_steps <= mcmc_burn_in || mcmc_burn_in < 0)
            throw std::invalid_argument("need mcmc.steps > mcmc.burn_in >= 0");
        if (!(mode_threshold > 0.0))
            throw std::invalid_argument("metrics.mode_threshold must be positive");
        if (metrics_top_k < 1) throw std::invalid_argument("metrics.top_k must be >= 1");
        if (seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
    }

    std::string print() const {
        std::ostringstream ss;
        ss << "task = " << task << "\n";
        ss << "grid.side = " << grid_side << "\n";
        ss << "grid.ndim = " << grid_ndim << "\n";
        ss << "seq.vocab = " << seq_vocab << "\n";
        ss << "seq.length = " << seq_length << "\n";
        ss << "seq.word_bits = " << seq_word_bits << "\n";
        ss << "reward.kind = " << reward_kind << "\n";
        ss << "reward.beta = " << fmt(reward_beta) << "\n";
        ss << "reward.floor = " << fmt(reward_floor) << "\n";
        ss << "reward.table_file = " << reward_table_file << "\n";
        ss << "reward.landscape_seed = " << landscape_seed << "\n";
        ss << "reward.landscape_modes = " << landscape_modes << "\n";
        ss << "reward.landscape_decay = " << fmt(landscape_decay) << "\n";
        ss << "model.hidden = " << join(hidden) << "\n";
        ss << "model.activation = " << activation << "\n";
        ss << "model.rnd_embed = " << rnd_embed << "\n";
        ss << "model.intrinsic_coef = " << fmt(intrinsic_coef) << "\n";
        ss << "opt.lr = " << fmt(lr) << "\n";
        ss << "opt.lr_final = " << fmt(lr_final) << "\n";
        ss << "opt.batch = " << batch << "\n";
        ss << "explore.epsilon = " << fmt(epsilon) << "\n";
        ss << "explore.temperature = " << fmt(temperature) << "\n";
        ss << "train.iters = " << iters << "\n";
        ss << "train.eval_every = " << eval_every << "\n";
        ss << "train.eval_outcomes = " << eval_outcomes << "\n";
        ss << "train.eval_trials = " << eval_trials << "\n";
        ss << "variant = " << variant << "\n";
        ss << "replay.capacity = " << replay_capacity << "\n";
        ss << "finetune.q_temperature = " << fmt(q_temperature) << "\n";
        ss << "finetune.q_epsilon = " << fmt(q_epsilon) << "\n";
        ss << "finetune.replay_mix = " << (replay_mix ? "true" : "false") << "\n";
        ss << "finetune.pretrained_dir = " << pretrained_dir << "\n";
        ss << "finetune.pretrained_seed = " << pretrained_seed << "\n";
        ss << "convert.samples = " << convert_samples << "\n";
        ss << "convert.mode = " << convert_mode << "\n";
        ss << "convert.mc_draws = " << convert_mc_draws << "\n";
        ss << "mcmc.chains = " << mcmc_chains << "\n";
        ss << "mcmc.steps = " << mcmc_steps << "\n";
        ss << "mcmc.burn_in = " << mcmc_burn_in << "\n";
        ss << "mcmc.log_every = " << mcmc_log_every << "\n";
        ss << "metrics.mode_threshold = " << fmt(mode_threshold) << "\n";
        ss << "metrics.top_k = " << metrics_top_k << "\n";
        ss << "seeds = " << join(seeds) << "\n";
        ss << "out = " << out << "\n";
        return ss.str();
    }

    // output directory, honoring the OCGFN_OUT_ROOT environment variable for
    // relative paths
    std::string out_dir() const {
        if (!out.empty() && out[0] == '/') return out;
        const char* root = std::getenv("OCGFN_OUT_ROOT");
        if (root && *root) return std::string(root) + "/" + out;
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? "" : s.substr(b, e - b + 1);
    }

    static int to_int(const std::string& key, const std::string& v) {
        return static_cast<int>(to_long(key, v));
    }

    static long to_long(const std::string& key, const std::string& v) {
        size_t pos = 0;
        long out = 0;
        try {
            out = std::stol(v, &pos);
        } catch (...) {
            throw std::invalid_argument("config key " + key + ": bad integer '" + v + "'");
        }
        if (pos != v.size())
            throw std::invalid_argument("config key " + key + ": bad integer '" + v + "'");
        return out;
    }

    static uint64_t to_u64(const std::string& key, const std::string& v) {
        size_t pos = 0;
        unsigned long long out = 0;
        try {
            out = std::stoull(v, &pos);
        } catch (...) {
            throw std::invalid_argument("config key " + key + ": bad integer '" + v + "'");
        }
        if (pos != v.size())
            throw std::invalid_argument("config key " + key + ": bad integer '" + v + "'");
        return out;
    }

    static double to_double(const std::string& key, const std::string& v) {
        size_t pos = 0;
        double out = 0;
        try {
            out = std::stod(v, &pos);
        } catch (...) {
            throw std::invalid_argument("config key " + key + ": bad number '" + v + "'");
        }
        if (pos != v.size())
            throw std::invalid_argument("config key " + key + ": bad number '" + v + "'");
        return out;
    }

    static bool to_bool(const std::string& key, const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw std::invalid_argument("config key " + key + ": bad bool '" + v + "'");
    }

    static std::vector<int> to_int_list(const std::string& key, const std::string& v) {
        std::vector<int> out;
        std::istringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(to_int(key, trim(item)));
        if (out.empty()) throw std::invalid_argument("config key " + key + ": empty list");
        return out;
    }

    static std::vector<uint64_t> to_u64_list(const std::string& key, const std::string& v) {
        std::vector<uint64_t> out;
        std::istringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(to_u64(key, trim(item)));
        if (out.empty()) throw std::invalid_argument("config key " + key + ": empty list");
        return out;
    }

    static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    template <class T>
    static std::string join(const std::vector<T>& xs) {
        std::ostringstream ss;
        for (size_t i = 0; i < xs.size(); ++i) ss << (i ? "," : "") << xs[i];
        return ss.str();
    }
};

} // namespace ocgfn::harness
