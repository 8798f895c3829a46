#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ocgfn/common.hpp"

namespace ocgfn::env {

// Fixed-length left-to-right sequence generation. A state is a partial symbol
// string; the single action family appends one vocabulary symbol, so every
// non-initial state has exactly one parent (drop the last symbol).
//
// Bit tasks use a vocabulary of 2^k "words": n total bits with k bits per word
// gives vocab_size = 2^k and length = n/k appended words.
struct SeqSpec {
    int vocab_size = 2;
    int length = 4;    // trajectory length (symbols appended)
    int word_bits = 0; // k for bit tasks, 0 otherwise

    static SeqSpec bit_task(int n_bits, int k) {
        if (k <= 0 || n_bits % k != 0)
            throw std::invalid_argument("bit_task: k must divide n");
        return SeqSpec{1 << k, n_bits / k, k};
    }
};

struct SeqState {
    std::vector<uint8_t> symbols;

    bool operator==(const SeqState& o) const { return symbols == o.symbols; }
};

class SeqEnv {
public:
    using State = SeqState;

    explicit SeqEnv(SeqSpec spec) : spec_(spec) {
        if (spec_.vocab_size < 2) throw std::invalid_argument("SeqSpec: vocab_size must be >= 2");
        if (spec_.length < 1) throw std::invalid_argument("SeqSpec: length must be >= 1");
    }

    const SeqSpec& spec() const { return spec_; }

    State initial_state() const { return State{}; }

    bool is_terminal(const State& s) const {
        return static_cast<int>(s.symbols.size()) == spec_.length;
    }

    bool is_initial(const State& s) const { return s.symbols.empty(); }

    int num_actions() const { return spec_.vocab_size; }

    int max_trajectory_len() const { return spec_.length; }

    void legal_actions(const State& s, std::vector<int>& out) const {
        out.clear();
        if (is_terminal(s)) return;
        for (int v = 0; v < spec_.vocab_size; ++v) out.push_back(v);
    }

    void legal_back_actions(const State& s, std::vector<int>& out) const {
        out.clear();
        if (!s.symbols.empty()) out.push_back(s.symbols.back());
    }

    State apply(const State& s, int action) const {
        State n = s;
        n.symbols.push_back(static_cast<uint8_t>(action));
        return n;
    }

    State parent_via(const State& s, int /*back_action*/) const {
        State p = s;
        p.symbols.pop_back();
        return p;
    }

    std::vector<std::pair<int, State>> children(const State& s) const {
        if (is_terminal(s))
            throw std::invalid_argument("children: terminal state has no children");
        std::vector<std::pair<int, State>> out;
        out.reserve(spec_.vocab_size);
        for (int v = 0; v < spec_.vocab_size; ++v) out.emplace_back(v, apply(s, v));
        return out;
    }

    std::vector<std::pair<State, int>> parents(const State& s) const {
        if (s.symbols.empty())
            throw std::invalid_argument("parents: initial state has no parents");
        return {{parent_via(s, s.symbols.back()), s.symbols.back()}};
    }

    // one-hot per position with an extra padding symbol for unfilled slots
    int encoding_dim() const { return spec_.length * (spec_.vocab_size + 1); }

    void encode(const State& s, double* out) const {
        const int w = spec_.vocab_size + 1;
        std::fill(out, out + encoding_dim(), 0.0);
        for (int p = 0; p < spec_.length; ++p) {
            int sym = p < static_cast<int>(s.symbols.size()) ? s.symbols[p] : spec_.vocab_size;
            out[p * w + sym] = 1.0;
        }
    }

    std::string state_key(const State& s) const {
        return std::string(s.symbols.begin(), s.symbols.end());
    }

    // index of a terminal string in base-vocab_size (row-major)
    size_t cell_index(const State& s) const {
        size_t idx = 0;
        for (uint8_t v : s.symbols) idx = idx * spec_.vocab_size + v;
        return idx;
    }

    size_t num_cells() const {
        size_t n = 1;
        for (int p = 0; p < spec_.length; ++p) n *= spec_.vocab_size;
        return n;
    }

    std::vector<State> enumerate_terminals() const {
        std::vector<State> out;
        out.reserve(num_cells());
        State s;
        s.symbols.reserve(spec_.length);
        enumerate_rec(s, out);
        return out;
    }

    State terminal_from_cell(size_t idx) const {
        State s{std::vector<uint8_t>(spec_.length, 0)};
        for (int p = spec_.length - 1; p >= 0; --p) {
            s.symbols[p] = static_cast<uint8_t>(idx % spec_.vocab_size);
            idx /= spec_.vocab_size;
        }
        return s;
    }

    State random_terminal(Rng& rng) const {
        State s{std::vector<uint8_t>(spec_.length, 0)};
        for (int p = 0; p < spec_.length; ++p)
            s.symbols[p] = static_cast<uint8_t>(rng.uniform_index(spec_.vocab_size));
        return s;
    }

    // text form used by lookup-table files: one char per symbol, 0-9 then a-z
    static char symbol_char(int v) {
        return v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10);
    }

    static int symbol_value(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'z') return c - 'a' + 10;
        throw std::invalid_argument(std::string("bad sequence symbol '") + c + "'");
    }

    std::string to_text(const State& s) const {
        std::string t;
        t.reserve(s.symbols.size());
        for (uint8_t v : s.symbols) t.push_back(symbol_char(v));
        return t;
    }

    State from_text(const std::string& t) const {
        State s;
        s.symbols.reserve(t.size());
        for (char c : t) {
            int v = symbol_value(c);
            if (v >= spec_.vocab_size)
                throw std::invalid_argument("sequence symbol out of vocabulary: " + t);
            s.symbols.push_back(static_cast<uint8_t>(v));
        }
        return s;
    }

private:
    void enumerate_rec(State& s, std::vector<State>& out) const {
        if (is_terminal(s)) {
            out.push_back(s);
            return;
        }
        for (int v = 0; v < spec_.vocab_size; ++v) {
            s.symbols.push_back(static_cast<uint8_t>(v));
            enumerate_rec(s, out);
            s.symbols.pop_back();
        }
    }

    SeqSpec spec_;
};

} // namespace ocgfn::env
