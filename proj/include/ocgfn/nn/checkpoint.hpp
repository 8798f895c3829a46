#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ocgfn/nn/adam.hpp"
#include "ocgfn/nn/mlp.hpp"

namespace ocgfn::nn {

// Versioned text checkpoint. Doubles are written as C hexfloats, so a
// save/load round trip is bit-exact. Layout:
//
//   ocgfn-ckpt 1
//   net <name>
//   sizes <n> <s0> ... <sn-1>
//   activation <leaky_relu|relu>
//   params <count>
//   <hexfloat> ...            (8 per line)
//   adam <lr> <beta1> <beta2> <eps> <step>
//   <m hexfloats> ...
//   <v hexfloats> ...
//   scalar <name> <hexfloat>
//   end
class CheckpointWriter {
public:
    explicit CheckpointWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write checkpoint: " + path);
        out_ << "ocgfn-ckpt 1\n";
    }

    void add_net(const std::string& name, const Mlp& net, const AdamState* opt = nullptr) {
        out_ << "net " << name << "\n";
        out_ << "sizes " << net.layer_sizes().size();
        for (int s : net.layer_sizes()) out_ << " " << s;
        out_ << "\n";
        out_ << "activation " << activation_name(net.activation()) << "\n";
        out_ << "params " << net.params().size() << "\n";
        write_doubles(net.params());
        if (opt) {
            out_ << "adam " << hex(opt->lr) << " " << hex(opt->beta1) << " " << hex(opt->beta2)
                 << " " << hex(opt->eps) << " " << opt->step << "\n";
            write_doubles(opt->m);
            write_doubles(opt->v);
        }
    }

    void add_scalar(const std::string& name, double value) {
        out_ << "scalar " << name << " " << hex(value) << "\n";
    }

    void finish() {
        out_ << "end\n";
        out_.close();
        if (!out_) throw std::runtime_error("checkpoint write failed");
    }

private:
    static std::string hex(double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%a", v);
        return buf;
    }

    void write_doubles(const std::vector<double>& vs) {
        for (size_t i = 0; i < vs.size(); ++i)
            out_ << hex(vs[i]) << ((i % 8 == 7 || i + 1 == vs.size()) ? "\n" : " ");
    }

    std::ofstream out_;
};

class CheckpointReader {
public:
    explicit CheckpointReader(const std::string& path) : in_(path), path_(path) {
        if (!in_) throw std::runtime_error("cannot open checkpoint: " + path);
        std::string header;
        std::getline(in_, header);
        if (header != "ocgfn-ckpt 1")
            throw std::runtime_error("unsupported checkpoint format in " + path);
        index_nets();
    }

    bool has_net(const std::string& name) const { return nets_.count(name) > 0; }

    // loads parameters (and optimizer state when present) into an existing
    // net; layer sizes and activation must match
    void load_net(const std::string& name, Mlp& net, AdamState* opt = nullptr) {
        auto it = nets_.find(name);
        if (it == nets_.end())
            throw std::runtime_error("checkpoint " + path_ + " has no net '" + name + "'");
        std::istringstream ss(it->second);
        std::string tok;
        ss >> tok; // sizes
        size_t nsizes;
        ss >> nsizes;
        std::vector<int> sizes(nsizes);
        for (auto& s : sizes) ss >> s;
        if (sizes != net.layer_sizes())
            throw std::runtime_error("checkpoint net '" + name + "' has mismatched layer sizes");
        ss >> tok; // activation
        std::string act;
        ss >> act;
        if (activation_from_name(act) != net.activation())
            throw std::runtime_error("checkpoint net '" + name + "' has mismatched activation");
        ss >> tok; // params
        size_t count;
        ss >> count;
        if (count != net.params().size())
            throw std::runtime_error("checkpoint net '" + name + "' has mismatched param count");
        read_doubles(ss, net.params(), count);
        if (ss >> tok && tok == "adam") {
            AdamState tmp;
            std::string lr, b1, b2, eps;
            ss >> lr >> b1 >> b2 >> eps >> tmp.step;
            tmp.lr = parse(lr);
            tmp.beta1 = parse(b1);
            tmp.beta2 = parse(b2);
            tmp.eps = parse(eps);
            tmp.m.resize(count);
            tmp.v.resize(count);
            read_doubles(ss, tmp.m, count);
            read_doubles(ss, tmp.v, count);
            if (opt) *opt = std::move(tmp);
        }
    }

    double scalar(const std::string& name) const {
        auto it = scalars_.find(name);
        if (it == scalars_.end())
            throw std::runtime_error("checkpoint " + path_ + " has no scalar '" + name + "'");
        return it->second;
    }

    bool has_scalar(const std::string& name) const { return scalars_.count(name) > 0; }

private:
    static double parse(const std::string& s) {
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str()) throw std::runtime_error("bad number in checkpoint: " + s);
        return v;
    }

    static void read_doubles(std::istringstream& ss, std::vector<double>& out, size_t count) {
        std::string tok;
        for (size_t i = 0; i < count; ++i) {
            if (!(ss >> tok)) throw std::runtime_error("checkpoint truncated");
            out[i] = parse(tok);
        }
    }

    void index_nets() {
        std::string line, current_name, body;
        auto flush = [&] {
            if (!current_name.empty()) nets_[current_name] = body;
            current_name.clear();
            body.clear();
        };
        while (std::getline(in_, line)) {
            if (line.rfind("net ", 0) == 0) {
                flush();
                current_name = line.substr(4);
            } else if (line.rfind("scalar ", 0) == 0) {
                std::istringstream ss(line.substr(7));
                std::string name, val;
                ss >> name >> val;
                scalars_[name] = parse(val);
            } else if (line == "end") {
                flush();
            } else {
                body += line;
                body += "\n";
            }
        }
        flush();
    }

    std::ifstream in_;
    std::string path_;
    std::unordered_map<std::string, std::string> nets_;
    std::unordered_map<std::string, double> scalars_;
};

} // namespace ocgfn::nn
