#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

namespace accept {

inline std::string accept_dir() {
    const char* d = std::getenv("ACCEPT_DIR");
    return d && *d ? d : "acceptance_runs";
}

inline std::string cli_path() {
    const char* p = std::getenv("CLI_PATH");
    const bool has_cli = p != nullptr && *p != '\0';
    REQUIRE_MESSAGE(has_cli, "CLI_PATH must point at the ocgfn binary");
    return p;
}

inline int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args;
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

struct CsvRow {
    long step = 0;
    uint64_t seed = 0;
    std::string phase;
    std::optional<double> success_rate, top_k, l1, loss;
    std::optional<long> num_modes;
};

inline std::vector<CsvRow> read_metrics(const std::string& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), ("cannot open metrics csv: " + path).c_str());
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "step,seed,phase,success_rate,num_modes,top_k,l1,loss");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        cells.resize(8);
        CsvRow r;
        r.step = std::stol(cells[0]);
        r.seed = std::stoull(cells[1]);
        r.phase = cells[2];
        auto opt = [](const std::string& s) -> std::optional<double> {
            return s.empty() ? std::nullopt : std::optional<double>(std::stod(s));
        };
        r.success_rate = opt(cells[3]);
        if (!cells[4].empty()) r.num_modes = std::stol(cells[4]);
        r.top_k = opt(cells[5]);
        r.l1 = opt(cells[6]);
        r.loss = opt(cells[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string read_summary_value(const std::string& path, const std::string& key) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), ("cannot open summary: " + path).c_str());
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find(" = ");
        if (eq != std::string::npos && line.substr(0, eq) == key)
            return line.substr(eq + 3);
    }
    FAIL(("summary " + path + " has no key " + key).c_str());
    return "";
}

inline bool files_identical(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    REQUIRE(fa.good());
    REQUIRE(fb.good());
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return sa == sb;
}

// one pass/fail line per criterion clause
inline void report(const std::string& criterion, const std::string& what, bool ok) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", criterion.c_str(), what.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, (criterion + ": " + what).c_str());
}

// fixtures are idempotent: re-running ctest reuses finished artifacts
inline bool artifact_exists(const std::string& path) {
    return std::filesystem::exists(path);
}

} // namespace accept
