#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ocgfn/harness/config.hpp"
#include "ocgfn/harness/metrics.hpp"
#include "ocgfn/harness/run.hpp"

using namespace ocgfn;
using namespace ocgfn::harness;

TEST_CASE("count_modes dedupes and applies the threshold") {
    SampleLog log(MetricsConfig{2.0, 100});
    CHECK(log.num_modes() == 0); // empty log
    log.add("x1", 2.5);
    log.add("x1", 2.5); // duplicate: ignored
    log.add("x2", 0.5);
    CHECK(log.num_modes() == 1);
    CHECK(log.num_distinct() == 2);
}

TEST_CASE("exhaustive sweep of the 16x16 grid counts the 16 ring cells") {
    env::GridEnv env(env::GridSpec{16, 2});
    SampleLog log(MetricsConfig{2.0, 100});
    for (const auto& x : env.enumerate_terminals()) log.add(env.state_key(x), env.reward(x));
    CHECK(log.num_modes() == 16);
}

TEST_CASE("top-k score averages the best distinct rewards") {
    SampleLog log(MetricsConfig{10.0, 2});
    log.add("a", 3.0);
    log.add("b", 2.0);
    log.add("c", 1.0);
    CHECK(log.top_k_score() == doctest::Approx(2.5)); // (3 + 2) / 2
    log.add("a", 100.0); // duplicate of the best state: counted once
    CHECK(log.top_k_score() == doctest::Approx(2.5));

    SampleLog small(MetricsConfig{10.0, 100});
    small.add("a", 3.0);
    small.add("b", 1.0);
    CHECK(small.top_k_score() == doctest::Approx(2.0)); // K exceeds log size
    SampleLog empty(MetricsConfig{10.0, 3});
    CHECK_THROWS_AS((void)empty.top_k_score(), std::invalid_argument);
}

TEST_CASE("mode counting is monotone over a growing log") {
    Rng rng(4);
    env::GridEnv env(env::GridSpec{16, 2});
    SampleLog log(MetricsConfig{2.0, 100});
    size_t prev = 0;
    for (int i = 0; i < 500; ++i) {
        auto x = env.random_terminal(rng);
        log.add(env.state_key(x), env.reward(x));
        CHECK(log.num_modes() >= prev);
        prev = log.num_modes();
    }
}

TEST_CASE("config presets pin the documented defaults") {
    auto bit = RunConfig::preset("bit-small");
    CHECK(bit.task == "seq");
    CHECK(bit.seq_vocab == 4);      // 2-bit words
    CHECK(bit.seq_length == 8);     // 16 bits / 2 bits per word
    CHECK(bit.lr == 5e-3);
    CHECK(bit.epsilon == 0.0005);
    CHECK(bit.iters == 50000);
    CHECK(bit.batch == 16);
    CHECK(bit.hidden == std::vector<int>{2048, 2048});
    CHECK(bit.activation == "relu");
    CHECK(bit.reward_beta == 3.0);

    auto grid = RunConfig::preset("grid-medium");
    CHECK(grid.grid_side == 16);
    CHECK(grid.lr == 1e-3);
    CHECK(grid.hidden == std::vector<int>{256, 256});
    CHECK(grid.activation == "leaky_relu");
    CHECK(grid.intrinsic_coef == 1.0);

    auto tfb = RunConfig::preset("tfbind-like");
    CHECK(tfb.lr == 1e-4);
    CHECK(tfb.epsilon == 0.001);
    CHECK(tfb.batch == 32);
    CHECK(tfb.iters == 5000);

    auto amp = RunConfig::preset("amp-like");
    CHECK(amp.seq_vocab == 20);
    CHECK(amp.seq_length == 50);
    CHECK(amp.epsilon == 0.01);
    CHECK(amp.lr == 1e-3);
    CHECK(amp.batch == 16);

    CHECK_THROWS_AS((void)RunConfig::preset("nope"), std::invalid_argument);
}

TEST_CASE("config parsing validates keys and values") {
    RunConfig cfg;
    cfg.set("grid.side", "12");
    CHECK(cfg.grid_side == 12);
    cfg.set("model.hidden", "64,32");
    CHECK(cfg.hidden == std::vector<int>{64, 32});
    cfg.set("seeds", "3,5,8");
    CHECK(cfg.seeds == std::vector<uint64_t>{3, 5, 8});
    CHECK_THROWS_AS(cfg.set("no.such.key", "1"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.set("opt.lr", "fast"), std::invalid_argument);

    cfg.set("explore.epsilon", "1.5");
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.set("explore.epsilon", "0.01");
    cfg.validate();
}

TEST_CASE("config files round trip through print/load") {
    auto cfg = RunConfig::preset("grid-small");
    cfg.set("train.iters", "123");
    cfg.set("seeds", "7");
    const std::string path = "test_config.txt";
    {
        std::ofstream out(path);
        out << "# comment line\n" << cfg.print();
    }
    RunConfig loaded;
    loaded.load_file(path);
    CHECK(loaded.print() == cfg.print());
    std::remove(path.c_str());
}

TEST_CASE("metrics csv writes the fixed header and empty absent fields") {
    const std::string path = "test_metrics.csv";
    {
        MetricsCsv csv(path);
        MetricsCsv::Row row;
        row.step = 10;
        row.seed = 3;
        row.phase = "pretrain";
        row.success_rate = 0.5;
        csv.write(row);
    }
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    CHECK(header == "step,seed,phase,success_rate,num_modes,top_k,l1,loss");
    CHECK(line == "10,3,pretrain,0.5,,,,");
    std::remove(path.c_str());
}

TEST_CASE("landscape mode rule counts centers under a sharp exponent") {
    RunConfig cfg = RunConfig::preset("tfbind-like");
    cfg.set("reward.landscape_seed", "9");
    cfg.set("reward.landscape_modes", "10");
    cfg.set("reward.landscape_decay", "0.35");
    cfg.set("reward.beta", "3");
    auto task = make_seq_task(cfg);
    const size_t truth = count_true_modes(task);
    // with decay 0.35 and beta 3, Hamming-1 neighbors fall below half of the
    // max reward, so the true modes are exactly the planted centers
    CHECK(truth == 10);
    for (const auto& c : task.seq_reward->centers())
        CHECK(task.is_mode(c, task.reward(c)));
}

TEST_CASE("oracle-check phase passes and writes its report") {
    RunConfig cfg;
    cfg.set("out", "test_oracle_out");
    const int rc = run_phase(Phase::oracle_check, cfg);
    CHECK(rc == 0);
    std::ifstream report("test_oracle_out/oracle_report.txt");
    REQUIRE(report.good());
    std::string text((std::istreambuf_iterator<char>(report)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("prop41.grid4") != std::string::npos);
    CHECK(text.find("prop41.seq4") != std::string::npos);
    CHECK(text.find("FAIL") == std::string::npos);
    std::filesystem::remove_all("test_oracle_out");
}
