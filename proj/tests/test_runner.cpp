#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fracheat/runner.hpp"

using namespace fracheat;
using namespace fracheat::runner;

namespace {
const char* kTinyConfig =
    "# sampler validation at toy scale\n"
    "experiment = sampler-oracle\n"
    "alpha = 1.5\n"
    "L = 8\n"
    "grid_n = 256\n"
    "t = 0.25\n"
    "t_ext_factor = 1\n"
    "replicas = 400\n"
    "base_seed = 777\n"
    "eps_cells = 8\n";
}  // namespace

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config_text(kTinyConfig);
    CHECK(cfg.experiment == "sampler-oracle");
    CHECK(cfg.kv.at("alpha") == "1.5");
    CHECK(cfg.kv.count("experiment") == 0);

    CHECK_THROWS_AS(parse_config_text("alpha = 1.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("experiment = ratio\nfoo\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_config_text("experiment = ratio\nalpha = 1\nalpha = 2\n"),
        std::invalid_argument);
}

TEST_CASE("unknown keys and bad values give the config exit code") {
    RunConfig cfg = parse_config_text(kTinyConfig);
    cfg.out_dir = "/tmp/fracheat_test_out";
    cfg.kv["nonsense_key"] = "1";
    CHECK(run(cfg) == kConfigError);

    RunConfig zero = parse_config_text(kTinyConfig);
    zero.out_dir = "/tmp/fracheat_test_out";
    zero.kv["replicas"] = "0";
    CHECK(run(zero) == kConfigError);

    RunConfig unknown = parse_config_text(kTinyConfig);
    unknown.experiment = "no-such-experiment";
    CHECK(run(unknown) == kConfigError);
}

TEST_CASE("run writes hash-named artifacts and honors exit codes") {
    namespace fs = std::filesystem;
    const std::string dir = "/tmp/fracheat_test_out_run";
    fs::remove_all(dir);
    RunConfig cfg = parse_config_text(kTinyConfig);
    cfg.out_dir = dir;
    stats::ExperimentReport rep;
    const int code = run(cfg, &rep);
    CHECK(code == kPass);
    const std::string hash = config_hash(cfg);
    CHECK(fs::exists(fs::path(dir) / ("report_" + hash + ".json")));
    CHECK(fs::exists(fs::path(dir) / (hash + "_variance.csv")));

    // impossible tolerance: criteria fail -> exit 1
    RunConfig hard = cfg;
    hard.kv["rel_tolerance"] = "-1";  // threshold below any 3 SE band
    hard.kv["replicas"] = "60";
    CHECK(run(hard) == kCriteriaFail);
}

TEST_CASE("byte-identical reports modulo the runtime field") {
    RunConfig cfg = parse_config_text(kTinyConfig);
    cfg.kv["replicas"] = "80";
    cfg.out_dir = "/tmp/fracheat_test_out_det";
    stats::ExperimentReport a, b;
    run(cfg, &a);
    run(cfg, &b);
    CHECK(a.to_json(false) == b.to_json(false));
    CHECK(a.to_json(false).find("config_hash") != std::string::npos);
}

TEST_CASE("experiment catalogue") {
    const auto names = experiment_names();
    for (const char* want :
         {"ratio", "lil", "density", "clt", "variation", "localization",
          "localization-u", "holder"}) {
        bool found = false;
        for (const auto& n : names) found = found || n == want;
        CHECK(found);
    }
}
