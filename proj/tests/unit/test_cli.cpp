#include <filesystem>
#include <stdexcept>
#include <sstream>

#include "cli.hpp"
#include "csflow/io.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace csflow;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        dir = fs::temp_directory_path() / ("csflow_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        write_file_atomic(dir / "u.json", R"({"breakpoints":[0,0.5,1],"values":[1,-1]})");
        write_file_atomic(dir / "v.json", R"({"breakpoints":[0,0.5,1],"values":[-1,1]})");
    }
    ~Sandbox() { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }
};

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json manifest(const std::string& dir) {
    return nlohmann::json::parse(read_file(fs::path(dir) / "manifest.json"));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("sha256 known answer") {
    CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("plan writes a plan and a manifest") {
    Sandbox sb;
    const Result r = run({"--out-dir", sb.p("out"), "plan", "--source", sb.p("u.json"), "--target", sb.p("v.json")});
    REQUIRE(r.code == cli::kOk);
    const Plan p = plan_from_json(read_file(sb.p("out/plan.json")));
    CHECK(p.converged);
    const auto m = manifest(sb.p("out"));
    CHECK(m["subcommand"] == "plan");
    REQUIRE(m["artifacts"].size() == 1);
    CHECK(m["artifacts"][0]["sha256"] == cli::sha256_hex(read_file(sb.p("out/plan.json"))));
}

TEST_CASE("exit codes") {
    Sandbox sb;
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"plan", "--source", sb.p("u.json")}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({"--out-dir", sb.p("o"), "plan", "--source", sb.p("missing.json"), "--target", sb.p("v.json")}).code ==
          cli::kIo);
    write_file_atomic(sb.dir / "bad.json", R"({"breakpoints":[0,1],"values":[1],"color":"red"})");
    CHECK(run({"--out-dir", sb.p("o"), "plan", "--source", sb.p("bad.json"), "--target", sb.p("v.json")}).code ==
          cli::kUsage);
    write_file_atomic(sb.dir / "w.json", R"({"breakpoints":[0,0.5,1],"values":[2,-1]})");
    CHECK(run({"--out-dir", sb.p("o"), "plan", "--source", sb.p("u.json"), "--target", sb.p("w.json")}).code ==
          cli::kUsage);
    // blow-up: CFL far beyond the limit
    write_file_atomic(sb.dir / "fast.json", R"({"breakpoints":[0,0.5,1],"values":[50,-50]})");
    const Result num = run({"--out-dir", sb.p("num"), "simulate", "--profile", sb.p("fast.json"), "--n1", "16",
                            "--n2", "16", "--mollify-width", "0.3", "--dt", "0.5", "--T", "1"});
    CHECK(num.code == cli::kNumerical);
    CHECK_FALSE(fs::exists(sb.dir / "num" / "final.bin"));
}

TEST_CASE("config file: flags, precedence and unknown keys") {
    Sandbox sb;
    write_file_atomic(sb.dir / "c.json", nlohmann::json{{"schema_version", 1},
                                                        {"seed", 7},
                                                        {"out_dir", sb.p("cfg")},
                                                        {"plan", {{"source", sb.p("u.json")},
                                                                  {"target", sb.p("v.json")},
                                                                  {"eps", 1e-4}}}}
                                             .dump());
    REQUIRE(run({"--config", sb.p("c.json"), "plan"}).code == cli::kOk);
    CHECK(manifest(sb.p("cfg"))["seed"] == 7);
    REQUIRE(run({"--config", sb.p("c.json"), "--seed", "9", "plan"}).code == cli::kOk);
    CHECK(manifest(sb.p("cfg"))["seed"] == 9);

    write_file_atomic(sb.dir / "x.json", R"({"schema_version":1,"colour":2})");
    CHECK(run({"--config", sb.p("x.json"), "plan"}).code == cli::kUsage);
    write_file_atomic(sb.dir / "y.json", R"({"schema_version":2})");
    CHECK(run({"--config", sb.p("y.json"), "plan"}).code == cli::kUsage);
    write_file_atomic(sb.dir / "z.json", R"({"schema_version":1,"plan":{"sauce":1}})");
    CHECK(run({"--config", sb.p("z.json"), "plan", "--source", sb.p("u.json"), "--target", sb.p("v.json")}).code ==
          cli::kUsage);
}

TEST_CASE("same config and seed, same manifest") {
    Sandbox sb;
    auto go = [&](const std::string& out) {
        return run({"--seed", "3", "--out-dir", sb.p(out), "control", "--profile", sb.p("u.json"), "--mode",
                    "transpose", "--T", "2", "--T", "4", "--n1", "16", "--n2", "32"});
    };
    REQUIRE(go("a").code == cli::kOk);
    REQUIRE(go("b").code == cli::kOk);
    CHECK(read_file(sb.p("a/manifest.json")) == read_file(sb.p("b/manifest.json")));
    CHECK(manifest(sb.p("a"))["artifacts"].size() == 6);

    REQUIRE(run({"--out-dir", sb.p("a"), "report"}).code == cli::kOk);
    const std::string csv = read_file(sb.p("a/report.csv"));
    CHECK(csv.rfind("T,cost,endpoint_error,field_error\n2,", 0) == 0);
}

TEST_CASE("simulate replays a control schedule") {
    Sandbox sb;
    REQUIRE(run({"--out-dir", sb.p("c"), "control", "--profile", sb.p("u.json"), "--mode", "ramp", "--target",
                 sb.p("v.json"), "--T", "2", "--n1", "16", "--n2", "32"})
                .code == cli::kOk);
    const Result r = run({"--out-dir", sb.p("s"), "simulate", "--profile", sb.p("u.json"), "--n1", "16", "--n2",
                          "32", "--mollify-width", "0.5", "--T", "2", "--dt", "0.01", "--schedule",
                          sb.p("c/schedule_T2.bin")});
    REQUIRE(r.code == cli::kOk);
    const FlowState end = snapshot_from_bytes(read_file(sb.p("s/final.bin")));
    CHECK(mean_profile_distance(end, StepProfile::uniform({-1.0, 1.0}), 0.5) <= 1e-10);
    const std::string diag = read_file(sb.p("s/diagnostics.csv"));
    CHECK(diag.rfind(std::string(kDiagnosticsHeader), 0) == 0);
}

TEST_CASE("braid subcommand") {
    Sandbox sb;
    TrajectoryEnsemble e;
    e.length = 1.0;
    e.positions = {{{0.2, 0.5}, {0.55, 0.3}, {0.8, 0.5}}, {{0.8, 0.5}, {0.45, 0.7}, {0.2, 0.5}}};
    write_file_atomic(sb.dir / "e.csv", ensemble_to_csv(e));
    write_file_atomic(sb.dir / "r.csv", ensemble_to_csv(parallel_flow_ensemble({2, 1, 1.0}, {0.0}, 1.0, 2)));
    REQUIRE(run({"--out-dir", sb.p("b"), "braid", "--in", sb.p("e.csv"), "--ref", sb.p("r.csv"), "--length", "1"})
                .code == cli::kOk);
    const auto j = nlohmann::json::parse(read_file(sb.p("b/braid.json")));
    CHECK(j["word"] == nlohmann::json::array({1}));
    CHECK(j["verdict"] == "distinct");
}

}
