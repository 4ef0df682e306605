#include <cstring>
#include <stdexcept>
#include <filesystem>

#include "csflow/io.hpp"
#include "doctest.h"

using namespace csflow;

TEST_SUITE("io") {

TEST_CASE("profile JSON round trip and schema checks") {
    const StepProfile p({0.0, 1.0 / 3.0, 1.0}, {0.1, -2.5});
    CHECK(profile_from_json(profile_to_json(p)) == p);
    CHECK_THROWS_AS(profile_from_json(R"({"breakpoints":[0,1],"values":[1],"extra":1})"), FormatError);
    CHECK_THROWS_AS(profile_from_json(R"({"breakpoints":[0,1]})"), FormatError);
    CHECK_THROWS_AS(profile_from_json(R"({"breakpoints":[0,0.5],"values":[1]})"), FormatError);
    CHECK_THROWS_AS(profile_from_json("not json"), FormatError);
}

TEST_CASE("moves and plans") {
    const std::vector<Move> m{Refine{2, 0.25}, Transpose{1}, Collide{3}};
    CHECK(moves_from_json(moves_to_json(m)) == m);
    CHECK_THROWS_AS(moves_from_json(R"([{"op":"flip","k":1}])"), FormatError);
    CHECK_THROWS_AS(moves_from_json(R"([{"op":"transpose","k":1,"lambda":0.5}])"), FormatError);
    CHECK_THROWS_AS(moves_from_json(R"([{"op":"transpose","k":0}])"), FormatError);

    Plan p;
    p.moves = m;
    p.achieved_error = 1.25e-4;
    p.converged = true;
    const Plan q = plan_from_json(plan_to_json(p));
    CHECK(q.moves == p.moves);
    CHECK(q.achieved_error == p.achieved_error);
    CHECK(q.converged);
}

TEST_CASE("snapshot round trip") {
    const Grid g{16, 8, 1.5};
    FlowState s = from_profile(StepProfile::uniform({1.0, -1.0}), 0.3, g);
    s.omega_hat[g.half() + 2] = {0.1, -0.05};
    s.t = 2.5;
    const std::string bytes = snapshot_to_bytes(s);
    CHECK(bytes.rfind("CSFLOW1 16 8 ", 0) == 0);
    const FlowState r = snapshot_from_bytes(bytes);
    CHECK(r.grid == g);
    CHECK(r.t == 2.5);
    CHECK(r.bulk == doctest::Approx(s.bulk).scale(1.0));
    for (std::size_t i = 0; i < s.omega_hat.size(); ++i) CHECK(std::abs(r.omega_hat[i] - s.omega_hat[i]) <= 1e-13);
    CHECK_THROWS_AS(snapshot_from_bytes(bytes.substr(0, bytes.size() - 8)), FormatError);
    CHECK_THROWS_AS(snapshot_from_bytes("CSFLOW2 16 8 1.5 0\n"), FormatError);
}

TEST_CASE("schedule round trip is exact") {
    const Grid g{8, 8, 2.0};
    ForcingSchedule s = baseline_ramp(StepProfile::uniform({1.0, -1.0}), StepProfile::uniform({-1.0, 1.0}), 3.0,
                                      {.grid = g, .mollify_width = 0.5});
    s.fields[1].curl_hat[g.half() + 1] = {0.25, 0.125};
    s.fields[0].mean_accel = 0.5;
    const ForcingSchedule r = schedule_from_bytes(schedule_to_bytes(s));
    CHECK(r.horizon == s.horizon);
    CHECK(r.times == s.times);
    REQUIRE(r.fields.size() == s.fields.size());
    for (std::size_t k = 0; k < s.fields.size(); ++k) {
        CHECK(r.fields[k].curl_hat == s.fields[k].curl_hat);
        CHECK(r.fields[k].mean_accel == s.fields[k].mean_accel);
    }
    std::string bad = schedule_to_bytes(s);
    bad.pop_back();
    CHECK_THROWS_AS(schedule_from_bytes(bad), FormatError);
}

TEST_CASE("ensemble CSV round trip") {
    const auto e = parallel_flow_ensemble({3, 2, 2.0}, {0.25, -0.125}, 1.0, 3);
    const std::string csv = ensemble_to_csv(e);
    CHECK(csv.rfind("particle,slice,x1,x2\n", 0) == 0);
    const auto r = ensemble_from_csv(csv, 2.0);
    CHECK(r.positions == e.positions);
    CHECK_THROWS_AS(ensemble_from_csv("particle,slice,x1,x2\n0,0,0.1\n", 1.0), FormatError);
    CHECK_THROWS_AS(ensemble_from_csv("p,s,a,b\n", 1.0), FormatError);
}

TEST_CASE("diagnostics rows have one field per header column") {
    Diagnostics d;
    d.t = 1.0;
    d.energy = 0.5;
    const std::string row = diagnostics_row(d, 0.25);
    const auto commas = [](std::string_view s) { return std::count(s.begin(), s.end(), ','); };
    CHECK(commas(row) == commas(kDiagnosticsHeader));
}

TEST_CASE("braid JSON keys") {
    BraidRecord r;
    r.strands = 2;
    r.word = {1};
    r.permutation = {1, 0};
    r.winding = {{0.0, 0.5}, {0.5, 0.0}};
    r.periodic_winding = {{0, 0}, {0, 0}};
    const std::string j = braid_to_json(r);
    for (const char* key : {"\"word\"", "\"permutation\"", "\"winding\"", "\"periodic_winding\""})
        CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("atomic write and read back") {
    const auto dir = std::filesystem::temp_directory_path() / "csflow_io_test";
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "a.txt", "first");
    write_file_atomic(dir / "a.txt", "second");
    CHECK(read_file(dir / "a.txt") == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
    CHECK_THROWS_AS(read_file(dir / "missing"), IoError);
    CHECK_THROWS_AS(write_file_atomic(dir / "no" / "such" / "dir.txt", "x"), IoError);
    std::filesystem::remove_all(dir);
}

}
