#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <regex>

#include "CLI11.hpp"
#include "csflow/braid.hpp"
#include "csflow/control.hpp"
#include "csflow/euler_channel.hpp"
#include "csflow/generalized_flow.hpp"
#include "csflow/io.hpp"
#include "csflow/planner.hpp"
#include "json.hpp"

namespace csflow::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kSchemaVersion = 1;

// Artifacts are collected here and written only after the run succeeded.
struct Outputs {
    std::vector<std::pair<std::string, std::string>> files;  // name, bytes
    void add(std::string name, std::string bytes) { files.emplace_back(std::move(name), std::move(bytes)); }
};

struct Globals {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string config;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// ---- config -------------------------------------------------------------

std::string flag_of(const std::string& key) {
    std::string f = "--" + key;
    std::replace(f.begin(), f.end(), '_', '-');
    return f;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

void append_value(std::vector<std::string>& out, const std::string& flag, const json& v) {
    auto scalar = [](const json& x) -> std::string {
        if (x.is_string()) return x.get<std::string>();
        if (x.is_boolean()) return x.get<bool>() ? "true" : "false";
        if (x.is_number_integer()) return std::to_string(x.get<long long>());
        if (x.is_number()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", x.get<double>());
            return buf;
        }
        throw FormatError("config: unsupported value for " + x.dump());
    };
    if (v.is_array()) {
        for (const auto& x : v) {
            out.push_back(flag);
            out.push_back(scalar(x));
        }
    } else if (v.is_boolean()) {
        if (v.get<bool>()) out.push_back(flag);
    } else {
        out.push_back(flag);
        out.push_back(scalar(v));
    }
}

// Expands --config into explicit flags. Returns the rewritten argument list.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& subcommands) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw FormatError("config: expected a JSON object");
    if (!cfg.contains("schema_version") || cfg["schema_version"] != kSchemaVersion)
        throw FormatError("config: schema_version must be " + std::to_string(kSchemaVersion));

    auto sub = std::find_first_of(args.begin(), args.end(), subcommands.begin(), subcommands.end());
    std::vector<std::string> globals, locals;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "schema_version") continue;
        if (key == "seed" || key == "out_dir") {
            if (!given(args, flag_of(key))) append_value(globals, flag_of(key), value);
            continue;
        }
        if (std::find(subcommands.begin(), subcommands.end(), key) == subcommands.end())
            throw FormatError("config: unknown key '" + key + "'");
        if (sub == args.end() || *sub != key) continue;  // section for another subcommand
        if (!value.is_object()) throw FormatError("config: section '" + key + "' must be an object");
        for (const auto& [k, v] : value.items())
            if (!given(args, flag_of(k))) append_value(locals, flag_of(k), v);
    }
    std::vector<std::string> out(args.begin(), sub == args.end() ? args.end() : sub + 1);
    out.insert(out.begin(), globals.begin(), globals.end());
    out.insert(out.end(), locals.begin(), locals.end());
    if (sub != args.end()) out.insert(out.end(), sub + 1, args.end());
    return out;
}

// ---- shared option groups ----------------------------------------------

struct GridFlags {
    std::size_t n1 = 64, n2 = 64;
    double length = 2.0;
    void add(CLI::App* app) {
        app->add_option("--n1", n1, "grid points along the channel")->capture_default_str();
        app->add_option("--n2", n2, "grid points across the channel")->capture_default_str();
        app->add_option("--length", length, "channel period L")->capture_default_str();
    }
    Grid grid() const { return Grid{n1, n2, length}; }
};

StepProfile load_profile(const std::string& path) { return profile_from_json(read_file(path)); }

std::string diagnostics_csv(const std::vector<Diagnostics>& d, const std::vector<double>& cost) {
    std::string out(kDiagnosticsHeader);
    out += "\n";
    for (std::size_t i = 0; i < d.size(); ++i) out += diagnostics_row(d[i], cost[i]) + "\n";
    return out;
}

// ---- plan ----------------------------------------------------------------

struct PlanCmd {
    std::string source, target, out = "plan.json";
    double eps = 1e-3;
    std::size_t budget = 0;

    void add(CLI::App* app) {
        app->add_option("--source", source, "source profile JSON")->required();
        app->add_option("--target", target, "target profile JSON")->required();
        app->add_option("--eps", eps, "L2 tolerance")->capture_default_str();
        app->add_option("--budget", budget, "move cap (0: 10 K^2)")->capture_default_str();
        app->add_option("--out", out, "plan file name inside the output directory")->capture_default_str();
    }

    void run(const Globals& g, Outputs& o) const {
        PlanOptions opt;
        opt.eps = eps;
        opt.budget = budget;
        opt.seed = g.seed;
        const Plan p = plan(load_profile(source), load_profile(target), opt);
        o.add(out, plan_to_json(p) + "\n");
    }
};

// ---- simulate ------------------------------------------------------------

struct SimulateCmd {
    GridFlags grid;
    std::string profile, snapshot, schedule;
    double mollify_width = 0.05, horizon = 1.0, dt = 0.01;
    std::size_t diag_every = 10;

    void add(CLI::App* app) {
        grid.add(app);
        auto* p = app->add_option("--profile", profile, "initial step profile JSON");
        auto* s = app->add_option("--snapshot", snapshot, "initial CSFLOW1 snapshot");
        p->excludes(s);
        app->add_option("--schedule", schedule, "CSFORCE1 forcing schedule (optional)");
        app->add_option("--mollify-width", mollify_width, "mollifier width for --profile")->capture_default_str();
        app->add_option("--T", horizon, "simulated time")->capture_default_str();
        app->add_option("--dt", dt, "maximum time step")->capture_default_str();
        app->add_option("--diag-every", diag_every, "steps between diagnostics rows")->capture_default_str();
    }

    void run(const Globals&, Outputs& o, std::ostream& err) const {
        if (profile.empty() == snapshot.empty())
            throw FormatError("simulate: give exactly one of --profile and --snapshot");
        if (!(horizon > 0.0) || !(dt > 0.0)) throw FormatError("simulate: --T and --dt must be positive");
        FlowState state = snapshot.empty() ? from_profile(load_profile(profile), mollify_width, grid.grid())
                                           : snapshot_from_bytes(read_file(snapshot));
        std::optional<ForcingSchedule> sched;
        if (!schedule.empty()) {
            sched = schedule_from_bytes(read_file(schedule));
            if (sched->grid() != state.grid) throw FormatError("simulate: schedule grid differs from the state");
            if (horizon > sched->horizon) throw FormatError("simulate: --T exceeds the schedule horizon");
        }
        ChannelSolver solver(state.grid);
        const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
        const double h = horizon / static_cast<double>(steps);
        const double t0 = state.t;
        ForceField f;
        auto force_norm = [&](double t) {
            if (!sched) return 0.0;
            sched->at(t, f);
            return f.norm();
        };
        std::vector<Diagnostics> diag{solver.diagnostics(state)};
        std::vector<double> cost{0.0};
        double accum = 0.0;
        try {
            for (std::size_t i = 0; i < steps; ++i) {
                const double a = static_cast<double>(i) * h;
                if (sched) {
                    solver.step(state, h, [&](double t, ForceField& out) { sched->at(std::min(t - t0, sched->horizon), out); });
                } else {
                    solver.step(state, h);
                }
                accum += 0.5 * h * (force_norm(a) + force_norm(std::min(a + h, horizon)));
                if ((i + 1) % std::max<std::size_t>(diag_every, 1) == 0 || i + 1 == steps) {
                    diag.push_back(solver.diagnostics(state));
                    cost.push_back(accum);
                }
            }
        } catch (const NumericalError&) {
            err << diagnostics_csv(diag, cost);
            err.flush();
            throw;
        }
        o.add("final.bin", snapshot_to_bytes(state));
        o.add("diagnostics.csv", diagnostics_csv(diag, cost));
    }
};

// ---- control -------------------------------------------------------------

struct ControlCmd {
    GridFlags grid;
    std::string mode = "transpose", profile, target;
    std::size_t k = 1, basis = 4, max_evals = 40;
    std::vector<double> horizons{100.0};
    double amplitude = 0.5, mollify_width = 0.5, dt = 0.0125, sample_dt = 0.1, penalty = 1e4;

    void add(CLI::App* app) {
        grid.n1 = grid.n2 = 32;
        grid.add(app);
        app->add_option("--mode", mode, "ramp | transpose | collide | optimize")
            ->check(CLI::IsMember({"ramp", "transpose", "collide", "optimize"}))
            ->capture_default_str();
        app->add_option("--profile", profile, "source step profile JSON")->required();
        app->add_option("--target", target, "target profile JSON (ramp, optimize)");
        app->add_option("--k", k, "layer index (1-based)")->capture_default_str();
        app->add_option("--T", horizons, "horizon; repeat for a ladder")->capture_default_str();
        app->add_option("--amplitude", amplitude, "cell amplitude")->capture_default_str();
        app->add_option("--mollify-width", mollify_width, "mollifier width")->capture_default_str();
        app->add_option("--dt", dt, "maximum replay step")->capture_default_str();
        app->add_option("--sample-dt", sample_dt, "maximum schedule sample spacing")->capture_default_str();
        app->add_option("--basis", basis, "optimize: time basis size")->capture_default_str();
        app->add_option("--penalty", penalty, "optimize: endpoint penalty")->capture_default_str();
        app->add_option("--max-evals", max_evals, "optimize: solver runs")->capture_default_str();
    }

    void run(const Globals& g, Outputs& o) const {
        ControlOptions opt;
        opt.grid = grid.grid();
        opt.mollify_width = mollify_width;
        opt.solver_dt = dt;
        opt.sample_dt = sample_dt;
        const StepProfile p = load_profile(profile);
        StepProfile v = p;
        if (mode == "transpose") {
            v = apply_move(p, Transpose{k});
        } else if (mode == "collide") {
            v = apply_move(p, Collide{k});
        } else {
            if (target.empty()) throw FormatError("control: --target is required for mode " + mode);
            v = load_profile(target);
        }
        for (double T : horizons) {
            ForcingSchedule s;
            std::size_t evals = 0;
            if (mode == "ramp") {
                s = baseline_ramp(p, v, T, opt);
            } else if (mode == "transpose") {
                s = transposition_control(p, k, T, amplitude, opt);
            } else if (mode == "collide") {
                s = collision_control(p, k, T, amplitude, opt);
            } else {
                OptimizeOptions oo;
                oo.max_evaluations = max_evals;
                auto r = optimize_schedule(p, v, T, basis, penalty, g.seed, opt, nullptr, oo);
                s = std::move(r.schedule);
                evals = r.evaluations;
            }
            const TransferReport rep = verify_transfer(p, s, v, opt);
            const std::string tag = "T" + num(T);
            json j = {{"mode", mode},         {"T", T},
                      {"k", k},               {"amplitude", amplitude},
                      {"cost", rep.cost},     {"endpoint_error", rep.endpoint_error},
                      {"field_error", rep.field_error}, {"steps", rep.steps},
                      {"target_norm", std::sqrt(2.0 * energy(v))}};
            if (mode == "optimize") j["evaluations"] = evals;
            o.add("schedule_" + tag + ".bin", schedule_to_bytes(s));
            o.add("transfer_" + tag + ".json", j.dump(2) + "\n");
            o.add("diagnostics_" + tag + ".csv", diagnostics_csv(rep.diagnostics, rep.cost_accum));
        }
    }
};

// ---- braid ---------------------------------------------------------------

struct BraidCmd {
    std::string in, ref;
    double length = 1.0;

    void add(CLI::App* app) {
        app->add_option("--in", in, "ensemble CSV (particle,slice,x1,x2)")->required();
        app->add_option("--ref", ref, "reference ensemble CSV");
        app->add_option("--length", length, "period in x1")->capture_default_str();
    }

    void run(const Globals&, Outputs& o) const {
        const BraidRecord a = braid_word(ensemble_from_csv(read_file(in), length));
        json j = json::parse(braid_to_json(a));
        if (!ref.empty()) {
            const BraidRecord b = braid_word(ensemble_from_csv(read_file(ref), length));
            const auto c = isotopy_invariants_equal(a, b);
            j["reference"] = json::parse(braid_to_json(b));
            j["verdict"] = to_string(c.verdict);
            j["differs"] = {{"permutation", c.permutation_differs},
                            {"writhe", c.writhe_differs},
                            {"winding", c.winding_differs},
                            {"periodic_winding", c.periodic_winding_differs}};
            j["reduced_words_equal"] = c.reduced_words_equal;
        }
        o.add("braid.json", j.dump(2) + "\n");
    }
};

// ---- report --------------------------------------------------------------

struct ReportCmd {
    std::string in;

    void add(CLI::App* app) {
        app->add_option("--in", in, "directory with transfer_T*.json (default: the output directory)");
    }

    void run(const Globals& g, Outputs& o) const {
        const fs::path dir = in.empty() ? fs::path(g.out_dir) : fs::path(in);
        if (!fs::is_directory(dir)) throw IoError("report: no directory " + dir.string());
        static const std::regex name(R"(transfer_T.*\.json)");
        std::vector<json> rows;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!std::regex_match(entry.path().filename().string(), name)) continue;
            json j;
            try {
                j = json::parse(read_file(entry.path()));
                rows.push_back({{"T", j.at("T").get<double>()},
                                {"cost", j.at("cost").get<double>()},
                                {"endpoint_error", j.at("endpoint_error").get<double>()},
                                {"field_error", j.at("field_error").get<double>()}});
            } catch (const json::exception& e) {
                throw FormatError("report: bad " + entry.path().filename().string() + ": " + e.what());
            }
        }
        if (rows.empty()) throw FormatError("report: no transfer_T*.json in " + dir.string());
        std::sort(rows.begin(), rows.end(), [](const json& a, const json& b) { return a["T"] < b["T"]; });
        std::string csv = "T,cost,endpoint_error,field_error\n";
        char buf[128];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r["T"].get<double>(),
                          r["cost"].get<double>(), r["endpoint_error"].get<double>(),
                          r["field_error"].get<double>());
            csv += buf;
        }
        o.add("report.csv", csv);
    }
};

void commit(const Globals& g, const std::string& sub, const Outputs& o) {
    const fs::path dir(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    json arts = json::array();
    for (const auto& [name, bytes] : o.files)
        arts.push_back({{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
    const json manifest = {{"schema_version", kSchemaVersion}, {"subcommand", sub}, {"seed", g.seed}, {"artifacts", arts}};
    for (const auto& [name, bytes] : o.files) write_file_atomic(dir / name, bytes);
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

int run_cli(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
    const std::vector<std::string> subs{"plan", "simulate", "control", "braid", "report"};
    Globals g;
    PlanCmd plan_cmd;
    SimulateCmd sim_cmd;
    ControlCmd ctl_cmd;
    BraidCmd braid_cmd;
    ReportCmd report_cmd;

    CLI::App app{"csflow: shear-flow control laboratory"};
    app.name("csflow");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for artifacts")->capture_default_str();
    app.add_option("--config", g.config, "JSON run configuration");
    plan_cmd.add(app.add_subcommand("plan", "connect two step profiles by conservative moves"));
    sim_cmd.add(app.add_subcommand("simulate", "run the channel solver"));
    ctl_cmd.add(app.add_subcommand("control", "build and verify forcing schedules"));
    braid_cmd.add(app.add_subcommand("braid", "braid word and invariants of an ensemble"));
    report_cmd.add(app.add_subcommand("report", "tabulate control runs"));

    try {
        std::vector<std::string> args = expand_config(raw, subs);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    Outputs o;
    try {
        if (sub == "plan") plan_cmd.run(g, o);
        if (sub == "simulate") sim_cmd.run(g, o, err);
        if (sub == "control") ctl_cmd.run(g, o);
        if (sub == "braid") braid_cmd.run(g, o);
        if (sub == "report") report_cmd.run(g, o);
        commit(g, sub, o);
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    for (const auto& [name, bytes] : o.files) out << name << "\n";
    return kOk;
}

}  // namespace csflow::cli
