#include "csflow/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace csflow {

namespace {

using nlohmann::json;

json parse(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
}

template <class T>
T get(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("wrong type for '") + key + "'");
    }
}

void only_keys(const json& j, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw FormatError("expected a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* a : keys) known = known || k == a;
        if (!known) throw FormatError("unknown key '" + k + "'");
    }
}

json profile_json(const StepProfile& p) {
    return {{"breakpoints", std::vector<double>(p.breakpoints().begin(), p.breakpoints().end())},
            {"values", std::vector<double>(p.values().begin(), p.values().end())}};
}

StepProfile profile_of(const json& j) {
    only_keys(j, {"breakpoints", "values"});
    try {
        return StepProfile(get<std::vector<double>>(j, "breakpoints"), get<std::vector<double>>(j, "values"));
    } catch (const FormatError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("invalid profile: ") + e.what());
    }
}

json move_json(const Move& m) {
    return std::visit(
        [](const auto& mv) -> json {
            using T = std::decay_t<decltype(mv)>;
            if constexpr (std::is_same_v<T, Refine>) {
                return {{"op", "refine"}, {"k", mv.k}, {"lambda", mv.lambda}};
            } else if constexpr (std::is_same_v<T, Transpose>) {
                return {{"op", "transpose"}, {"k", mv.k}};
            } else {
                return {{"op", "collide"}, {"k", mv.k}};
            }
        },
        m);
}

Move move_of(const json& j) {
    const auto op = get<std::string>(j, "op");
    const auto k = get<std::size_t>(j, "k");
    if (k == 0) throw FormatError("move index k is 1-based");
    if (op == "refine") {
        only_keys(j, {"op", "k", "lambda"});
        return Refine{k, get<double>(j, "lambda")};
    }
    only_keys(j, {"op", "k"});
    if (op == "transpose") return Transpose{k};
    if (op == "collide") return Collide{k};
    throw FormatError("unknown move op '" + op + "'");
}

// little-endian doubles
void put_f64(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.append(b, 8);
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : b_(bytes) {}

    std::string header_line() {
        const auto nl = b_.find('\n', pos_);
        if (nl == std::string_view::npos) throw FormatError("missing header line");
        std::string h(b_.substr(pos_, nl - pos_));
        pos_ = nl + 1;
        return h;
    }
    double f64() {
        if (pos_ + 8 > b_.size()) throw FormatError("truncated binary data");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }
    void expect_end() const {
        if (pos_ != b_.size()) throw FormatError("trailing bytes after data");
    }

private:
    std::string_view b_;
    std::size_t pos_ = 0;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Grid checked_grid(std::size_t n1, std::size_t n2, double length) {
    Grid g{n1, n2, length};
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("bad grid in header: ") + e.what());
    }
    return g;
}

}  // namespace

std::string profile_to_json(const StepProfile& p) { return profile_json(p).dump(); }

StepProfile profile_from_json(std::string_view text) { return profile_of(parse(text)); }

std::string moves_to_json(const std::vector<Move>& moves) {
    json a = json::array();
    for (const auto& m : moves) a.push_back(move_json(m));
    return a.dump();
}

std::vector<Move> moves_from_json(std::string_view text) {
    const json j = parse(text);
    if (!j.is_array()) throw FormatError("moves: expected a JSON array");
    std::vector<Move> out;
    for (const auto& m : j) out.push_back(move_of(m));
    return out;
}

std::string plan_to_json(const Plan& plan) {
    json a = json::array();
    for (const auto& m : plan.moves) a.push_back(move_json(m));
    return json{{"moves", a}, {"achieved_error", plan.achieved_error}, {"converged", plan.converged}}.dump(2);
}

Plan plan_from_json(std::string_view text) {
    const json j = parse(text);
    only_keys(j, {"moves", "achieved_error", "converged"});
    Plan p;
    if (!j.contains("moves") || !j["moves"].is_array()) throw FormatError("plan: 'moves' must be an array");
    for (const auto& m : j["moves"]) p.moves.push_back(move_of(m));
    p.achieved_error = get<double>(j, "achieved_error");
    p.converged = get<bool>(j, "converged");
    return p;
}

std::string snapshot_to_bytes(const FlowState& state) {
    ChannelSolver solver(state.grid);
    const auto w = solver.vorticity(state);
    const auto mean = solver.mean_profile(state);
    const Grid& g = state.grid;
    std::string out = "CSFLOW1 " + std::to_string(g.n1) + " " + std::to_string(g.n2) + " " + fmt(g.length) +
                      " " + fmt(state.t) + "\n";
    out.reserve(out.size() + 8 * (w.size() + mean.size()));
    for (double v : w) put_f64(out, v);
    for (double v : mean) put_f64(out, v);
    return out;
}

FlowState snapshot_from_bytes(std::string_view bytes) {
    Reader r(bytes);
    std::istringstream h(r.header_line());
    std::string magic;
    std::size_t n1 = 0, n2 = 0;
    double length = 0.0, t = 0.0;
    if (!(h >> magic >> n1 >> n2 >> length >> t) || magic != "CSFLOW1")
        throw FormatError("snapshot: bad header");
    const Grid g = checked_grid(n1, n2, length);
    std::vector<double> w(g.points()), mean(g.n2);
    for (double& v : w) v = r.f64();
    for (double& v : mean) v = r.f64();
    r.expect_end();
    ChannelSolver solver(g);
    return solver.state_from_fields(w, mean, t);
}

std::string diagnostics_row(const Diagnostics& d, double force_cost_accum) {
    return fmt(d.t) + "," + fmt(d.energy) + "," + fmt(d.momentum) + "," + fmt(d.enstrophy) + "," +
           fmt(d.moments[2]) + "," + fmt(d.moments[3]) + "," + fmt(d.linf_u) + "," + fmt(force_cost_accum);
}

std::string schedule_to_bytes(const ForcingSchedule& s) {
    s.validate();
    const Grid& g = s.grid();
    std::string out = "CSFORCE1 " + fmt(s.horizon) + " " + std::to_string(s.times.size()) + " " +
                      std::to_string(g.n1) + " " + std::to_string(g.n2) + " " + fmt(g.length) + "\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        put_f64(out, s.times[i]);
        for (const auto& c : s.fields[i].curl_hat) {
            put_f64(out, c.real());
            put_f64(out, c.imag());
        }
        put_f64(out, s.fields[i].mean_accel);
    }
    return out;
}

ForcingSchedule schedule_from_bytes(std::string_view bytes) {
    Reader r(bytes);
    std::istringstream h(r.header_line());
    std::string magic;
    double horizon = 0.0, length = 0.0;
    std::size_t samples = 0, n1 = 0, n2 = 0;
    if (!(h >> magic >> horizon >> samples >> n1 >> n2 >> length) || magic != "CSFORCE1")
        throw FormatError("schedule: bad header");
    const Grid g = checked_grid(n1, n2, length);
    // each sample needs 8 (2 modes + 2) bytes; reject absurd counts before allocating
    if (samples > bytes.size() / (8 * (2 * g.modes() + 2)) + 1) throw FormatError("schedule: truncated data");
    ForcingSchedule s;
    s.horizon = horizon;
    for (std::size_t i = 0; i < samples; ++i) {
        s.times.push_back(r.f64());
        ForceField f = ForceField::zero(g);
        for (auto& c : f.curl_hat) {
            const double re = r.f64();
            const double im = r.f64();
            c = cplx(re, im);
        }
        f.mean_accel = r.f64();
        s.fields.push_back(std::move(f));
    }
    r.expect_end();
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("schedule: ") + e.what());
    }
    return s;
}

std::string ensemble_to_csv(const TrajectoryEnsemble& e) {
    std::string out = "particle,slice,x1,x2\n";
    for (std::size_t i = 0; i < e.particles(); ++i)
        for (std::size_t s = 0; s < e.positions[i].size(); ++s)
            out += std::to_string(i) + "," + std::to_string(s) + "," + fmt(e.positions[i][s][0]) + "," +
                   fmt(e.positions[i][s][1]) + "\n";
    return out;
}

TrajectoryEnsemble ensemble_from_csv(std::string_view text, double length) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw FormatError("ensemble: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "particle,slice,x1,x2") throw FormatError("ensemble: header must be particle,slice,x1,x2");
    struct Row {
        std::size_t i, s;
        double x1, x2;
    };
    std::vector<Row> rows;
    std::size_t np = 0, ns = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Row r{};
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream ls(line);
        if (!(ls >> r.i >> c1 >> r.s >> c2 >> r.x1 >> c3 >> r.x2) || c1 != ',' || c2 != ',' || c3 != ',')
            throw FormatError("ensemble: bad row at line " + std::to_string(lineno));
        np = std::max(np, r.i + 1);
        ns = std::max(ns, r.s + 1);
        rows.push_back(r);
    }
    if (rows.size() != np * ns) throw FormatError("ensemble: expected one row per (particle, slice)");
    TrajectoryEnsemble e;
    e.length = length;
    e.positions.assign(np, std::vector<Point>(ns, Point{-1.0, -1.0}));
    std::vector<char> seen(np * ns, 0);
    for (const Row& r : rows) {
        if (seen[r.i * ns + r.s]) throw FormatError("ensemble: duplicate (particle, slice) row");
        seen[r.i * ns + r.s] = 1;
        e.positions[r.i][r.s] = {r.x1, r.x2};
    }
    try {
        e.validate();
    } catch (const std::invalid_argument& ex) {
        throw FormatError(std::string("ensemble: ") + ex.what());
    }
    return e;
}

std::string braid_to_json(const BraidRecord& r) {
    return json{{"word", r.word},
                {"permutation", r.permutation},
                {"winding", r.winding},
                {"periodic_winding", r.periodic_winding}}
        .dump();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

}  // namespace csflow
