#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csflow/braid.hpp"
#include "csflow/control.hpp"
#include "csflow/euler_channel.hpp"
#include "csflow/generalized_flow.hpp"
#include "csflow/planner.hpp"
#include "csflow/profile.hpp"

namespace csflow {

/// Malformed file content or schema violation.
class FormatError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure to read or write a file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSON: {"breakpoints":[0,...,1], "values":[...]}
std::string profile_to_json(const StepProfile& p);
StepProfile profile_from_json(std::string_view text);

// JSON array of {"op":"refine","k":2,"lambda":0.25} / {"op":"transpose","k":1} / {"op":"collide","k":3}
std::string moves_to_json(const std::vector<Move>& moves);
std::vector<Move> moves_from_json(std::string_view text);

// {"moves":[...], "achieved_error":..., "converged":...}
std::string plan_to_json(const Plan& plan);
Plan plan_from_json(std::string_view text);

/// Snapshot: header line "CSFLOW1 N1 N2 L t", then little-endian doubles:
/// physical vorticity (N2 rows of N1), then the N2 mean-profile values.
std::string snapshot_to_bytes(const FlowState& state);
FlowState snapshot_from_bytes(std::string_view bytes);

inline constexpr std::string_view kDiagnosticsHeader =
    "t,energy,momentum,enstrophy,m3,m4,linf_u,force_cost_accum";
std::string diagnostics_row(const Diagnostics& d, double force_cost_accum);

/// Schedule: header line "CSFORCE1 T n_samples N1 N2 L", then per sample
/// little-endian doubles: t, the curl coefficients (N2 x (N1/2+1) complex,
/// real then imaginary, sine layout), and the mean acceleration.
std::string schedule_to_bytes(const ForcingSchedule& s);
ForcingSchedule schedule_from_bytes(std::string_view bytes);

/// CSV with header particle,slice,x1,x2. The period is not part of the file.
std::string ensemble_to_csv(const TrajectoryEnsemble& e);
TrajectoryEnsemble ensemble_from_csv(std::string_view text, double length);

// {"word":[...], "permutation":[...], "winding":[[...]], "periodic_winding":[[...]]}
std::string braid_to_json(const BraidRecord& r);

std::string read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace csflow
