#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ergolang/simulate.hpp"

namespace ergolang {

std::string library_version();

std::uint64_t fnv1a(std::string_view data);

// Hash of the canonical serialized config, as fixed-width hex.
std::string config_hash_hex(const nlohmann::json& canonical);

// Deterministic formatting used by every CSV writer.
std::string format_double(double v);

// Creates parent directories and writes the file; throws OutputUnwritable.
void write_text_file(const std::string& path, const std::string& content);

// Trajectory CSV: "# seed=... config_hash=... version=..." then t,q,p,H rows
// (reduced) or t,q1,q2,p1,p2,H0 rows (full).
std::string trajectory_csv(const TrajectoryRecord& rec, const std::string& config_hash);
std::string trajectory_csv(const FullTrajectoryRecord& rec, const std::string& config_hash);

// Two-column-style overlay block for gnuplot: t, log mean H, log predicted.
std::string overlay_table(const std::vector<double>& t, const std::vector<double>& log_mean,
                          const std::vector<double>& log_predicted);

// Wraps an experiment's summary with the run metadata every report carries.
nlohmann::json report_envelope(const std::string& experiment, const std::string& config_hash,
                               std::uint64_t seed, double wall_time_s,
                               nlohmann::json payload);

}  // namespace ergolang
