#include "ergolang/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ergolang/errors.hpp"

namespace ergolang {

std::string library_version() { return "0.1.0"; }

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string config_hash_hex(const nlohmann::json& canonical) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical.dump())));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw OutputUnwritable("cannot open for writing: " + path);
    out << content;
    if (!out) throw OutputUnwritable("write failed: " + path);
}

namespace {

std::string csv_header(std::uint64_t master_seed, std::uint64_t path_index,
                       const std::string& config_hash) {
    std::string s = "# seed=" + std::to_string(master_seed) +
                    " path=" + std::to_string(path_index) + " config_hash=" + config_hash +
                    " version=" + library_version() + "\n";
    return s;
}

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& rec, const std::string& config_hash) {
    std::string s = csv_header(rec.master_seed, rec.path_index, config_hash);
    s += "t,q,p,H\n";
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        s += format_double(rec.times[k]) + "," + format_double(rec.states[k].q) + "," +
             format_double(rec.states[k].p) + "," + format_double(rec.energies[k]) + "\n";
    }
    return s;
}

std::string trajectory_csv(const FullTrajectoryRecord& rec, const std::string& config_hash) {
    std::string s = csv_header(rec.master_seed, rec.path_index, config_hash);
    s += "t,q1,q2,p1,p2,H0\n";
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        const FullState& st = rec.states[k];
        s += format_double(rec.times[k]) + "," + format_double(st.q1) + "," +
             format_double(st.q2) + "," + format_double(st.p1) + "," +
             format_double(st.p2) + "," + format_double(rec.energies[k]) + "\n";
    }
    return s;
}

std::string overlay_table(const std::vector<double>& t, const std::vector<double>& log_mean,
                          const std::vector<double>& log_predicted) {
    std::string s = "# t  log_mean_H  log_predicted\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        s += format_double(t[k]) + " " + format_double(log_mean[k]) + " " +
             format_double(log_predicted[k]) + "\n";
    }
    return s;
}

nlohmann::json report_envelope(const std::string& experiment, const std::string& config_hash,
                               std::uint64_t seed, double wall_time_s,
                               nlohmann::json payload) {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["version"] = library_version();
    j["wall_time_s"] = wall_time_s;
    j["result"] = std::move(payload);
    return j;
}

}  // namespace ergolang
