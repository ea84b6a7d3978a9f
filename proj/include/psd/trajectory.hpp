#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psd/complexity.hpp"
#include "psd/errors.hpp"
#include "psd/kepler.hpp"
#include "psd/nbody.hpp"
#include "psd/shape_space.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Arc-length-indexed trajectory of shape-space states plus derived
// observables. Serialized as one JSON header line (magic, schema version,
// config hash, column names) followed by full-precision numeric rows.
// ---------------------------------------------------------------------------

inline constexpr const char* kTrajectoryMagic = "PSDTRAJ";
inline constexpr int kTrajectorySchema = 1;

enum class TrajectoryKind { classical, quantum, oracle };

inline const char* trajectory_kind_name(TrajectoryKind k) {
    switch (k) {
        case TrajectoryKind::classical: return "classical";
        case TrajectoryKind::quantum: return "quantum";
        default: return "oracle";
    }
}

enum class RunStatus { completed, singularity_stop, degenerate_stop, truncated };

inline const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::singularity_stop: return "singularity-stop";
        case RunStatus::degenerate_stop: return "degenerate-stop";
        default: return "truncated";
    }
}

struct TrajectorySample {
    double s = 0.0;        ///< shape-space arc-length
    Vec3 n;                ///< unit shape vector (embedding X = n/2)
    double dir = 0.0;      ///< direction angle in the standard chart
    double kappa = 0.0;
    double omega = 0.0;    ///< dilatational rate D/p; sign = branch
    double com = 0.0;
    double pot = 0.0;      ///< shape potential V(q)
    // quantum diagnostics
    double vq_sup = 0.0;
    double delta = 0.0;    ///< guidance residual |p - dS| at Q
    double norm_drift = 0.0;
    // oracle extras
    double t = 0.0;        ///< Newtonian time
    double scale = 0.0;    ///< R = sqrt(I_cm)
    std::optional<PhaseState> phase;  ///< physical configuration + velocities
    /// chart angles as parsed from a file; keeps rewrites byte-identical
    std::optional<ChartCoords> io_chart;

    ChartCoords coords() const { return io_chart ? *io_chart : unit_to_chart(n); }
};

struct TrajectoryRecord {
    TrajectoryKind kind = TrajectoryKind::classical;
    RunStatus status = RunStatus::completed;
    std::vector<double> masses;
    double homogeneity = -1.0;  ///< V_phys = V(q) R^homogeneity
    std::string config_hash;
    std::vector<TrajectorySample> samples;

    double arc_span() const {
        return samples.empty() ? 0.0 : samples.back().s - samples.front().s;
    }

    std::vector<double> column_s() const {
        std::vector<double> v(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k) v[k] = samples[k].s;
        return v;
    }

    std::vector<double> column_com() const {
        std::vector<double> v(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k) v[k] = samples[k].com;
        return v;
    }

    /// Same curve traversed in the opposite orientation (s re-based to 0).
    TrajectoryRecord reversed() const {
        TrajectoryRecord out = *this;
        std::reverse(out.samples.begin(), out.samples.end());
        const double s_max = samples.empty() ? 0.0 : samples.back().s;
        for (auto& smp : out.samples) {
            smp.s = s_max - smp.s;
            smp.omega = -smp.omega;
        }
        return out;
    }

    bool has_phase_samples() const {
        return !samples.empty() && samples.front().phase.has_value();
    }
};

// -- detectors over records --------------------------------------------------

inline ArrowReport arrow_of_time(const TrajectoryRecord& rec, int min_windows = 10) {
    return arrow_of_time(rec.column_s(), rec.column_com(), min_windows);
}

inline std::vector<KeplerPairReport> detect_kepler_pairs(
    const TrajectoryRecord& rec, const KeplerDetectOptions& opt = {}) {
    if (!rec.has_phase_samples())
        throw InsufficientDataError(
            "detect_kepler_pairs: trajectory carries no representative configurations");
    std::vector<ConfigSample> samples;
    samples.reserve(rec.samples.size());
    for (const auto& smp : rec.samples) {
        if (!smp.phase) continue;
        samples.push_back({smp.s, smp.t, *smp.phase});
    }
    return detect_kepler_pairs(samples, opt);
}

// -- serialization ------------------------------------------------------------

namespace detail {

inline std::vector<std::string> trajectory_columns(TrajectoryKind kind, int nbody) {
    std::vector<std::string> cols = {"s",     "theta", "lon", "dir",
                                     "kappa", "omega", "com", "pot"};
    if (kind == TrajectoryKind::quantum) {
        cols.insert(cols.end(), {"vq_sup", "delta", "norm_drift"});
    } else if (kind == TrajectoryKind::oracle) {
        cols.insert(cols.end(), {"t", "scale"});
        for (int i = 0; i < nbody; ++i) {
            cols.push_back("x" + std::to_string(i + 1));
            cols.push_back("y" + std::to_string(i + 1));
        }
        for (int i = 0; i < nbody; ++i) {
            cols.push_back("vx" + std::to_string(i + 1));
            cols.push_back("vy" + std::to_string(i + 1));
        }
    }
    return cols;
}

}  // namespace detail

inline void write_trajectory(std::ostream& os, const TrajectoryRecord& rec) {
    nlohmann::json header;
    header["magic"] = kTrajectoryMagic;
    header["schema"] = kTrajectorySchema;
    header["kind"] = trajectory_kind_name(rec.kind);
    header["status"] = run_status_name(rec.status);
    header["config_hash"] = rec.config_hash;
    header["masses"] = rec.masses;
    header["homogeneity"] = rec.homogeneity;
    const int nbody = static_cast<int>(rec.masses.size());
    header["columns"] = detail::trajectory_columns(rec.kind, nbody);
    header["rows"] = rec.samples.size();
    os << header.dump() << "\n";

    for (const auto& smp : rec.samples) {
        const ChartCoords q = smp.coords();
        std::string line = format_full(smp.s);
        auto push = [&line](double v) {
            line += ' ';
            line += format_full(v);
        };
        push(q.theta);
        push(q.lon);
        push(smp.dir);
        push(smp.kappa);
        push(smp.omega);
        push(smp.com);
        push(smp.pot);
        if (rec.kind == TrajectoryKind::quantum) {
            push(smp.vq_sup);
            push(smp.delta);
            push(smp.norm_drift);
        } else if (rec.kind == TrajectoryKind::oracle) {
            push(smp.t);
            push(smp.scale);
            if (!smp.phase)
                throw Error("write_trajectory: oracle sample without configuration");
            for (const Vec2& p : smp.phase->config.positions) {
                push(p.x);
                push(p.y);
            }
            for (const Vec2& v : smp.phase->velocities) {
                push(v.x);
                push(v.y);
            }
        }
        os << line << "\n";
    }
}

inline void write_trajectory_file(const std::string& path, const TrajectoryRecord& rec) {
    std::ofstream os(path);
    if (!os) throw Error("write_trajectory_file: cannot open " + path);
    write_trajectory(os, rec);
}

inline TrajectoryRecord read_trajectory(std::istream& is) {
    std::string header_line;
    if (!std::getline(is, header_line))
        throw Error("read_trajectory: empty stream");
    nlohmann::json header = nlohmann::json::parse(header_line, nullptr, false);
    if (header.is_discarded() || header.value("magic", "") != kTrajectoryMagic)
        throw Error("read_trajectory: bad header line");
    if (header.value("schema", -1) != kTrajectorySchema)
        throw Error("read_trajectory: unsupported schema version");

    TrajectoryRecord rec;
    const std::string kind = header.value("kind", "classical");
    rec.kind = kind == "quantum"
                   ? TrajectoryKind::quantum
                   : (kind == "oracle" ? TrajectoryKind::oracle : TrajectoryKind::classical);
    const std::string status = header.value("status", "completed");
    rec.status = status == "singularity-stop"
                     ? RunStatus::singularity_stop
                     : (status == "degenerate-stop"
                            ? RunStatus::degenerate_stop
                            : (status == "truncated" ? RunStatus::truncated
                                                     : RunStatus::completed));
    rec.masses = header.value("masses", std::vector<double>{});
    rec.homogeneity = header.value("homogeneity", -1.0);
    rec.config_hash = header.value("config_hash", "");
    const int nbody = static_cast<int>(rec.masses.size());
    const auto expect_cols = detail::trajectory_columns(rec.kind, nbody);
    if (header["columns"] != nlohmann::json(expect_cols))
        throw Error("read_trajectory: unexpected column layout");

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        TrajectorySample smp;
        double theta = 0.0, lon = 0.0;
        ls >> smp.s >> theta >> lon >> smp.dir >> smp.kappa >> smp.omega >>
            smp.com >> smp.pot;
        smp.io_chart = ChartCoords{theta, lon};
        smp.n = chart_to_unit({theta, lon});
        if (rec.kind == TrajectoryKind::quantum) {
            ls >> smp.vq_sup >> smp.delta >> smp.norm_drift;
        } else if (rec.kind == TrajectoryKind::oracle) {
            ls >> smp.t >> smp.scale;
            PhaseState ph;
            ph.config.masses = rec.masses;
            ph.config.positions.resize(nbody);
            ph.velocities.resize(nbody);
            for (int i = 0; i < nbody; ++i)
                ls >> ph.config.positions[i].x >> ph.config.positions[i].y;
            for (int i = 0; i < nbody; ++i)
                ls >> ph.velocities[i].x >> ph.velocities[i].y;
            smp.phase = std::move(ph);
        }
        if (!ls && !ls.eof()) throw Error("read_trajectory: malformed row");
        rec.samples.push_back(std::move(smp));
    }
    return rec;
}

inline TrajectoryRecord read_trajectory_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("read_trajectory_file: cannot open " + path);
    return read_trajectory(is);
}

}  // namespace psd
