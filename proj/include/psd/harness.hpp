#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psd/classical.hpp"
#include "psd/complexity.hpp"
#include "psd/ephemeris.hpp"
#include "psd/errors.hpp"
#include "psd/ini.hpp"
#include "psd/oracle.hpp"
#include "psd/presets.hpp"
#include "psd/quantum.hpp"
#include "psd/trajectory.hpp"

namespace psd {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Experiment configuration (sectioned key-value file). Sections:
//
//   [experiment]   kind = classical|quantum|oracle-compare|
//                         classical-limit-sweep|complexity-scan, seed
//   [bodies]       masses
//   [potential]    type = gravity|softened-gravity|constant,
//                  softening, value, spectral = true|false
//   [initial]      preset = <classical-IC>, or theta/lon/dir/kappa/branch
//   [wavefunction] preset = <wavefunction>, or amplitude/phase coeff specs
//   [resolution]   lmax
//   [integration]  arclength, rel_tol, abs_tol, max_step
//   [quantum]      epsilon, ktilde = default|guidance
//   [oracle]       t_span, rel_tol, abs_tol, preset or random relational seed
//   [sweep]        parameter = <section.key>, values
//   [scan]         n_theta, n_lon
// ---------------------------------------------------------------------------

enum class ScenarioKind {
    classical,
    quantum,
    oracle_compare,
    classical_limit_sweep,
    complexity_scan
};

struct ExperimentConfig {
    IniDocument doc;
    ScenarioKind kind = ScenarioKind::classical;
    std::uint64_t seed = 0;
    std::vector<double> masses = {1.0, 1.0, 1.0};
    std::string hash;  ///< hex hash of the canonical config text

    static ExperimentConfig parse(IniDocument source) {
        ExperimentConfig cfg;
        cfg.doc = std::move(source);
        std::vector<std::string> errors;

        const std::string kind = cfg.doc.get_or("experiment", "kind", "");
        if (kind == "classical") cfg.kind = ScenarioKind::classical;
        else if (kind == "quantum") cfg.kind = ScenarioKind::quantum;
        else if (kind == "oracle-compare") cfg.kind = ScenarioKind::oracle_compare;
        else if (kind == "classical-limit-sweep")
            cfg.kind = ScenarioKind::classical_limit_sweep;
        else if (kind == "complexity-scan") cfg.kind = ScenarioKind::complexity_scan;
        else errors.push_back("[experiment] kind missing or unknown: '" + kind + "'");

        cfg.seed = static_cast<std::uint64_t>(
            cfg.doc.get_int_or("experiment", "seed", 0));

        if (cfg.doc.has("bodies", "masses")) {
            cfg.masses = cfg.doc.get_doubles("bodies", "masses");
            if (cfg.masses.size() != 3)
                errors.push_back("[bodies] masses must list 3 values");
            for (double m : cfg.masses)
                if (!(m > 0.0)) errors.push_back("[bodies] masses must be positive");
        }

        const long long lmax = cfg.doc.get_int_or("resolution", "lmax", 32);
        if (lmax < 4 || lmax > 128)
            errors.push_back("[resolution] lmax out of the supported range [4, 128]");

        for (const char* key : {"rel_tol", "abs_tol"})
            if (cfg.doc.has("integration", key) &&
                !(cfg.doc.get_double("integration", key) > 0.0))
                errors.push_back(std::string("[integration] ") + key +
                                 " must be positive");
        if (cfg.doc.get_double_or("integration", "arclength", 1.0) < 0.0)
            errors.push_back("[integration] arclength must be >= 0");

        const std::string ktilde = cfg.doc.get_or("quantum", "ktilde", "default");
        if (ktilde != "default" && ktilde != "guidance")
            errors.push_back("[quantum] ktilde must be default or guidance");

        if (cfg.doc.has("initial", "preset")) {
            try {
                (void)load_preset(cfg.doc.get("initial", "preset"));
            } catch (const ConfigError& e) {
                errors.push_back(e.what());
            }
        }
        if (cfg.doc.has("wavefunction", "preset")) {
            try {
                (void)load_preset(cfg.doc.get("wavefunction", "preset"));
            } catch (const ConfigError& e) {
                errors.push_back(e.what());
            }
        }

        if (!errors.empty()) {
            std::string msg = "invalid experiment config:";
            for (const auto& e : errors) msg += "\n  - " + e;
            throw ConfigError(msg);
        }
        cfg.hash = hex64(fnv1a64(cfg.doc.dump()));
        return cfg;
    }

    static ExperimentConfig parse_file(const std::string& path) {
        return parse(IniDocument::parse_file(path));
    }

    int lmax() const {
        return static_cast<int>(doc.get_int_or("resolution", "lmax", 32));
    }
};

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string config_hash;
    std::string code_version = kVersion;
    std::string started_at;
    std::string finished_at;
    std::string status = "success";  ///< success | partial | failure
    nlohmann::json summary;          ///< deterministic per config + seed

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config_hash"] = config_hash;
        j["code_version"] = code_version;
        j["started_at"] = started_at;
        j["finished_at"] = finished_at;
        j["status"] = status;
        j["summary"] = summary;
        return j;
    }
};

namespace detail {

inline std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline std::unique_ptr<ShapePotential> make_potential(const ExperimentConfig& cfg) {
    const std::string type = cfg.doc.get_or("potential", "type", "gravity");
    if (type == "gravity")
        return std::make_unique<GravityShapePotential>(cfg.masses);
    if (type == "softened-gravity")
        return std::make_unique<SoftenedGravityShapePotential>(
            cfg.masses, cfg.doc.get_double_or("potential", "softening", 0.15));
    if (type == "constant")
        return std::make_unique<ConstantShapePotential>(
            cfg.doc.get_double_or("potential", "value", -3.0),
            cfg.doc.get_double_or("potential", "homogeneity", -1.0));
    throw ConfigError("[potential] unknown type " + type);
}

inline IntegrateOptions classical_options(const ExperimentConfig& cfg) {
    IntegrateOptions opt;
    opt.rel_tol = cfg.doc.get_double_or("integration", "rel_tol", 1e-9);
    opt.abs_tol = cfg.doc.get_double_or("integration", "abs_tol", 1e-12);
    opt.max_step = cfg.doc.get_double_or("integration", "max_step", 0.05);
    return opt;
}

/// Classical curve initial data: an explicit chart state or a classical-IC
/// preset projected through the oracle extraction.
inline CurveState initial_curve_state(const ExperimentConfig& cfg,
                                      const ShapePotential& pot) {
    if (cfg.doc.has("initial", "preset")) {
        const Preset p = load_preset(cfg.doc.get("initial", "preset"));
        return oracle_initial_curve_state(p.classical_state(), pot);
    }
    ShapePoint q;
    q.coords = {cfg.doc.get_double("initial", "theta"),
                cfg.doc.get_double("initial", "lon")};
    const Direction dir{cfg.doc.get_double("initial", "dir")};
    const double kappa = cfg.doc.get_double("initial", "kappa");
    const std::string branch = cfg.doc.get_or("initial", "branch", "expanding");
    return make_curve_state(pot, q, dir, kappa,
                            branch == "contracting" ? Branch::contracting
                                                    : Branch::expanding);
}

inline QuantumCurveState initial_quantum_state(const ExperimentConfig& cfg,
                                               std::shared_ptr<const SphereTransform> t,
                                               const ShapePotential& pot) {
    QuantumCurveState st;
    IniDocument init_source;
    if (cfg.doc.has("wavefunction", "preset")) {
        const Preset p = load_preset(cfg.doc.get("wavefunction", "preset"));
        auto [amp, phase] = p.build_fields(t, cfg.masses);
        st.amplitude = std::move(amp);
        st.phase = std::move(phase);
        init_source = p.payload;
    } else {
        st.amplitude = Preset::field_from_coeff_spec(
            t, cfg.doc.get_or("wavefunction", "amplitude", "0 0 c 1"));
        const double norm = st.amplitude.inner(st.amplitude);
        st.amplitude *= 1.0 / std::sqrt(norm);
        st.phase = Preset::field_from_coeff_spec(
            t, cfg.doc.get_or("wavefunction", "phase", ""));
        init_source = cfg.doc;
    }
    // config [initial] overrides the preset's own block
    const IniDocument& src = cfg.doc.has("initial", "q_theta") ? cfg.doc : init_source;
    st.q.coords = {src.get_double("initial", "q_theta"),
                   src.get_double("initial", "q_lon")};
    const std::string mode = src.get_or("initial", "init", "guidance");
    if (mode == "guidance") {
        guidance_init(st.phase, st.q.coords, st.phi, st.kappa);
    } else {
        st.phi.angle = src.get_double("initial", "dir");
        st.kappa = src.get_double("initial", "kappa");
    }
    const std::string branch = src.get_or("initial", "branch", "expanding");
    const double arg = -(1.0 + 2.0 * pot.value(st.q.unit()) / st.kappa);
    st.omega = (branch == "contracting" ? -1.0 : 1.0) * std::sqrt(std::max(0.0, arg));
    return st;
}

inline QuantumParams quantum_params(const ExperimentConfig& cfg) {
    QuantumParams params;
    params.epsilon = cfg.doc.get_double_or("quantum", "epsilon", 1.0);
    params.ktilde = cfg.doc.get_or("quantum", "ktilde", "default") == "guidance"
                        ? KTildeMode::guidance
                        : KTildeMode::classical_default;
    return params;
}

inline QuantumIntegrateOptions quantum_options(const ExperimentConfig& cfg) {
    QuantumIntegrateOptions opt;
    opt.rel_tol = cfg.doc.get_double_or("integration", "rel_tol", 1e-9);
    opt.abs_tol = cfg.doc.get_double_or("integration", "abs_tol", 1e-11);
    return opt;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << j.dump(2) << "\n";
}

/// Deviation of a trajectory from a reference classical record.
inline double sup_deviation(const TrajectoryRecord& rec,
                            const CurveInterpolator& interp) {
    double sup = 0.0;
    for (const auto& smp : rec.samples) {
        if (smp.s > interp.s_max()) break;
        Vec3 n;
        double kappa;
        interp.eval(smp.s, n, kappa);
        sup = std::max(sup, angle_between(smp.n, n));
    }
    return sup;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

inline RunManifest run(const ExperimentConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.config_hash = cfg.hash;
    manifest.started_at = detail::timestamp_now();

    // canonical copy of the config next to the artifacts
    cfg.doc.write_file((fs::path(out_dir) / "config.resolved.cfg").string());

    const double arclen = cfg.doc.get_double_or("integration", "arclength", 1.0);

    try {
        switch (cfg.kind) {
            case ScenarioKind::classical: {
                const auto pot = detail::make_potential(cfg);
                const CurveState init = detail::initial_curve_state(cfg, *pot);
                auto res = integrate_classical(init, *pot, arclen,
                                               detail::classical_options(cfg), cfg.masses);
                res.record.config_hash = cfg.hash;
                write_trajectory_file((fs::path(out_dir) / "trajectory.psdtraj").string(),
                                      res.record);
                manifest.summary["samples"] = res.record.samples.size();
                manifest.summary["run_status"] = run_status_name(res.record.status);
                manifest.summary["final_com"] = res.record.samples.back().com;
                manifest.summary["max_tangent_drift"] = res.max_tangent_drift;
                if (res.record.samples.size() >= 100)
                    manifest.summary["arrow"] =
                        arrow_name(arrow_of_time(res.record).verdict);
                if (res.record.status != RunStatus::completed)
                    manifest.status = "partial";
                break;
            }
            case ScenarioKind::quantum: {
                auto transform = std::make_shared<SphereTransform>(cfg.lmax());
                const auto pot = detail::make_potential(cfg);
                const QuantumCurveState init =
                    detail::initial_quantum_state(cfg, transform, *pot);
                auto res = integrate_quantum(init, *pot, arclen,
                                             detail::quantum_params(cfg),
                                             detail::quantum_options(cfg), cfg.masses);
                res.record.config_hash = cfg.hash;
                write_trajectory_file((fs::path(out_dir) / "trajectory.psdtraj").string(),
                                      res.record);
                manifest.summary["samples"] = res.record.samples.size();
                manifest.summary["run_status"] = run_status_name(res.record.status);
                manifest.summary["final_com"] = res.record.samples.back().com;
                manifest.summary["max_delta"] = res.max_delta;
                manifest.summary["max_norm_drift"] = res.max_norm_drift;
                if (res.record.samples.size() >= 100)
                    manifest.summary["arrow"] =
                        arrow_name(arrow_of_time(res.record).verdict);
                if (res.record.status != RunStatus::completed)
                    manifest.status = "partial";
                break;
            }
            case ScenarioKind::oracle_compare: {
                const GravityShapePotential pot(cfg.masses);
                PhaseState data;
                if (cfg.doc.has("oracle", "preset")) {
                    data = load_preset(cfg.doc.get("oracle", "preset")).classical_state();
                } else {
                    // relational draw, skipping windows with close encounters
                    const double rmin_shape =
                        cfg.doc.get_double_or("oracle", "min_shape_separation", 0.15);
                    bool found = false;
                    for (int sub = 0; sub < 64 && !found; ++sub) {
                        data = random_relational_state(cfg.seed * 1024 + sub, cfg.masses);
                        OracleOptions probe;
                        probe.rel_tol = 1e-10;
                        probe.abs_tol = 1e-12;
                        probe.target_arclength = arclen * 1.05;
                        const OracleResult trial = newtonian_oracle(data, 1e4, probe);
                        if (trial.record.samples.back().s < arclen) continue;
                        double rmin = 1e9;
                        for (const auto& smp : trial.record.samples)
                            rmin = std::min(rmin, pot.min_pair_distance(smp.n));
                        found = rmin > rmin_shape;
                    }
                    if (!found)
                        throw Error("oracle-compare: no encounter-free window found");
                }
                OracleOptions oopt;
                oopt.rel_tol = cfg.doc.get_double_or("oracle", "rel_tol", 1e-12);
                oopt.abs_tol = cfg.doc.get_double_or("oracle", "abs_tol", 1e-14);
                oopt.target_arclength = arclen * 1.05;
                const OracleResult oracle = newtonian_oracle(
                    data, cfg.doc.get_double_or("oracle", "t_span", 1e4), oopt);

                const CurveState init = oracle_initial_curve_state(data, pot);
                IntegrateOptions iopt = detail::classical_options(cfg);
                iopt.rel_tol = std::min(iopt.rel_tol, 1e-10);
                iopt.abs_tol = std::min(iopt.abs_tol, 1e-13);
                const auto intr =
                    integrate_classical(init, pot, arclen, iopt, cfg.masses);

                TrajectoryRecord oracle_rec = oracle.record;
                oracle_rec.config_hash = cfg.hash;
                TrajectoryRecord intr_rec = intr.record;
                intr_rec.config_hash = cfg.hash;
                write_trajectory_file((fs::path(out_dir) / "oracle.psdtraj").string(),
                                      oracle_rec);
                write_trajectory_file((fs::path(out_dir) / "intrinsic.psdtraj").string(),
                                      intr_rec);

                const OracleCompareReport rep =
                    compare_intrinsic_to_oracle(oracle, intr.record, pot, arclen);
                manifest.summary["sup_chart_error"] = rep.sup_chart_error;
                manifest.summary["sup_kappa_rel_error"] = rep.sup_kappa_rel_error;
                manifest.summary["arc_compared"] = rep.arc_compared;
                manifest.summary["points"] = rep.points;
                manifest.summary["energy_drift"] = oracle.energy_drift;
                detail::write_json(fs::path(out_dir) / "compare.json",
                                   manifest.summary);
                if (intr.record.status != RunStatus::completed ||
                    oracle.record.status != RunStatus::completed)
                    manifest.status = "partial";
                break;
            }
            case ScenarioKind::classical_limit_sweep: {
                auto transform = std::make_shared<SphereTransform>(cfg.lmax());
                const auto base_pot = detail::make_potential(cfg);
                const SpectralShapePotential pot(*base_pot, transform);
                QuantumCurveState qinit =
                    detail::initial_quantum_state(cfg, transform, pot);
                CurveState cinit;
                cinit.q = qinit.q;
                cinit.phi = qinit.phi;
                cinit.kappa = qinit.kappa;
                cinit.omega = qinit.omega;
                IntegrateOptions copt = detail::classical_options(cfg);
                copt.rel_tol = 1e-12;
                copt.abs_tol = 1e-14;
                const auto classical =
                    integrate_classical(cinit, pot, arclen, copt, cfg.masses);
                const auto tangents = intrinsic_tangents(classical.record);
                const CurveInterpolator interp(classical.record, tangents, pot);

                std::vector<double> eps =
                    cfg.doc.has("sweep", "values")
                        ? cfg.doc.get_doubles("sweep", "values")
                        : std::vector<double>{1e-1, 1e-2, 1e-3};
                std::ofstream table(fs::path(out_dir) / "epsilon_table.tsv");
                table << "# classical-limit sweep, config " << cfg.hash << "\n";
                table << "epsilon\tdeviation\trun_status\n";
                std::vector<double> devs;
                for (double e : eps) {
                    QuantumParams params = detail::quantum_params(cfg);
                    params.epsilon = e;
                    const auto res =
                        integrate_quantum(qinit, pot, arclen, params,
                                          detail::quantum_options(cfg), cfg.masses);
                    const double dev = detail::sup_deviation(res.record, interp);
                    devs.push_back(dev);
                    table << format_full(e) << "\t" << format_full(dev) << "\t"
                          << run_status_name(res.record.status) << "\n";
                }
                double order = 0.0;
                if (devs.size() >= 2) {
                    std::vector<double> lx, ly;
                    for (std::size_t k = 0; k < devs.size(); ++k)
                        if (devs[k] > 0) {
                            lx.push_back(std::log10(eps[k]));
                            ly.push_back(std::log10(devs[k]));
                        }
                    order = linear_fit(lx, ly)[1];
                }
                manifest.summary["epsilons"] = eps;
                manifest.summary["deviations"] = devs;
                manifest.summary["measured_order"] = order;
                break;
            }
            case ScenarioKind::complexity_scan: {
                const int n_theta =
                    static_cast<int>(cfg.doc.get_int_or("scan", "n_theta", 181));
                const int n_lon =
                    static_cast<int>(cfg.doc.get_int_or("scan", "n_lon", 360));
                const auto forms = pair_distance_forms(cfg.masses);
                std::ofstream table(fs::path(out_dir) / "com_scan.tsv");
                table << "# complexity scan, config " << cfg.hash << "\n";
                table << "theta\tlon\tcom\n";
                double best = std::numeric_limits<double>::infinity();
                Vec3 best_n{0, 0, 1};
                for (int j = 0; j < n_theta; ++j) {
                    const double th = kPi * j / (n_theta - 1);
                    for (int i = 0; i < n_lon; ++i) {
                        const double lo = 2.0 * kPi * i / n_lon;
                        const Vec3 n = chart_to_unit({th, lo});
                        bool regular = true;
                        for (const auto& f : forms)
                            if (f.r2(n) < 1e-9) regular = false;
                        if (!regular) continue;
                        const double com = complexity_of_shape(n, cfg.masses);
                        table << format_full(th) << "\t" << format_full(lo) << "\t"
                              << format_full(com) << "\n";
                        if (com < best) {
                            best = com;
                            best_n = n;
                        }
                    }
                }
                // local refinement
                for (double step = 0.01; step > 1e-8; step *= 0.5) {
                    bool improved = true;
                    while (improved) {
                        improved = false;
                        for (const Vec3 d :
                             {Vec3{step, 0, 0}, Vec3{-step, 0, 0}, Vec3{0, step, 0},
                              Vec3{0, -step, 0}, Vec3{0, 0, step}, Vec3{0, 0, -step}}) {
                            const Vec3 n = (best_n + d).normalized();
                            const double com = complexity_of_shape(n, cfg.masses);
                            if (com < best) {
                                best = com;
                                best_n = n;
                                improved = true;
                            }
                        }
                    }
                }
                manifest.summary["min_com"] = best;
                manifest.summary["min_theta"] = unit_to_chart(best_n).theta;
                manifest.summary["min_lon"] = unit_to_chart(best_n).lon;
                detail::write_json(fs::path(out_dir) / "min_report.json",
                                   manifest.summary);
                break;
            }
        }
    } catch (const Error& e) {
        manifest.status = "failure";
        manifest.summary["error"] = e.what();
    }

    manifest.finished_at = detail::timestamp_now();
    detail::write_json(fs::path(out_dir) / "manifest.json", manifest.to_json());
    return manifest;
}

// ---------------------------------------------------------------------------
// sweep: one parameter, grid of values, concurrent isolated runs
// ---------------------------------------------------------------------------

struct SweepResult {
    std::vector<RunManifest> manifests;
    std::size_t failures = 0;
};

inline SweepResult sweep(const ExperimentConfig& base, const std::string& out_dir,
                         int threads = 1) {
    namespace fs = std::filesystem;
    if (!base.doc.has("sweep", "parameter") || !base.doc.has("sweep", "values"))
        throw ConfigError("sweep: [sweep] parameter and values required");
    const std::string param = base.doc.get("sweep", "parameter");
    const auto dot = param.find('.');
    if (dot == std::string::npos)
        throw ConfigError("sweep: parameter must be section.key");
    const std::string sec = param.substr(0, dot);
    const std::string key = param.substr(dot + 1);
    const std::vector<double> values = base.doc.get_doubles("sweep", "values");
    if (values.empty()) throw ConfigError("sweep: empty value grid");

    fs::create_directories(out_dir);
    SweepResult result;
    result.manifests.resize(values.size());

    const int pool = std::max(1, threads);
    std::vector<std::future<void>> futures;
    for (std::size_t k = 0; k < values.size(); ++k) {
        auto task = [&, k] {
            char nbuf[16];
            std::snprintf(nbuf, sizeof(nbuf), "run-%04zu", k);
            const std::string sub = (fs::path(out_dir) / nbuf).string();
            try {
                IniDocument doc = base.doc;
                doc.set(sec, key, format_full(values[k]));
                const ExperimentConfig cfg = ExperimentConfig::parse(std::move(doc));
                result.manifests[k] = run(cfg, sub);
            } catch (const std::exception& e) {
                result.manifests[k].status = "failure";
                result.manifests[k].summary["error"] = e.what();
            }
        };
        futures.push_back(std::async(std::launch::async, task));
        if (static_cast<int>(futures.size()) >= pool) {
            for (auto& f : futures) f.get();
            futures.clear();
        }
    }
    for (auto& f : futures) f.get();

    // aggregate table
    std::ofstream table(fs::path(out_dir) / "sweep_table.tsv");
    table << "# sweep over " << param << ", base config " << base.hash << "\n";
    table << param << "\tstatus\tsummary\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto& m = result.manifests[k];
        if (m.status == "failure") ++result.failures;
        table << format_full(values[k]) << "\t" << m.status << "\t"
              << m.summary.dump() << "\n";
    }
    return result;
}

// ---------------------------------------------------------------------------
// plot-data export
// ---------------------------------------------------------------------------

/// Emit a column-oriented text table for one of the supported kinds:
/// sphere-path | com-vs-s | delta-vs-s | time-of-s.
inline void export_plot_data(const std::string& trajectory_file,
                             const std::string& kind, const std::string& out_file) {
    const TrajectoryRecord rec = read_trajectory_file(trajectory_file);
    std::ofstream os(out_file);
    if (!os) throw Error("export: cannot write " + out_file);
    os << "# psd export, kind " << kind << ", source config " << rec.config_hash
       << "\n";
    if (kind == "sphere-path") {
        os << "x\ty\tz\n";  // embedding, radius 1/2
        for (const auto& smp : rec.samples) {
            const Vec3 e = smp.n * kSphereRadius;
            os << format_full(e.x) << "\t" << format_full(e.y) << "\t"
               << format_full(e.z) << "\n";
        }
    } else if (kind == "com-vs-s") {
        os << "s\tcom\n";
        for (const auto& smp : rec.samples)
            os << format_full(smp.s) << "\t" << format_full(smp.com) << "\n";
    } else if (kind == "delta-vs-s") {
        if (rec.kind != TrajectoryKind::quantum)
            throw Error("export: delta-vs-s needs a quantum trajectory");
        os << "s\tdelta\n";
        for (const auto& smp : rec.samples)
            os << format_full(smp.s) << "\t" << format_full(smp.delta) << "\n";
    } else if (kind == "time-of-s") {
        os << "s\tt\tscale\n";
        if (rec.samples.size() >= 2) {
            const EphemerisReconstruction eph = reconstruct_time(rec);
            for (std::size_t k = 0; k < eph.s.size(); ++k)
                os << format_full(eph.s[k]) << "\t" << format_full(eph.time[k]) << "\t"
                   << format_full(eph.scale[k]) << "\n";
        }
    } else {
        throw Error("export: unknown kind " + kind +
                    " (sphere-path|com-vs-s|delta-vs-s|time-of-s)");
    }
}

inline std::string default_out_dir() {
    if (const char* env = std::getenv("PSD_OUT_DIR")) return env;
    return "out";
}

}  // namespace psd
