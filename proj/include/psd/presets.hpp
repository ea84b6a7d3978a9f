#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "psd/complexity.hpp"
#include "psd/errors.hpp"
#include "psd/ini.hpp"
#include "psd/nbody.hpp"
#include "psd/shape_field.hpp"
#include "psd/shape_potential.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Curated initial conditions and analytic references. Presets ship as data
// files (the same sectioned key-value format as experiment configs) under
// the presets/ directory; PSD_PRESET_DIR overrides the location.
// ---------------------------------------------------------------------------

enum class PresetKind { classical_ic, wavefunction, analytic_reference };

struct Preset {
    std::string name;
    PresetKind kind = PresetKind::classical_ic;
    std::string doc;
    std::string provenance;
    IniDocument payload;

    /// Configuration-space state of a classical-IC preset.
    PhaseState classical_state() const {
        PhaseState st;
        st.config.masses = payload.get_doubles("bodies", "masses");
        const auto pos = payload.get_doubles("state", "positions");
        const auto vel = payload.get_doubles("state", "velocities");
        if (pos.size() != 2 * st.config.masses.size() || vel.size() != pos.size())
            throw ConfigError("preset " + name + ": state length mismatch");
        for (std::size_t i = 0; i < st.config.masses.size(); ++i) {
            st.config.positions.push_back({pos[2 * i], pos[2 * i + 1]});
            st.velocities.push_back({vel[2 * i], vel[2 * i + 1]});
        }
        st.config.validate();
        return st;
    }

    /// Build (R, S) fields of a wavefunction preset on a transform.
    std::pair<ShapeField, ShapeField> build_fields(
        std::shared_ptr<const SphereTransform> transform,
        const std::vector<double>& masses) const {
        ShapeField amp = ShapeField::zeros(transform);
        if (payload.get_or("fields", "amplitude_form", "") == "com-gaussian") {
            const double width = payload.get_double_or("fields", "width", 0.5);
            const double soft = payload.get_double_or("fields", "softening", 0.0);
            const double com_min = std::pow(3.0, -1.5);
            const double mpow = std::pow(masses[0] + masses[1] + masses[2], 2.5);
            amp = ShapeField::from_unit_function(transform, [&](Vec3 n) {
                double com;
                if (soft > 0.0) {
                    // softened complexity: bounded near the collision rings,
                    // still a pure shape invariant
                    com = -SoftenedGravityShapePotential(masses, soft).value(n) / mpow;
                } else {
                    com = complexity_of_shape(n, masses);
                }
                return std::exp(-(com - com_min) / width);
            });
        } else {
            amp = field_from_coeff_spec(transform,
                                        payload.get_or("fields", "amplitude", ""));
        }
        const double norm = amp.inner(amp);
        if (!(norm > 0.0))
            throw ConfigError("preset " + name + ": vanishing amplitude");
        amp *= 1.0 / std::sqrt(norm);
        ShapeField phase =
            field_from_coeff_spec(transform, payload.get_or("fields", "phase", ""));
        return {std::move(amp), std::move(phase)};
    }

    /// Coefficient spec: "l m c|s value" groups separated by ';'.
    static ShapeField field_from_coeff_spec(
        std::shared_ptr<const SphereTransform> transform, const std::string& spec) {
        std::vector<double> coeffs(transform->coeff_count(), 0.0);
        std::istringstream groups(spec);
        std::string group;
        while (std::getline(groups, group, ';')) {
            std::istringstream gs(group);
            int l = 0, m = 0;
            std::string part;
            double value = 0.0;
            if (!(gs >> l)) continue;  // empty group
            if (!(gs >> m >> part >> value) || (part != "c" && part != "s"))
                throw ConfigError("bad coefficient group: '" + group + "'");
            if (l > transform->lmax() || m > l || m < 0)
                throw ConfigError("coefficient outside the resolution: '" + group + "'");
            coeffs[sh_index(l, m, part == "s")] = value;
        }
        return ShapeField(transform, transform->synthesis(coeffs));
    }
};

inline std::string default_preset_dir() {
    if (const char* env = std::getenv("PSD_PRESET_DIR")) return env;
#ifdef PSD_PRESET_DIR
    return PSD_PRESET_DIR;
#else
    return "presets";
#endif
}

inline std::vector<std::string> list_presets(const std::string& dir = default_preset_dir()) {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".cfg")
            names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

inline Preset load_preset(const std::string& name,
                          const std::string& dir = default_preset_dir()) {
    const std::filesystem::path path = std::filesystem::path(dir) / (name + ".cfg");
    if (!std::filesystem::exists(path)) {
        std::string msg = "unknown preset '" + name + "'; available:";
        for (const auto& n : list_presets(dir)) msg += " " + n;
        throw ConfigError(msg);
    }
    Preset p;
    p.payload = IniDocument::parse_file(path.string());
    p.name = p.payload.get("preset", "name");
    if (p.name != name)
        throw ConfigError("preset file " + path.string() + " declares name " + p.name);
    const std::string kind = p.payload.get("preset", "kind");
    if (kind == "classical-IC") p.kind = PresetKind::classical_ic;
    else if (kind == "wavefunction") p.kind = PresetKind::wavefunction;
    else if (kind == "analytic-reference") p.kind = PresetKind::analytic_reference;
    else throw ConfigError("preset " + name + ": unknown kind " + kind);
    p.doc = p.payload.get_or("preset", "doc", "");
    p.provenance = p.payload.get_or("preset", "provenance", "");

    // validate against the consuming module's preconditions
    if (p.kind == PresetKind::classical_ic) (void)p.classical_state();
    return p;
}

}  // namespace psd
