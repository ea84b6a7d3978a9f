#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "psd/errors.hpp"
#include "psd/util.hpp"

namespace psd {

/// Planar N-body configuration: positions and masses, G = 1 units.
struct Configuration {
    std::vector<Vec2> positions;
    std::vector<double> masses;

    std::size_t size() const { return positions.size(); }

    void validate() const {
        if (positions.size() != masses.size())
            throw ConfigError("Configuration: positions/masses length mismatch");
        if (positions.size() < 3)
            throw ConfigError("Configuration: N >= 3 required");
        for (double m : masses)
            if (!(m > 0.0)) throw ConfigError("Configuration: masses must be positive");
    }

    double total_mass() const {
        double m = 0.0;
        for (double mi : masses) m += mi;
        return m;
    }

    Vec2 center_of_mass() const {
        Vec2 cm{};
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            cm += masses[i] * positions[i];
            m += masses[i];
        }
        return cm / m;
    }

    /// Centre-of-mass moment of inertia sum m_i |x_i - x_cm|^2.
    double moment_of_inertia() const {
        const Vec2 cm = center_of_mass();
        double icm = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            icm += masses[i] * (positions[i] - cm).norm2();
        return icm;
    }
};

/// Newtonian potential, G = 1: V_N = -sum_{i<j} m_i m_j / r_ij.
inline double newton_potential(const Configuration& c) {
    double v = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = i + 1; j < c.size(); ++j) {
            const double r = (c.positions[i] - c.positions[j]).norm();
            if (r <= 0.0)
                throw SingularPotentialError("newton_potential: coincident particles");
            v -= c.masses[i] * c.masses[j] / r;
        }
    }
    return v;
}

/// Kinematic state alongside a Configuration (for the oracle side).
struct PhaseState {
    Configuration config;
    std::vector<Vec2> velocities;

    double kinetic_energy() const {
        double t = 0.0;
        for (std::size_t i = 0; i < config.size(); ++i)
            t += 0.5 * config.masses[i] * velocities[i].norm2();
        return t;
    }

    double energy() const { return kinetic_energy() + newton_potential(config); }

    Vec2 total_momentum() const {
        Vec2 p{};
        for (std::size_t i = 0; i < config.size(); ++i)
            p += config.masses[i] * velocities[i];
        return p;
    }

    /// Angular momentum about the centre of mass (planar scalar).
    double angular_momentum() const {
        const Vec2 cm = config.center_of_mass();
        const Vec2 pm = total_momentum() / config.total_mass();
        double j = 0.0;
        for (std::size_t i = 0; i < config.size(); ++i)
            j += config.masses[i] *
                 (config.positions[i] - cm).cross(velocities[i] - pm);
        return j;
    }

    /// Dilatational momentum D = sum m_i (x_i - cm) . (v_i - v_cm) = I_dot / 2.
    double dilatational_momentum() const {
        const Vec2 cm = config.center_of_mass();
        const Vec2 pm = total_momentum() / config.total_mass();
        double d = 0.0;
        for (std::size_t i = 0; i < config.size(); ++i)
            d += config.masses[i] *
                 (config.positions[i] - cm).dot(velocities[i] - pm);
        return d;
    }
};

}  // namespace psd
