#pragma once

#include <cmath>
#include <vector>

#include "psd/errors.hpp"
#include "psd/util.hpp"

namespace psd {

/// Gauss-Legendre nodes/weights on [-1, 1] (Newton on the Legendre recurrence).
inline void gauss_legendre(int n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                // one final polish step
                p0 = 1.0; p1 = x;
                for (int l = 2; l <= n; ++l) {
                    const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (x * p1 - p0) / (x * x - 1.0);
                x -= p1 / pp;
                break;
            }
        }
        nodes[i] = -x;  // ascending order
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

/// Quadrature grid on the sphere: Gauss-Legendre latitudes x uniform
/// longitudes. Latitude count defaults to the 3/2 anti-aliasing rule so that
/// pointwise products of band-limited fields are analyzed without error.
struct SphereGrid {
    int lmax = 0;
    int n_lat = 0;
    int n_lon = 0;
    std::vector<double> x;       ///< cos(theta), ascending
    std::vector<double> w;       ///< Gauss-Legendre weights
    std::vector<double> theta;   ///< colatitudes
    std::vector<double> sin_theta;
    std::vector<double> lon;     ///< longitudes, 2*pi*i/n_lon

    SphereGrid() = default;

    explicit SphereGrid(int lmax_, int n_lat_ = 0, int n_lon_ = 0) : lmax(lmax_) {
        if (lmax < 1) throw ConfigError("SphereGrid: lmax >= 1 required");
        n_lat = n_lat_ > 0 ? n_lat_ : (3 * lmax) / 2 + 2;
        n_lon = n_lon_ > 0 ? n_lon_ : 3 * lmax + 2;
        if (n_lat < lmax + 1 || n_lon < 2 * lmax + 1)
            throw ConfigError("SphereGrid: resolution below the exactness bound");
        gauss_legendre(n_lat, x, w);
        theta.resize(n_lat);
        sin_theta.resize(n_lat);
        for (int j = 0; j < n_lat; ++j) {
            theta[j] = std::acos(x[j]);
            sin_theta[j] = std::sqrt(1.0 - x[j] * x[j]);
        }
        lon.resize(n_lon);
        for (int i = 0; i < n_lon; ++i) lon[i] = 2.0 * kPi * i / n_lon;
    }

    std::size_t size() const {
        return static_cast<std::size_t>(n_lat) * static_cast<std::size_t>(n_lon);
    }

    bool compatible(const SphereGrid& o) const {
        return lmax == o.lmax && n_lat == o.n_lat && n_lon == o.n_lon;
    }
};

}  // namespace psd
