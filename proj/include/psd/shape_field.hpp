#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "psd/shape_space.hpp"
#include "psd/spherical_harmonics.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Real scalar field on the discretized shape sphere. Values live on the
// Gauss-Legendre x uniform-longitude grid; derivatives are spectral. The
// metric volume element is d mu = (1/4) d Omega (radius-1/2 sphere), and the
// Laplace-Beltrami operator is 4x the unit-sphere one.
// ---------------------------------------------------------------------------

struct ShapeField {
    std::shared_ptr<const SphereTransform> transform;
    std::vector<double> values;

    ShapeField() = default;
    ShapeField(std::shared_ptr<const SphereTransform> t, std::vector<double> v)
        : transform(std::move(t)), values(std::move(v)) {
        if (values.size() != transform->grid().size())
            throw ShapeMismatchError("ShapeField: value count does not match grid");
    }

    static ShapeField zeros(std::shared_ptr<const SphereTransform> t) {
        std::vector<double> v(t->grid().size(), 0.0);
        return ShapeField(std::move(t), std::move(v));
    }

    static ShapeField constant(std::shared_ptr<const SphereTransform> t, double c) {
        std::vector<double> v(t->grid().size(), c);
        return ShapeField(std::move(t), std::move(v));
    }

    /// Sample a function of the chart coordinates.
    static ShapeField from_function(std::shared_ptr<const SphereTransform> t,
                                    const std::function<double(double, double)>& f) {
        const SphereGrid& g = t->grid();
        std::vector<double> v(g.size());
        for (int j = 0; j < g.n_lat; ++j)
            for (int i = 0; i < g.n_lon; ++i)
                v[static_cast<std::size_t>(j) * g.n_lon + i] = f(g.theta[j], g.lon[i]);
        return ShapeField(std::move(t), std::move(v));
    }

    /// Sample a function of the unit embedding vector n.
    static ShapeField from_unit_function(std::shared_ptr<const SphereTransform> t,
                                         const std::function<double(Vec3)>& f) {
        return from_function(std::move(t), [&](double theta, double lon) {
            return f(chart_to_unit({theta, lon}));
        });
    }

    std::size_t size() const { return values.size(); }

    bool compatible(const ShapeField& o) const {
        return transform && o.transform && transform->grid().compatible(o.transform->grid());
    }

    void require_compatible(const ShapeField& o) const {
        if (!compatible(o))
            throw ShapeMismatchError("ShapeField: incompatible discretizations");
    }

    // -- field algebra -------------------------------------------------------

    ShapeField& operator+=(const ShapeField& o) {
        require_compatible(o);
        for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
        return *this;
    }
    ShapeField& operator-=(const ShapeField& o) {
        require_compatible(o);
        for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
        return *this;
    }
    ShapeField& operator*=(double s) {
        for (double& v : values) v *= s;
        return *this;
    }
    friend ShapeField operator+(ShapeField a, const ShapeField& b) { return a += b; }
    friend ShapeField operator-(ShapeField a, const ShapeField& b) { return a -= b; }
    friend ShapeField operator*(ShapeField a, double s) { return a *= s; }
    friend ShapeField operator*(double s, ShapeField a) { return a *= s; }

    // -- integrals and spectral operations -----------------------------------

    /// Integral against the metric volume element d mu = (1/4) d Omega.
    double integrate() const { return 0.25 * transform->integrate(values); }

    /// L2(mu) inner product.
    double inner(const ShapeField& o) const {
        require_compatible(o);
        std::vector<double> prod(values.size());
        for (std::size_t k = 0; k < values.size(); ++k)
            prod[k] = values[k] * o.values[k];
        return 0.25 * transform->integrate(prod);
    }

    double norm_l2() const { return std::sqrt(inner(*this)); }

    std::vector<double> coeffs() const { return transform->analysis(values); }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    double min() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
};

/// Laplace-Beltrami operator of the kinematic shape-sphere metric (radius
/// 1/2, eigenvalues -4 l (l+1)), evaluated spectrally. Linear, annihilates
/// constants, self-adjoint w.r.t. the metric volume element.
inline ShapeField laplace_beltrami(const ShapeField& f, const ShapeMetric& = {}) {
    std::vector<double> c = f.transform->laplacian_coeffs(f.transform->analysis(f.values));
    ShapeField out(f.transform, f.transform->synthesis(c));
    out *= 1.0 / (kSphereRadius * kSphereRadius);
    return out;
}

/// Gradient fields in the metric-orthonormal chart frame (e_theta, e_lon):
/// components have |grad f|_g^2 = V1^2 + V2^2. (Unit-sphere frame components
/// scaled by 1/r = 2.)
inline void metric_gradient(const ShapeField& f, ShapeField& v1, ShapeField& v2) {
    const auto c = f.transform->analysis(f.values);
    std::vector<double> gt, gl;
    f.transform->synthesis_gradient(c, gt, gl);
    const double inv_r = 1.0 / kSphereRadius;
    for (double& v : gt) v *= inv_r;
    for (double& v : gl) v *= inv_r;
    v1 = ShapeField(f.transform, std::move(gt));
    v2 = ShapeField(f.transform, std::move(gl));
}

/// Point values and metric-frame gradient of a spectral expansion.
inline double field_value_at(const ShapeField& f, const ChartCoords& q) {
    return f.transform->point_eval(f.transform->analysis(f.values), q.theta, q.lon);
}

/// Metric-orthonormal gradient components at an arbitrary point, from
/// precomputed coefficients.
inline void coeff_gradient_at(const SphereTransform& t, const std::vector<double>& coeffs,
                              const ChartCoords& q, double& v1, double& v2) {
    const SphereGradient g = t.point_gradient(coeffs, q.theta, q.lon);
    v1 = g.d_theta / kSphereRadius;
    v2 = g.d_lon / kSphereRadius;
}

/// Embedded (R^3) tangent vector of the metric gradient at q.
inline Vec3 coeff_gradient_embedded(const SphereTransform& t,
                                    const std::vector<double>& coeffs,
                                    const ChartCoords& q) {
    double v1, v2;
    coeff_gradient_at(t, coeffs, q, v1, v2);
    Vec3 et, el;
    chart_frame(q, et, el);
    return v1 * et + v2 * el;
}

}  // namespace psd
