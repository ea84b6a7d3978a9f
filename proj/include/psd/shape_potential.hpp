#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "psd/errors.hpp"
#include "psd/shape_space.hpp"
#include "psd/spherical_harmonics.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Shape potential: the scale-free part of a potential homogeneous in the
// scale variable R = sqrt(I_cm),
//
//     V_phys(x) = V(q) * R^homogeneity            (gravity: homogeneity = -1).
//
// The equation of state is written with the exponent of the zero-energy
// constraint D^2 + p^2 + 2 V(q) R^(homogeneity+2) = 0, so
//
//     kappa = p^2 / R^kappa_degree,   kappa_degree = homogeneity + 2,
//
// and the branch root is sqrt(-(1 + 2V/kappa)).
// ---------------------------------------------------------------------------

class ShapePotential {
public:
    virtual ~ShapePotential() = default;

    /// V(q) at the unit shape vector n (evaluated on the I_cm = 1 shell).
    virtual double value(Vec3 n) const = 0;

    /// Euclidean gradient of the extension of V to n-space; callers project
    /// tangentially.
    virtual Vec3 gradient(Vec3 n) const = 0;

    virtual double homogeneity() const = 0;

    double kappa_degree() const { return homogeneity() + 2.0; }

    /// Metric gradient at a chart point, orthonormal-frame components
    /// (V_1 along e_theta, V_2 along e_lon); |grad V|_g^2 = V1^2 + V2^2.
    void frame_gradient(const ChartCoords& q, double& v1, double& v2) const {
        const Vec3 n = chart_to_unit(q);
        const Vec3 g = gradient(n);
        Vec3 et, el;
        chart_frame(q, et, el);
        // d/dtheta V(n(theta,lon)) = grad . dn/dtheta = grad . et, etc.;
        // metric frame of the radius-1/2 sphere scales by 1/r = 2
        v1 = 2.0 * g.dot(et);
        v2 = 2.0 * g.dot(el);
    }

    /// Riemannian gradient as an embedded tangent vector at X = n/2 on the
    /// radius-1/2 sphere (Euclidean-induced metric): 2 P_n grad.
    Vec3 embedded_gradient(Vec3 n) const {
        const Vec3 g = gradient(n);
        const Vec3 tang = g - n * g.dot(n);
        return 2.0 * tang;
    }
};

/// Scale-free Newton potential on the 3-body shape sphere:
/// V(n) = -sum m_i m_j / r_ij(n) with r_ij^2 affine in n.
class GravityShapePotential final : public ShapePotential {
public:
    explicit GravityShapePotential(std::vector<double> masses)
        : masses_(std::move(masses)), forms_(pair_distance_forms(masses_)) {}

    double value(Vec3 n) const override {
        double v = 0.0;
        for (const auto& f : forms_) {
            const double r2 = f.r2(n);
            if (!(r2 > 0.0))
                throw SingularPotentialError("GravityShapePotential: collision point");
            v -= masses_[f.i] * masses_[f.j] / std::sqrt(r2);
        }
        return v;
    }

    Vec3 gradient(Vec3 n) const override {
        Vec3 g{};
        for (const auto& f : forms_) {
            const double r2 = f.r2(n);
            if (!(r2 > 0.0))
                throw SingularPotentialError("GravityShapePotential: collision point");
            const double w = masses_[f.i] * masses_[f.j] / (2.0 * r2 * std::sqrt(r2));
            g += w * f.b;
        }
        return g;
    }

    double homogeneity() const override { return -1.0; }

    /// Smallest inter-particle distance on the I_cm = 1 shell at shape n.
    double min_pair_distance(Vec3 n) const {
        double r2min = std::numeric_limits<double>::infinity();
        for (const auto& f : forms_) r2min = std::min(r2min, f.r2(n));
        return std::sqrt(std::max(0.0, r2min));
    }

    const std::vector<double>& masses() const { return masses_; }

private:
    std::vector<double> masses_;
    std::array<PairDistanceForm, 3> forms_;
};

/// Plummer-softened Newton potential on the shape sphere:
/// V(n) = -sum m_i m_j / sqrt(r_ij(n)^2 + softening^2), with the softening
/// length fixed on the unit-inertia shell so the homogeneity in R is
/// unchanged. The field equations need a potential with a convergent
/// spherical-harmonic tail; the bare collision singularities do not have one.
class SoftenedGravityShapePotential final : public ShapePotential {
public:
    SoftenedGravityShapePotential(std::vector<double> masses, double softening)
        : masses_(std::move(masses)),
          forms_(pair_distance_forms(masses_)),
          soft2_(softening * softening) {}

    double value(Vec3 n) const override {
        double v = 0.0;
        for (const auto& f : forms_)
            v -= masses_[f.i] * masses_[f.j] / std::sqrt(f.r2(n) + soft2_);
        return v;
    }

    Vec3 gradient(Vec3 n) const override {
        Vec3 g{};
        for (const auto& f : forms_) {
            const double r2 = f.r2(n) + soft2_;
            g += (masses_[f.i] * masses_[f.j] / (2.0 * r2 * std::sqrt(r2))) * f.b;
        }
        return g;
    }

    double homogeneity() const override { return -1.0; }

private:
    std::vector<double> masses_;
    std::array<PairDistanceForm, 3> forms_;
    double soft2_;
};

/// Band-limited projection of another shape potential: value and gradient
/// evaluated from a spherical-harmonic expansion sampled on a grid. This is
/// the potential the spectrally discretized quantum equations actually see;
/// using it on the classical side as well makes quantum/classical
/// cross-comparisons internally consistent at finite resolution.
class SpectralShapePotential final : public ShapePotential {
public:
    SpectralShapePotential(const ShapePotential& base,
                           std::shared_ptr<const SphereTransform> transform)
        : transform_(std::move(transform)), homogeneity_(base.homogeneity()) {
        const auto& grid = transform_->grid();
        std::vector<double> samples(grid.size());
        for (int j = 0; j < grid.n_lat; ++j)
            for (int i = 0; i < grid.n_lon; ++i)
                samples[static_cast<std::size_t>(j) * grid.n_lon + i] = base.value(
                    chart_to_unit({grid.theta[j], grid.lon[i]}));
        coeffs_ = transform_->analysis(samples);
        grid_values_ = transform_->synthesis(coeffs_);
    }

    double value(Vec3 n) const override {
        const ChartCoords q = unit_to_chart(n);
        return transform_->point_eval(coeffs_, q.theta, q.lon);
    }

    /// Tangential (unit-sphere) gradient; the radial extension is immaterial
    /// for the projected uses in frame_gradient/embedded_gradient.
    Vec3 gradient(Vec3 n) const override {
        const ChartCoords q = unit_to_chart(n);
        const auto g = transform_->point_gradient(coeffs_, q.theta, q.lon);
        Vec3 et, el;
        chart_frame(q, et, el);
        return g.d_theta * et + g.d_lon * el;
    }

    double homogeneity() const override { return homogeneity_; }

    const std::vector<double>& coeffs() const { return coeffs_; }
    /// Band-limited samples on the transform grid.
    const std::vector<double>& grid_values() const { return grid_values_; }
    const std::shared_ptr<const SphereTransform>& transform() const { return transform_; }

private:
    std::shared_ptr<const SphereTransform> transform_;
    double homogeneity_;
    std::vector<double> coeffs_;
    std::vector<double> grid_values_;
};

/// Constant potential (geodesic limit of the equation of state when
/// kappa = -2V). The homogeneity degree is configurable for tests.
class ConstantShapePotential final : public ShapePotential {
public:
    explicit ConstantShapePotential(double value, double homogeneity = -1.0)
        : value_(value), homogeneity_(homogeneity) {}

    double value(Vec3) const override { return value_; }
    Vec3 gradient(Vec3) const override { return {}; }
    double homogeneity() const override { return homogeneity_; }

private:
    double value_;
    double homogeneity_;
};

}  // namespace psd
