#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "psd/errors.hpp"
#include "psd/sphere_grid.hpp"
#include "psd/util.hpp"

namespace psd {

// ---------------------------------------------------------------------------
// Real spherical harmonics, orthonormal on the unit sphere:
//   Y_{l0} = P~_{l0},  Y_{lm}^c = sqrt2 P~_{lm} cos(m lon),
//   Y_{lm}^s = sqrt2 P~_{lm} sin(m lon),
// with P~ the 4pi-orthonormalized associated Legendre functions (no
// Condon-Shortley phase). Coefficient layout: k(l,0) = l^2,
// k(l,m,cos) = l^2 + 2m - 1, k(l,m,sin) = l^2 + 2m.
// ---------------------------------------------------------------------------

inline int sh_coeff_count(int lmax) { return (lmax + 1) * (lmax + 1); }

inline int sh_index(int l, int m, bool sin_part = false) {
    return m == 0 ? l * l : l * l + 2 * m - (sin_part ? 0 : 1);
}

namespace detail {

/// Packed (l, m>=0) index into triangular Legendre tables.
inline int plm_index(int lmax, int l, int m) {
    (void)lmax;
    return l * (l + 1) / 2 + m;
}

/// Normalized associated Legendre ladder at one colatitude.
/// p: P~_lm; q (optional): P~_lm / sin(theta) for m >= 1 (pole-safe);
/// dp (optional): d P~_lm / d theta.
inline void legendre_row(int lmax, double ct, double st, std::vector<double>& p,
                         std::vector<double>* q, std::vector<double>* dp) {
    const int count = (lmax + 1) * (lmax + 2) / 2;
    p.assign(count, 0.0);
    if (q) q->assign(count, 0.0);
    if (dp) dp->assign(count, 0.0);
    const double c00 = 0.28209479177387814;  // 1/sqrt(4 pi)

    // diagonal ladders: pmm carries sin^m, qmm carries sin^(m-1)
    double pmm = c00;
    double qmm = c00;  // P~_mm / sin^min(m,1)
    for (int m = 0; m <= lmax; ++m) {
        const int im = plm_index(lmax, m, m);
        p[im] = pmm;
        if (q) (*q)[im] = (m == 0) ? 0.0 : qmm;
        // dP~_mm/dtheta = m * ct * (P~_mm / st); safe via qmm for m >= 1
        if (dp) (*dp)[im] = (m == 0) ? 0.0 : m * ct * qmm;

        double prev = pmm;        // P~_{l-1, m}
        double prev2 = 0.0;       // P~_{l-2, m}
        double qprev = (m == 0) ? 0.0 : qmm;
        double qprev2 = 0.0;
        for (int l = m + 1; l <= lmax; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) /
                                       (static_cast<double>(l) * l - m * m));
            const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) /
                                       (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
            const double cur = a * (ct * prev - b * prev2);
            const int il = plm_index(lmax, l, m);
            p[il] = cur;
            double qcur = 0.0;
            if (m >= 1) {
                qcur = a * (ct * qprev - b * qprev2);
                if (q) (*q)[il] = qcur;
            }
            if (dp) {
                // dP/dtheta = (l ct P_l - c_l P_{l-1}) / st, with the m>=1
                // branch evaluated through the sin-reduced ladder
                const double c = std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) *
                                           (static_cast<double>(l) * l - m * m));
                if (m >= 1)
                    (*dp)[il] = l * ct * qcur - c * qprev;
                else
                    (*dp)[il] = (st > 1e-14) ? (l * ct * cur - c * prev) / st : 0.0;
            }
            prev2 = prev;
            prev = cur;
            qprev2 = qprev;
            qprev = qcur;
        }

        if (m < lmax) {
            const double f = std::sqrt((2.0 * m + 3.0) / (2.0 * (m + 1.0)));
            if (m == 0) qmm = f * pmm;       // first sin power absorbed
            else qmm = f * st * qmm;
            pmm = f * st * pmm;
        }
    }
}

}  // namespace detail

/// Point gradient of a scalar on the unit sphere, orthonormal-frame
/// components (d/dtheta, d/dlon / sin(theta)).
struct SphereGradient {
    double d_theta = 0.0;
    double d_lon = 0.0;
};

/// Precomputed spherical-harmonic transform on a SphereGrid.
class SphereTransform {
public:
    explicit SphereTransform(int lmax, int n_lat = 0, int n_lon = 0)
        : grid_(lmax, n_lat, n_lon) {
        build_tables();
    }

    explicit SphereTransform(SphereGrid grid) : grid_(std::move(grid)) {
        build_tables();
    }

    const SphereGrid& grid() const { return grid_; }
    int lmax() const { return grid_.lmax; }
    int coeff_count() const { return sh_coeff_count(grid_.lmax); }

    /// Forward transform (quadrature analysis) of grid values [j*n_lon + i].
    std::vector<double> analysis(const std::vector<double>& values) const {
        check_size(values);
        const int L = grid_.lmax, nlat = grid_.n_lat, nlon = grid_.n_lon;
        std::vector<double> coeffs(coeff_count(), 0.0);
        std::vector<double> fc(static_cast<std::size_t>(nlat) * (L + 1));
        std::vector<double> fs(static_cast<std::size_t>(nlat) * (L + 1));
        const double dlon = 2.0 * kPi / nlon;
        for (int j = 0; j < nlat; ++j) {
            const double* row = values.data() + static_cast<std::size_t>(j) * nlon;
            for (int m = 0; m <= L; ++m) {
                double ac = 0.0, as = 0.0;
                const double* cm = cos_table(m);
                const double* sm = sin_table(m);
                for (int i = 0; i < nlon; ++i) {
                    ac += row[i] * cm[i];
                    as += row[i] * sm[i];
                }
                fc[j * (L + 1) + m] = ac * dlon;
                fs[j * (L + 1) + m] = as * dlon;
            }
        }
        const double sqrt2 = std::sqrt(2.0);
        for (int j = 0; j < nlat; ++j) {
            const double wj = grid_.w[j];
            const double* pj = plm_row(j);
            for (int m = 0; m <= L; ++m) {
                const double a = fc[j * (L + 1) + m];
                const double b = fs[j * (L + 1) + m];
                for (int l = m; l <= L; ++l) {
                    const double plm = pj[detail::plm_index(L, l, m)];
                    if (m == 0) {
                        coeffs[sh_index(l, 0)] += wj * plm * a;
                    } else {
                        coeffs[sh_index(l, m, false)] += wj * sqrt2 * plm * a;
                        coeffs[sh_index(l, m, true)] += wj * sqrt2 * plm * b;
                    }
                }
            }
        }
        return coeffs;
    }

    /// Inverse transform: coefficients to grid values.
    std::vector<double> synthesis(const std::vector<double>& coeffs) const {
        check_coeffs(coeffs);
        const int L = grid_.lmax, nlat = grid_.n_lat, nlon = grid_.n_lon;
        std::vector<double> values(grid_.size(), 0.0);
        const double sqrt2 = std::sqrt(2.0);
        std::vector<double> am(L + 1), bm(L + 1);
        for (int j = 0; j < nlat; ++j) {
            const double* pj = plm_row(j);
            for (int m = 0; m <= L; ++m) {
                double a = 0.0, b = 0.0;
                for (int l = m; l <= L; ++l) {
                    const double plm = pj[detail::plm_index(L, l, m)];
                    if (m == 0) {
                        a += plm * coeffs[sh_index(l, 0)];
                    } else {
                        a += sqrt2 * plm * coeffs[sh_index(l, m, false)];
                        b += sqrt2 * plm * coeffs[sh_index(l, m, true)];
                    }
                }
                am[m] = a;
                bm[m] = b;
            }
            double* row = values.data() + static_cast<std::size_t>(j) * nlon;
            for (int i = 0; i < nlon; ++i) {
                double acc = am[0];
                for (int m = 1; m <= L; ++m)
                    acc += am[m] * cos_table(m)[i] + bm[m] * sin_table(m)[i];
                row[i] = acc;
            }
        }
        return values;
    }

    /// Gradient synthesis on the grid, unit-sphere orthonormal frame.
    void synthesis_gradient(const std::vector<double>& coeffs,
                            std::vector<double>& d_theta,
                            std::vector<double>& d_lon) const {
        check_coeffs(coeffs);
        const int L = grid_.lmax, nlat = grid_.n_lat, nlon = grid_.n_lon;
        d_theta.assign(grid_.size(), 0.0);
        d_lon.assign(grid_.size(), 0.0);
        const double sqrt2 = std::sqrt(2.0);
        std::vector<double> am(L + 1), bm(L + 1), aq(L + 1), bq(L + 1);
        for (int j = 0; j < nlat; ++j) {
            const double* dpj = dplm_row(j);
            const double* qj = qlm_row(j);
            for (int m = 0; m <= L; ++m) {
                double a = 0.0, b = 0.0, qa = 0.0, qb = 0.0;
                for (int l = m; l <= L; ++l) {
                    const int k = detail::plm_index(L, l, m);
                    if (m == 0) {
                        a += dpj[k] * coeffs[sh_index(l, 0)];
                    } else {
                        a += sqrt2 * dpj[k] * coeffs[sh_index(l, m, false)];
                        b += sqrt2 * dpj[k] * coeffs[sh_index(l, m, true)];
                        qa += sqrt2 * qj[k] * coeffs[sh_index(l, m, false)];
                        qb += sqrt2 * qj[k] * coeffs[sh_index(l, m, true)];
                    }
                }
                am[m] = a;
                bm[m] = b;
                aq[m] = qa;
                bq[m] = qb;
            }
            double* rt = d_theta.data() + static_cast<std::size_t>(j) * nlon;
            double* rl = d_lon.data() + static_cast<std::size_t>(j) * nlon;
            for (int i = 0; i < nlon; ++i) {
                double gt = am[0];
                double gl = 0.0;
                for (int m = 1; m <= L; ++m) {
                    const double c = cos_table(m)[i], s = sin_table(m)[i];
                    gt += am[m] * c + bm[m] * s;
                    gl += m * (bq[m] * c - aq[m] * s);
                }
                rt[i] = gt;
                rl[i] = gl;
            }
        }
    }

    /// Spectral Laplace-Beltrami of the UNIT sphere: multiply by -l(l+1).
    std::vector<double> laplacian_coeffs(std::vector<double> coeffs) const {
        check_coeffs(coeffs);
        for (int l = 0; l <= grid_.lmax; ++l) {
            const double ev = -static_cast<double>(l) * (l + 1);
            coeffs[sh_index(l, 0)] *= ev;
            for (int m = 1; m <= l; ++m) {
                coeffs[sh_index(l, m, false)] *= ev;
                coeffs[sh_index(l, m, true)] *= ev;
            }
        }
        return coeffs;
    }

    /// Evaluate the expansion at an arbitrary point.
    double point_eval(const std::vector<double>& coeffs, double theta,
                      double lon) const {
        check_coeffs(coeffs);
        const int L = grid_.lmax;
        std::vector<double> p;
        detail::legendre_row(L, std::cos(theta), std::sin(theta), p, nullptr, nullptr);
        const double sqrt2 = std::sqrt(2.0);
        double acc = 0.0;
        for (int m = 0; m <= L; ++m) {
            double a = 0.0, b = 0.0;
            for (int l = m; l <= L; ++l) {
                const double plm = p[detail::plm_index(L, l, m)];
                if (m == 0) a += plm * coeffs[sh_index(l, 0)];
                else {
                    a += sqrt2 * plm * coeffs[sh_index(l, m, false)];
                    b += sqrt2 * plm * coeffs[sh_index(l, m, true)];
                }
            }
            acc += (m == 0) ? a : a * std::cos(m * lon) + b * std::sin(m * lon);
        }
        return acc;
    }

    /// Gradient at an arbitrary point, unit-sphere orthonormal frame.
    SphereGradient point_gradient(const std::vector<double>& coeffs, double theta,
                                  double lon) const {
        check_coeffs(coeffs);
        const int L = grid_.lmax;
        const double st = std::sin(theta);
        if (st < 0.03) return point_gradient_fd(coeffs, theta, lon);
        std::vector<double> p, q, dp;
        detail::legendre_row(L, std::cos(theta), st, p, &q, &dp);
        const double sqrt2 = std::sqrt(2.0);
        SphereGradient g;
        for (int m = 0; m <= L; ++m) {
            double at = 0.0, bt = 0.0, aq = 0.0, bq = 0.0;
            for (int l = m; l <= L; ++l) {
                const int k = detail::plm_index(L, l, m);
                if (m == 0) {
                    at += dp[k] * coeffs[sh_index(l, 0)];
                } else {
                    at += sqrt2 * dp[k] * coeffs[sh_index(l, m, false)];
                    bt += sqrt2 * dp[k] * coeffs[sh_index(l, m, true)];
                    aq += sqrt2 * q[k] * coeffs[sh_index(l, m, false)];
                    bq += sqrt2 * q[k] * coeffs[sh_index(l, m, true)];
                }
            }
            const double c = std::cos(m * lon), s = std::sin(m * lon);
            g.d_theta += at * c + bt * s;
            if (m >= 1) g.d_lon += m * (bq * c - aq * s);
        }
        return g;
    }

    /// Integral over the unit sphere (d Omega) by grid quadrature.
    double integrate(const std::vector<double>& values) const {
        check_size(values);
        const int nlat = grid_.n_lat, nlon = grid_.n_lon;
        const double dlon = 2.0 * kPi / nlon;
        double acc = 0.0;
        for (int j = 0; j < nlat; ++j) {
            double row = 0.0;
            const double* r = values.data() + static_cast<std::size_t>(j) * nlon;
            for (int i = 0; i < nlon; ++i) row += r[i];
            acc += grid_.w[j] * row;
        }
        return acc * dlon;
    }

private:
    void build_tables() {
        const int L = grid_.lmax, nlat = grid_.n_lat, nlon = grid_.n_lon;
        const int tri = (L + 1) * (L + 2) / 2;
        plm_.resize(static_cast<std::size_t>(nlat) * tri);
        qlm_.resize(static_cast<std::size_t>(nlat) * tri);
        dplm_.resize(static_cast<std::size_t>(nlat) * tri);
        std::vector<double> p, q, dp;
        for (int j = 0; j < nlat; ++j) {
            detail::legendre_row(L, grid_.x[j], grid_.sin_theta[j], p, &q, &dp);
            std::copy(p.begin(), p.end(), plm_.begin() + static_cast<std::size_t>(j) * tri);
            std::copy(q.begin(), q.end(), qlm_.begin() + static_cast<std::size_t>(j) * tri);
            std::copy(dp.begin(), dp.end(), dplm_.begin() + static_cast<std::size_t>(j) * tri);
        }
        cos_.resize(static_cast<std::size_t>(L + 1) * nlon);
        sin_.resize(static_cast<std::size_t>(L + 1) * nlon);
        for (int m = 0; m <= L; ++m)
            for (int i = 0; i < nlon; ++i) {
                cos_[static_cast<std::size_t>(m) * nlon + i] = std::cos(m * grid_.lon[i]);
                sin_[static_cast<std::size_t>(m) * nlon + i] = std::sin(m * grid_.lon[i]);
            }
    }

    SphereGradient point_gradient_fd(const std::vector<double>& coeffs, double theta,
                                     double lon) const {
        // near the poles evaluate along two orthogonal great circles through
        // the point; plain synthesis stays smooth where the analytic ladder
        // formulas cancel. The chart frame below is orthonormal for every
        // theta, so the returned components remain (d/dtheta, d/dlon/sin).
        const Vec3 n{std::sin(theta) * std::cos(lon), std::sin(theta) * std::sin(lon),
                     std::cos(theta)};
        const Vec3 e1{std::cos(theta) * std::cos(lon), std::cos(theta) * std::sin(lon),
                      -std::sin(theta)};
        const Vec3 e2{-std::sin(lon), std::cos(lon), 0.0};
        const double h = 1e-4;
        auto eval_dir = [&](Vec3 e) {
            const Vec3 np = (std::cos(h) * n + std::sin(h) * e).normalized();
            const Vec3 nm = (std::cos(h) * n - std::sin(h) * e).normalized();
            const auto cp = unit_vec_angles(np);
            const auto cm = unit_vec_angles(nm);
            return (point_eval(coeffs, cp.first, cp.second) -
                    point_eval(coeffs, cm.first, cm.second)) /
                   (2.0 * h);
        };
        return {eval_dir(e1), eval_dir(e2)};
    }

    static std::pair<double, double> unit_vec_angles(Vec3 n) {
        double lon = std::atan2(n.y, n.x);
        if (lon < 0) lon += 2.0 * kPi;
        return {std::acos(std::clamp(n.z, -1.0, 1.0)), lon};
    }

    void check_size(const std::vector<double>& values) const {
        if (values.size() != grid_.size())
            throw ShapeMismatchError("SphereTransform: grid value count mismatch");
    }
    void check_coeffs(const std::vector<double>& coeffs) const {
        if (static_cast<int>(coeffs.size()) != coeff_count())
            throw ShapeMismatchError("SphereTransform: coefficient count mismatch");
    }

    const double* plm_row(int j) const {
        return plm_.data() + static_cast<std::size_t>(j) * (grid_.lmax + 1) * (grid_.lmax + 2) / 2;
    }
    const double* qlm_row(int j) const {
        return qlm_.data() + static_cast<std::size_t>(j) * (grid_.lmax + 1) * (grid_.lmax + 2) / 2;
    }
    const double* dplm_row(int j) const {
        return dplm_.data() + static_cast<std::size_t>(j) * (grid_.lmax + 1) * (grid_.lmax + 2) / 2;
    }
    const double* cos_table(int m) const {
        return cos_.data() + static_cast<std::size_t>(m) * grid_.n_lon;
    }
    const double* sin_table(int m) const {
        return sin_.data() + static_cast<std::size_t>(m) * grid_.n_lon;
    }

    SphereGrid grid_;
    std::vector<double> plm_, qlm_, dplm_;
    std::vector<double> cos_, sin_;
};

}  // namespace psd
