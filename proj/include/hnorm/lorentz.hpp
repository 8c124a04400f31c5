#pragma once

// Hyperboloid model helpers. Minkowski form <a,b> = -a0 b0 + a1 b1 + a2 b2 + a3 b3.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace hnorm::lorentz {

using Vec4 = Eigen::Vector4d;

inline double dot(const Vec4& a, const Vec4& b) {
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

// Rescale a future-timelike vector onto the hyperboloid <X,X> = -1.
inline Vec4 normalize(const Vec4& x) {
    return x / std::sqrt(-dot(x, x));
}

inline double distance(const Vec4& p, const Vec4& q) {
    double c = -dot(p, q);
    return c <= 1.0 ? 0.0 : std::acosh(c);
}

// Null vector of the boundary point zeta in the upper half-space picture.
inline Vec4 null_point(std::complex<double> zeta) {
    double r2 = std::norm(zeta);
    return Vec4((1.0 + r2) / 2.0, (r2 - 1.0) / 2.0, zeta.real(), zeta.imag());
}

inline Vec4 null_infinity() { return Vec4(1.0, 1.0, 0.0, 0.0); }

// Horospherical chart centred at the ideal point represented by ell.
// X(x,y,z) = (m + x e1 + y e2 + (x^2+y^2)/2 ell)/z + (z/2) ell, with <m,ell> = -1,
// e1, e2 orthonormal and orthogonal to both m and ell. The horosphere {<X,ell> = -1}
// is the level z = 1.
struct HoroChart {
    Vec4 ell, m, e1, e2;

    Vec4 point(double x, double y, double z) const {
        return (m + x * e1 + y * e2 + 0.5 * (x * x + y * y) * ell) / z + 0.5 * z * ell;
    }
    // (x, y, z) of a point on (or a positive multiple of a point on) the hyperboloid.
    Eigen::Vector3d coords(const Vec4& X) const {
        double z = -1.0 / dot(X, ell);
        return Eigen::Vector3d(dot(X, e1) * z, dot(X, e2) * z, z);
    }
    // Horizontal coordinate of another ideal point.
    Eigen::Vector2d boundary_coords(const Vec4& null_vec) const {
        double kappa = -dot(null_vec, ell);
        return Eigen::Vector2d(dot(null_vec, e1) / kappa, dot(null_vec, e2) / kappa);
    }
};

// Chart whose origin is the ideal point `other`.
inline HoroChart make_chart(const Vec4& ell, const Vec4& other) {
    HoroChart c;
    c.ell = ell;
    c.m = other / (-dot(ell, other));
    // Gram-Schmidt against span{ell, m} in the Minkowski form, seeded with coordinate axes.
    auto project = [&](Vec4 v) {
        // v - a ell - b m with <v', ell> = <v', m> = 0; <ell,m> = -1, <ell,ell> = <m,m> = 0.
        double ve = dot(v, c.ell), vm = dot(v, c.m);
        return Vec4(v + vm * c.ell + ve * c.m);
    };
    Vec4 basis[4] = {Vec4(0, 1, 0, 0), Vec4(0, 0, 1, 0), Vec4(0, 0, 0, 1), Vec4(1, 0, 0, 0)};
    int found = 0;
    Vec4 out[2];
    for (const auto& b : basis) {
        Vec4 v = project(b);
        for (int k = 0; k < found; ++k) v -= dot(v, out[k]) * out[k];
        double n2 = dot(v, v);
        if (n2 > 1e-8) {
            out[found++] = v / std::sqrt(n2);
            if (found == 2) break;
        }
    }
    c.e1 = out[0];
    c.e2 = out[1];
    return c;
}

}  // namespace hnorm::lorentz
