#include "hnorm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hnorm/errors.hpp"

namespace hnorm {

double lobachevsky(double theta, double term_tol) {
    // Lambda(theta) = 1/2 sum_k sin(2 k theta) / k^2; terms are bounded by 1/(2k^2).
    const long K = static_cast<long>(std::ceil(std::sqrt(0.5 / term_tol)));
    const double s1 = std::sin(2.0 * theta), c1 = std::cos(2.0 * theta);
    double s = s1, c = c1, sum = 0.0;
    for (long k = 1; k <= K; ++k) {
        sum += s / (static_cast<double>(k) * static_cast<double>(k));
        double sn = s * c1 + c * s1;
        double cn = c * c1 - s * s1;
        s = sn;
        c = cn;
        if ((k & 1023) == 0) {  // re-anchor the recurrence against drift
            s = std::sin(2.0 * (k + 1) * theta);
            c = std::cos(2.0 * (k + 1) * theta);
        }
    }
    return 0.5 * sum;
}

double ideal_tet_volume(cplx z) {
    if (!(z.imag() > 0.0)) throw ValidationError("shape parameter must have positive imaginary part");
    return lobachevsky(std::arg(z)) + lobachevsky(std::arg(1.0 / (1.0 - z))) + lobachevsky(std::arg((z - 1.0) / z));
}

double volume(const TriangulatedManifold& M) {
    if (M.kind == ManifoldKind::FlatTorus) return M.box[0] * M.box[1] * M.box[2];
    double v = 0.0;
    for (auto z : M.shapes) v += ideal_tet_volume(z);
    return v;
}

std::pair<cplx, cplx> reduce_lattice(cplx a, cplx b) {
    if (std::abs(a) < std::abs(b)) std::swap(a, b);
    // Lagrange-Gauss reduction; invariant: |a| >= |b|.
    for (int it = 0; it < 200; ++it) {
        double mu = std::round((a * std::conj(b)).real() / std::norm(b));
        a -= mu * b;
        if (std::abs(a) >= std::abs(b)) break;
        std::swap(a, b);
    }
    return {b, a};
}

double covering_radius(cplx xi, cplx eta) {
    auto [u, v] = reduce_lattice(xi, eta);
    std::vector<cplx> pts;
    const int R = 3;
    for (int i = -R; i <= R; ++i)
        for (int j = -R; j <= R; ++j)
            if (i || j) pts.push_back(double(i) * u + double(j) * v);
    double best = 0.0;
    // Voronoi vertices of the origin are circumcentres of triangles (0, p, q) with no lattice point inside.
    for (size_t a = 0; a < pts.size(); ++a)
        for (size_t b = a + 1; b < pts.size(); ++b) {
            cplx p = pts[a], q = pts[b];
            double d = 2.0 * (p.real() * q.imag() - p.imag() * q.real());
            if (std::abs(d) < 1e-12 * std::norm(p) * std::abs(q)) continue;
            double pn = std::norm(p), qn = std::norm(q);
            cplx c((q.imag() * pn - p.imag() * qn) / d, (p.real() * qn - q.real() * pn) / d);
            double r = std::abs(c);
            bool empty = true;
            for (auto w : pts)
                if (std::abs(c - w) < r * (1.0 - 1e-12)) {
                    empty = false;
                    break;
                }
            if (empty) best = std::max(best, r);
        }
    return best;
}

CuspData cusp_from_translations(cplx xi, cplx eta) {
    double area = std::abs((std::conj(xi) * eta).imag());
    if (area <= 1e-12 * std::abs(xi) * std::abs(eta) || std::abs(xi) == 0.0 || std::abs(eta) == 0.0)
        throw ValidationError("cusp translations are collinear over the reals");
    CuspData c;
    c.xi = xi;
    c.eta = eta;
    c.area = area;
    c.waist = std::abs(reduce_lattice(xi, eta).first);
    c.diameter = covering_radius(xi, eta);
    return c;
}

std::vector<CuspData> cusp_geometry(const TriangulatedManifold& M) {
    std::vector<CuspData> out;
    for (auto& c : M.cusps) out.push_back(cusp_from_translations(c.xi, c.eta));
    return out;
}

TruncationConstants truncation_constants(const TriangulatedManifold& M, double tau0) {
    if (M.cusps.empty()) throw PreconditionError("closed manifold has no truncation constants");
    if (tau0 < 0.0) throw PreconditionError("tau0 must be nonnegative");
    TruncationConstants T;
    T.tau0 = tau0;
    T.L0 = std::exp(tau0);
    for (auto& c : M.cusps) T.L0 = std::max(T.L0, std::abs(c.xi) + std::abs(c.eta));
    T.tau = std::log(3.0 * T.L0);
    return T;
}

ThickThin thick_thin_constants(const TriangulatedManifold& M) {
    ThickThin t;
    t.mu = kMargulis;
    t.systole = M.systole;
    t.no_margulis_tubes = M.systole >= kMargulis;
    return t;
}

}  // namespace hnorm
