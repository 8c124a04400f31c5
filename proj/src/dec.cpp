#include "hnorm/dec.hpp"

#include <cmath>

#include "hnorm/errors.hpp"

namespace hnorm {

TetGeometry tet_geometry(const std::array<double, 6>& l) {
    TetGeometry g;
    const double l0[4] = {0.0, l[0], l[1], l[2]};
    auto len = [&](int i, int j) { return l[local_edge_index(std::min(i, j), std::max(i, j))]; };
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j)
            g.gram(i - 1, j - 1) = i == j ? l0[i] * l0[i] : 0.5 * (l0[i] * l0[i] + l0[j] * l0[j] - len(i, j) * len(i, j));
    const double det = g.gram.determinant();
    if (!(det > 0.0)) throw MeshError("degenerate tetrahedron");
    Eigen::LLT<Eigen::Matrix3d> llt(g.gram);
    if (llt.info() != Eigen::Success) throw MeshError("degenerate tetrahedron");
    g.volume = std::sqrt(det) / 6.0;
    g.gram_inv = g.gram.inverse();
    const Eigen::Matrix3d L = llt.matrixL();
    g.position[0].setZero();
    for (int i = 1; i <= 3; ++i) g.position[i] = L.row(i - 1).transpose();
    g.grad_gram.setZero();
    g.grad_gram.block<3, 3>(1, 1) = g.gram_inv;
    for (int i = 1; i <= 3; ++i) {
        double s = -g.gram_inv.row(i - 1).sum();
        g.grad_gram(0, i) = g.grad_gram(i, 0) = s;
    }
    g.grad_gram(0, 0) = g.gram_inv.sum();
    return g;
}

std::vector<TetGeometry> mesh_geometry(const MetricMesh& mesh) {
    std::vector<TetGeometry> out;
    out.reserve(mesh.num_tets());
    for (int t = 0; t < mesh.num_tets(); ++t) {
        try {
            out.push_back(tet_geometry(tet_lengths(mesh, t)));
        } catch (const MeshError&) {
            throw MeshError("degenerate tetrahedron", t);
        }
    }
    return out;
}

Eigen::Vector3d affine_gradient(const TetGeometry& g, const Eigen::Vector3d& x) {
    Eigen::Matrix3d P;
    for (int i = 0; i < 3; ++i) P.row(i) = g.position[i + 1].transpose();
    return P.triangularView<Eigen::Lower>().solve(x);
}

std::array<double, 6> local_edge_values(const MetricMesh& mesh, int t, const std::vector<double>& x) {
    std::array<double, 6> v{};
    for (int e = 0; e < 6; ++e) v[e] = mesh.tets[t].es[e] * x[mesh.tets[t].e[e]];
    return v;
}

namespace {

// Integral of lambda_a lambda_b over the tetrahedron.
inline double bary2(const TetGeometry& g, int a, int b) { return g.volume * (a == b ? 2.0 : 1.0) / 20.0; }

}  // namespace

Eigen::Matrix4d whitney_mass0(const TetGeometry& g) {
    Eigen::Matrix4d M;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) M(a, b) = bary2(g, a, b);
    return M;
}

Eigen::Matrix<double, 6, 6> whitney_mass1(const TetGeometry& g) {
    const Eigen::Matrix4d& D = g.grad_gram;
    Eigen::Matrix<double, 6, 6> M;
    for (int e = 0; e < 6; ++e) {
        const int i = kEdgeVerts[e][0], j = kEdgeVerts[e][1];
        for (int f = 0; f < 6; ++f) {
            const int k = kEdgeVerts[f][0], l = kEdgeVerts[f][1];
            M(e, f) = bary2(g, i, k) * D(j, l) - bary2(g, i, l) * D(j, k) - bary2(g, j, k) * D(i, l) +
                      bary2(g, j, l) * D(i, k);
        }
    }
    return M;
}

Eigen::Matrix4d whitney_mass2(const TetGeometry& g) {
    const Eigen::Matrix4d& D = g.grad_gram;
    // (grad a x grad b) . (grad c x grad d)
    auto cross_dot = [&](int a, int b, int c, int d) { return D(a, c) * D(b, d) - D(a, d) * D(b, c); };
    struct Term {
        int lam, p, q;
    };
    std::array<std::array<Term, 3>, 4> terms;
    for (int f = 0; f < 4; ++f) {
        int v[3], k = 0;
        for (int i = 0; i < 4; ++i)
            if (i != f) v[k++] = i;
        terms[f] = {{{v[0], v[1], v[2]}, {v[1], v[2], v[0]}, {v[2], v[0], v[1]}}};
    }
    Eigen::Matrix4d M;
    for (int f = 0; f < 4; ++f)
        for (int h = 0; h < 4; ++h) {
            double s = 0.0;
            for (const Term& a : terms[f])
                for (const Term& b : terms[h]) s += bary2(g, a.lam, b.lam) * cross_dot(a.p, a.q, b.p, b.q);
            M(f, h) = 4.0 * s;
        }
    return M;
}

Eigen::Vector3d whitney1_at(const TetGeometry& g, const std::array<double, 6>& x, const std::array<double, 4>& b) {
    // Gradients of barycentric coordinates in the embedding: rows of the inverse position matrix.
    Eigen::Matrix3d P;
    for (int i = 0; i < 3; ++i) P.row(i) = g.position[i + 1].transpose();
    const Eigen::Matrix3d Pinv = P.inverse();
    std::array<Eigen::Vector3d, 4> grad;
    for (int i = 1; i <= 3; ++i) grad[i] = Pinv.col(i - 1);
    grad[0] = -(grad[1] + grad[2] + grad[3]);
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    for (int e = 0; e < 6; ++e) {
        const int i = kEdgeVerts[e][0], j = kEdgeVerts[e][1];
        w += x[e] * (b[i] * grad[j] - b[j] * grad[i]);
    }
    return w;
}

DecOperators dec_operators(const MetricMesh& mesh) {
    const auto geo = mesh_geometry(mesh);
    const int V = mesh.num_vertices, E = mesh.num_edges(), F = mesh.num_faces(), T = mesh.num_tets();
    DecOperators ops;
    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> t0, t1, t2;
    for (int e = 0; e < E; ++e) {
        t0.emplace_back(e, mesh.edges[e].v[1], 1.0);
        t0.emplace_back(e, mesh.edges[e].v[0], -1.0);
    }
    for (int f = 0; f < F; ++f) {
        const MeshFace& fc = mesh.faces[f];
        t1.emplace_back(f, fc.e[0], fc.es[0]);
        t1.emplace_back(f, fc.e[1], -fc.es[1]);
        t1.emplace_back(f, fc.e[2], fc.es[2]);
    }
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < 4; ++i) t2.emplace_back(t, mesh.tets[t].f[i], (i % 2 == 0 ? 1.0 : -1.0) * mesh.tets[t].fs[i]);
    ops.d0.resize(E, V);
    ops.d0.setFromTriplets(t0.begin(), t0.end());
    ops.d1.resize(F, E);
    ops.d1.setFromTriplets(t1.begin(), t1.end());
    ops.d2.resize(T, F);
    ops.d2.setFromTriplets(t2.begin(), t2.end());

    std::vector<Trip> m0, m1, m2;
    ops.tet_volume.resize(T);
    for (int t = 0; t < T; ++t) {
        const MeshTet& mt = mesh.tets[t];
        const TetGeometry& g = geo[t];
        ops.tet_volume[t] = g.volume;
        const Eigen::Matrix4d A = whitney_mass0(g);
        const auto B = whitney_mass1(g);
        const Eigen::Matrix4d C = whitney_mass2(g);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                m0.emplace_back(mt.v[a], mt.v[b], A(a, b));
                m2.emplace_back(mt.f[a], mt.f[b], mt.fs[a] * mt.fs[b] * C(a, b));
            }
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) m1.emplace_back(mt.e[a], mt.e[b], mt.es[a] * mt.es[b] * B(a, b));
    }
    ops.M0.resize(V, V);
    ops.M0.setFromTriplets(m0.begin(), m0.end());
    ops.M1.resize(E, E);
    ops.M1.setFromTriplets(m1.begin(), m1.end());
    ops.M2.resize(F, F);
    ops.M2.setFromTriplets(m2.begin(), m2.end());
    return ops;
}

const std::array<QuadraturePoint, 4>& tet_quadrature() {
    static const std::array<QuadraturePoint, 4> rule = [] {
        const double a = 0.5854101966249685, b = 0.1381966011250105;
        std::array<QuadraturePoint, 4> r;
        for (int i = 0; i < 4; ++i) {
            r[i].bary = {b, b, b, b};
            r[i].bary[i] = a;
            r[i].weight = 0.25;
        }
        return r;
    }();
    return rule;
}

}  // namespace hnorm
