#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"
#include "hnorm/lorentz.hpp"
#include "hnorm/mesh.hpp"

namespace hnorm {

namespace {

using lorentz::dot;

cplx vertex_position(cplx z, int u) {
    switch (u) {
        case 1:
            return 0.0;
        case 2:
            return 1.0;
        default:
            return z;
    }
}

Vec4 raw_null(cplx z, int u) { return u == 0 ? lorentz::null_infinity() : lorentz::null_point(vertex_position(z, u)); }

double heron(double a, double b, double c) {
    double s = 0.5 * (a + b + c);
    double q = s * (s - a) * (s - b) * (s - c);
    return q > 0 ? std::sqrt(q) : 0.0;
}

// Horocyclic triangle at vertex v of an ideal tetrahedron, on the horosphere <X, ell_v> = -1.
double horo_triangle_area(const std::array<Vec4, 4>& ell, int v) {
    int o[3], n = 0;
    for (int u = 0; u < 4; ++u)
        if (u != v) o[n++] = u;
    auto A = [&](int x, int y) { return -dot(ell[x], ell[y]); };
    auto h = [&](int b, int c) { return std::sqrt(2.0 * A(b, c) / (A(v, b) * A(v, c))); };
    return heron(h(o[0], o[1]), h(o[0], o[2]), h(o[1], o[2]));
}

double circumradius(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    double A = (b - c).norm(), B = (a - c).norm(), C = (a - b).norm();
    double area = heron(A, B, C);
    return A * B * C / (4.0 * area);
}

std::array<int, 4> inverse_perm(const std::array<int, 4>& p) {
    std::array<int, 4> q{};
    for (int i = 0; i < 4; ++i) q[p[i]] = i;
    return q;
}

struct RPoint {
    Vec4 X;
    std::array<double, 4> w;
    int tag;
};

struct RTet {
    int src;
    std::array<RPoint, 4> p;
};

class HyperbolicModel : public AssemblyModel {
public:
    HyperbolicModel(const TriangulatedManifold& M, const Combinatorics& C, const IdealFrames& F,
                    const std::vector<std::array<lorentz::HoroChart, 4>>& charts, double z_top)
        : C_(C), charts_(charts), z_top_(z_top) {
        const int n = M.num_tets();
        binv_.resize(n);
        for (int t = 0; t < n; ++t) {
            Eigen::Matrix4d B;
            for (int u = 0; u < 4; ++u) B.col(u) = F.ell[t][u];
            binv_[t] = B.inverse();
        }
        inv_perm_.resize(C.face_pairs.size());
        for (size_t k = 0; k < C.face_pairs.size(); ++k) inv_perm_[k] = inverse_perm(C.face_pairs[k].perm);
    }

    PointKey key(int src, const Vec4& X) const override {
        Eigen::Vector4d mu = binv_[src] * X;
        double mx = mu.maxCoeff();
        int supp[4], n = 0;
        for (int u = 0; u < 4; ++u)
            if (mu[u] > 1e-9 * mx) supp[n++] = u;
        PointKey k;
        k.type = n;
        if (n == 4) {
            k.id = src;
            k.dim = 4;
            for (int u = 0; u < 4; ++u) k.c[u] = mu[u];
        } else if (n == 3) {
            int d = 6 - supp[0] - supp[1] - supp[2];
            int fp = C_.face_pair_of[src][d];
            k.id = fp;
            k.dim = 4;
            if (C_.face_side[src][d] == 0) {
                for (int u = 0; u < 4; ++u) k.c[u] = u == d ? 0.0 : mu[u];
            } else {
                const auto& ip = inv_perm_[fp];
                for (int w = 0; w < 4; ++w) k.c[ip[w]] = w == d ? 0.0 : mu[w];
            }
        } else if (n == 2) {
            int a = supp[0], b = supp[1];
            int e = local_edge_index(a, b);
            k.id = C_.edge_class[src][e];
            k.dim = 2;
            bool forward = C_.edge_sign[src][e] > 0;
            k.c[0] = forward ? mu[a] : mu[b];
            k.c[1] = forward ? mu[b] : mu[a];
        } else {
            throw MeshError("mesh point too close to an ideal vertex", src);
        }
        return k;
    }

    Vec4 combine(const Vec4* X, const double* w, int n) const override {
        Vec4 r = Vec4::Zero();
        for (int i = 0; i < n; ++i) r += w[i] * X[i];
        return lorentz::normalize(r);
    }

    double distance(const Vec4& A, const Vec4& B) const override {
        Vec4 D = A - B;
        double q = std::max(0.0, dot(D, D));
        return 2.0 * std::asinh(0.5 * std::sqrt(q));
    }

    std::pair<int, double> boundary_of(const AsmTet& t, const std::array<int, 3>& loc) const override {
        int v = t.tag[loc[0]];
        if (v < 0 || t.tag[loc[1]] != v || t.tag[loc[2]] != v) return {-1, 0.0};
        for (int i : loc) {
            double z = charts_[t.source][v].coords(t.X[i])[2];
            if (std::abs(z - z_top_) > 1e-9 * z_top_) return {-1, 0.0};
        }
        return {C_.vertex_class[t.source][v], z_top_};
    }

    std::pair<int, double> vertex_info(const AsmTet& t, int local) const override {
        int v = t.tag[local];
        if (v < 0) return {-1, 0.0};
        return {C_.vertex_class[t.source][v], charts_[t.source][v].coords(t.X[local])[2]};
    }

private:
    const Combinatorics& C_;
    const std::vector<std::array<lorentz::HoroChart, 4>>& charts_;
    double z_top_;
    std::vector<Eigen::Matrix4d> binv_;
    std::vector<std::array<int, 4>> inv_perm_;
};

}  // namespace

IdealFrames ideal_frames(const TriangulatedManifold& M) {
    const int n = M.num_tets();
    Combinatorics C = analyze_combinatorics(M);
    if (static_cast<int>(M.cusps.size()) != C.num_cusps)
        throw ValidationError("cusp data count does not match the number of vertex classes");
    std::vector<std::array<Vec4, 4>> raw(n);
    for (int t = 0; t < n; ++t)
        for (int u = 0; u < 4; ++u) raw[t][u] = raw_null(M.shapes[t], u);
    auto A = [&](int t, int x, int y) { return -dot(raw[t][x], raw[t][y]); };

    // log scale of ell_{t,u} relative to the raw null vector, propagated along face gluings.
    std::vector<std::array<double, 4>> logs(n, {0, 0, 0, 0});
    std::vector<std::array<char, 4>> seen(n, {0, 0, 0, 0});
    IdealFrames out;
    auto log_c = [&](int t, int f, int a) {
        const auto& g = M.gluings[t][f];
        int o[2], k = 0;
        for (int v = 0; v < 4; ++v)
            if (v != f && v != a) o[k++] = v;
        int b = o[0], c = o[1];
        auto E = [&](int x, int y) { return std::log(A(t, x, y) / A(g.tet, g.perm[x], g.perm[y])); };
        return 0.5 * (E(a, b) + E(a, c) - E(b, c));
    };
    for (int t0 = 0; t0 < n; ++t0)
        for (int v0 = 0; v0 < 4; ++v0) {
            if (seen[t0][v0]) continue;
            std::deque<std::pair<int, int>> q;
            q.push_back({t0, v0});
            seen[t0][v0] = 1;
            while (!q.empty()) {
                auto [t, a] = q.front();
                q.pop_front();
                for (int f = 0; f < 4; ++f) {
                    if (f == a) continue;
                    const auto& g = M.gluings[t][f];
                    int t2 = g.tet, a2 = g.perm[a];
                    double want = logs[t][a] + log_c(t, f, a);
                    if (!seen[t2][a2]) {
                        seen[t2][a2] = 1;
                        logs[t2][a2] = want;
                        q.push_back({t2, a2});
                    } else {
                        out.scale_residual = std::max(out.scale_residual, std::abs(logs[t2][a2] - want));
                    }
                }
            }
        }
    out.ell.resize(n);
    for (int t = 0; t < n; ++t)
        for (int u = 0; u < 4; ++u) out.ell[t][u] = std::exp(logs[t][u]) * raw[t][u];
    // Normalise each cusp so that the horosphere <X, ell> = -1 has the ingested cross-section area.
    std::vector<double> area(C.num_cusps, 0.0);
    for (int t = 0; t < n; ++t)
        for (int v = 0; v < 4; ++v) area[C.vertex_class[t][v]] += horo_triangle_area(out.ell[t], v);
    for (int t = 0; t < n; ++t)
        for (int v = 0; v < 4; ++v) {
            int c = C.vertex_class[t][v];
            out.ell[t][v] *= std::sqrt(area[c] / M.cusps[c].area);
        }
    return out;
}

MetricMesh build_metric_mesh(const TriangulatedManifold& M, double T, int refinement, const HyperbolicMeshOptions& opt) {
    if (M.kind != ManifoldKind::Ideal) throw PreconditionError("hyperbolic mesh requires an ideal triangulation");
    if (refinement < 0 || refinement > opt.max_refinement)
        throw PreconditionError("refinement must lie in [0, " + std::to_string(opt.max_refinement) + "]");
    if (M.cusps.empty()) throw PreconditionError("ideal triangulation without cusps");
    TruncationConstants tc = truncation_constants(M, M.tau0);
    if (T < tc.tau - 1e-12)
        throw PreconditionError("truncation height " + std::to_string(T) + " is below tau = " + std::to_string(tc.tau));
    if (!(opt.neck_ratio > 1.0)) throw PreconditionError("neck ratio must exceed 1");

    const int n = M.num_tets();
    Combinatorics C = analyze_combinatorics(M);
    IdealFrames F = ideal_frames(M);
    if (F.scale_residual > 1e-6)
        throw ValidationError("shapes do not define a consistent cusp structure (scale residual " +
                              std::to_string(F.scale_residual) + ")");

    std::vector<std::array<lorentz::HoroChart, 4>> charts(n);
    std::vector<std::array<std::array<Eigen::Vector2d, 4>, 4>> pos(n);
    // Maximal horoballs may touch, so the cores stop strictly below them.
    std::vector<double> z_base(C.num_cusps, opt.neck_ratio);
    for (int t = 0; t < n; ++t)
        for (int v = 0; v < 4; ++v) {
            int other = v == 0 ? 1 : 0;
            charts[t][v] = lorentz::make_chart(F.ell[t][v], F.ell[t][other]);
            int o[3], k = 0;
            for (int u = 0; u < 4; ++u)
                if (u != v) {
                    pos[t][v][u] = charts[t][v].boundary_coords(F.ell[t][u]);
                    o[k++] = u;
                }
            double R = circumradius(pos[t][v][o[0]], pos[t][v][o[1]], pos[t][v][o[2]]);
            int c = C.vertex_class[t][v];
            z_base[c] = std::max(z_base[c], R * opt.core_margin);
        }
    const double z_top = std::exp(T);
    // Shortest horizontal edge of each cusp triangulation (Euclidean, at height 1).
    std::vector<double> h_min(C.num_cusps, std::numeric_limits<double>::infinity());
    for (int t = 0; t < n; ++t)
        for (int v = 0; v < 4; ++v)
            for (int u = 0; u < 4; ++u)
                for (int w = u + 1; w < 4; ++w)
                    if (u != v && w != v)
                        h_min[C.vertex_class[t][v]] = std::min(h_min[C.vertex_class[t][v]], (pos[t][v][u] - pos[t][v][w]).norm());
    // Layer spacing dz = min(z log(rho), kappa h): geometric low in the neck, uniform higher up,
    // so that neck prisms stay close to isotropic.
    std::vector<std::vector<double>> layers(C.num_cusps);
    const double lr = std::log(opt.neck_ratio);
    for (int c = 0; c < C.num_cusps; ++c) {
        if (!(z_top > z_base[c] * 1.0001))
            throw PreconditionError("truncation height lies inside the tetrahedron cores for cusp " + std::to_string(c));
        const double step = opt.neck_spacing * h_min[c];
        const double z_star = std::max(z_base[c], step / lr);
        auto coord = [&](double z) {
            if (z <= z_star) return std::log(z / z_base[c]) / lr;
            return std::log(z_star / z_base[c]) / lr + (z - z_star) / step;
        };
        auto inverse = [&](double sc) {
            const double s_star = coord(z_star);
            if (sc <= s_star) return z_base[c] * std::exp(sc * lr);
            return z_star + (sc - s_star) * step;
        };
        const double total = coord(z_top);
        const int m = std::max(1, static_cast<int>(std::ceil(total - 1e-9)));
        layers[c].resize(m + 1);
        for (int j = 0; j <= m; ++j) layers[c][j] = inverse(total * j / m);
        layers[c][0] = z_base[c];
        layers[c][m] = z_top;
    }

    std::vector<RTet> tets;
    auto unit = [](int v) {
        std::array<double, 4> w{0, 0, 0, 0};
        w[v] = 1.0;
        return w;
    };
    auto chart_point = [&](int t, int v, int u, double z) {
        const auto& p = pos[t][v][u];
        return RPoint{charts[t][v].point(p[0], p[1], z), unit(v), v};
    };
    for (int t = 0; t < n; ++t) {
        const auto& ell = F.ell[t];
        RPoint O{lorentz::normalize(ell[0] + ell[1] + ell[2] + ell[3]), {0.25, 0.25, 0.25, 0.25}, -1};
        auto corner = [&](int v, int u) { return chart_point(t, v, u, z_base[C.vertex_class[t][v]]); };
        for (int d = 0; d < 4; ++d) {
            int a, b, c;
            {
                int o[3], k = 0;
                for (int u = 0; u < 4; ++u)
                    if (u != d) o[k++] = u;
                a = o[0];
                b = o[1];
                c = o[2];
            }
            std::array<double, 4> wf{0, 0, 0, 0};
            wf[a] = wf[b] = wf[c] = 1.0 / 3.0;
            RPoint Fc{lorentz::normalize(ell[a] + ell[b] + ell[c]), wf, -1};
            RPoint H[6] = {corner(a, b), corner(b, a), corner(b, c), corner(c, b), corner(c, a), corner(a, c)};
            for (int i = 0; i < 6; ++i) tets.push_back(RTet{t, {O, Fc, H[i], H[(i + 1) % 6]}});
        }
        for (int v = 0; v < 4; ++v) {
            int o[3], k = 0;
            for (int u = 0; u < 4; ++u)
                if (u != v) o[k++] = u;
            tets.push_back(RTet{t, {O, corner(v, o[0]), corner(v, o[1]), corner(v, o[2])}});
        }
        // Neck prisms over the truncation triangle at each vertex.
        for (int v = 0; v < 4; ++v) {
            int o[3], k = 0;
            for (int u = 0; u < 4; ++u)
                if (u != v) o[k++] = u;
            const auto& zs = layers[C.vertex_class[t][v]];
            // before[i][j]: the quad between lines o[i], o[j] takes its bottom vertex on o[i].
            bool before[3][3] = {};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    if (i == j) continue;
                    int w = 6 - v - o[i] - o[j];
                    int fp = C.face_pair_of[t][w];
                    int li = o[i], lj = o[j];
                    if (C.face_side[t][w] == 1) {
                        auto ip = inverse_perm(C.face_pairs[fp].perm);
                        li = ip[li];
                        lj = ip[lj];
                    }
                    before[i][j] = li < lj;
                }
            // A topological order exists unless the three diagonals form a cycle.
            std::array<int, 3> ord{0, 1, 2};
            bool acyclic = false;
            do {
                if (before[ord[0]][ord[1]] && before[ord[0]][ord[2]] && before[ord[1]][ord[2]]) {
                    acyclic = true;
                    break;
                }
            } while (std::next_permutation(ord.begin(), ord.end()));
            for (size_t j = 0; j + 1 < zs.size(); ++j) {
                auto bot = [&](int i) { return chart_point(t, v, o[i], zs[j]); };
                auto top = [&](int i) { return chart_point(t, v, o[i], zs[j + 1]); };
                if (acyclic) {
                    int x = ord[0], y = ord[1], z = ord[2];
                    tets.push_back(RTet{t, {bot(x), bot(y), bot(z), top(z)}});
                    tets.push_back(RTet{t, {bot(x), bot(y), top(y), top(z)}});
                    tets.push_back(RTet{t, {bot(x), top(x), top(y), top(z)}});
                } else {
                    Eigen::Vector2d mid = Eigen::Vector2d::Zero();
                    for (int i = 0; i < 3; ++i) mid += pos[t][v][o[i]] / 3.0;
                    RPoint P{charts[t][v].point(mid[0], mid[1], std::sqrt(zs[j] * zs[j + 1])), unit(v), v};
                    tets.push_back(RTet{t, {P, bot(0), bot(1), bot(2)}});
                    tets.push_back(RTet{t, {P, top(0), top(1), top(2)}});
                    for (int i = 0; i < 3; ++i)
                        for (int jj = i + 1; jj < 3; ++jj) {
                            int lo = before[i][jj] ? i : jj, hi = before[i][jj] ? jj : i;
                            tets.push_back(RTet{t, {P, bot(lo), bot(hi), top(hi)}});
                            tets.push_back(RTet{t, {P, bot(lo), top(lo), top(hi)}});
                        }
                }
            }
        }
    }

    HyperbolicModel model(M, C, F, charts, z_top);
    model.tolerance = 1e-8;
    auto midpoint = [&](int src, const RPoint& P, const RPoint& Q) {
        RPoint R;
        for (int a = 0; a < 4; ++a) R.w[a] = 0.5 * (P.w[a] + Q.w[a]);
        if (P.tag >= 0 && P.tag == Q.tag) {
            const auto& ch = charts[src][P.tag];
            Eigen::Vector3d p = ch.coords(P.X), q = ch.coords(Q.X);
            R.X = ch.point(0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), std::sqrt(p[2] * q[2]));
            R.tag = P.tag;
        } else {
            R.X = lorentz::normalize(P.X + Q.X);
            R.tag = -1;
        }
        return R;
    };
    for (int r = 0; r < refinement; ++r) {
        std::vector<RTet> next;
        next.reserve(tets.size() * 8);
        for (const auto& T0 : tets) {
            RPoint m[4][4];
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) m[i][j] = m[j][i] = midpoint(T0.src, T0.p[i], T0.p[j]);
            for (int i = 0; i < 4; ++i) {
                RTet c{T0.src, {}};
                for (int j = 0; j < 4; ++j) c.p[j] = i == j ? T0.p[i] : m[i][j];
                next.push_back(c);
            }
            // Octahedron split along its shortest diagonal.
            const int diag[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
            int best = 0;
            double bl = 1e300;
            for (int k = 0; k < 3; ++k) {
                double l = model.distance(m[diag[k][0]][diag[k][1]].X, m[diag[k][2]][diag[k][3]].X);
                if (l < bl) bl = l, best = k;
            }
            int i = diag[best][0], j = diag[best][1], k = diag[best][2], l = diag[best][3];
            const RPoint& A = m[i][j];
            const RPoint& B = m[k][l];
            const RPoint* eq[4] = {&m[i][k], &m[i][l], &m[j][l], &m[j][k]};
            for (int s = 0; s < 4; ++s) next.push_back(RTet{T0.src, {A, B, *eq[s], *eq[(s + 1) % 4]}});
        }
        tets.swap(next);
    }

    std::vector<AsmTet> asmtets;
    asmtets.reserve(tets.size());
    for (const auto& rt : tets) {
        AsmTet a;
        a.source = rt.src;
        for (int i = 0; i < 4; ++i) {
            a.X[i] = rt.p[i].X;
            a.w[i] = rt.p[i].w;
            a.tag[i] = rt.p[i].tag;
        }
        asmtets.push_back(a);
    }
    tets.clear();
    tets.shrink_to_fit();
    MetricMesh mesh = assemble_mesh(asmtets, model, "hyperbolic");
    check_mesh(mesh);
    if (mesh.num_boundary_components != C.num_cusps)
        throw MeshError("boundary faces do not form one torus per cusp");
    return mesh;
}

}  // namespace hnorm
