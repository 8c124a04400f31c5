#include "hnorm/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "hnorm/errors.hpp"

namespace hnorm {

namespace {

int perm_parity(std::array<int, 3> s) {
    int inv = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (s[i] > s[j]) ++inv;
    return inv % 2 == 0 ? 1 : -1;
}

std::array<int, 3> face_vertices(int f) {
    std::array<int, 3> v{};
    int k = 0;
    for (int i = 0; i < 4; ++i)
        if (i != f) v[k++] = i;
    return v;
}

// Express `col` in the row basis Z (reduced echelon); false when col is not in the span.
bool echelon_coordinates(const IntMatrix& Z, const std::vector<BigInt>& col, std::vector<BigInt>& y) {
    const int m = Z.rows(), n = Z.cols();
    std::vector<BigInt> r = col;
    y.assign(m, 0);
    for (int i = 0; i < m; ++i) {
        int p = 0;
        while (p < n && Z(i, p) == 0) ++p;
        if (p == n) continue;
        if (r[p] % Z(i, p) != 0) return false;
        y[i] = r[p] / Z(i, p);
        if (y[i] != 0)
            for (int c = p; c < n; ++c) r[c] -= y[i] * Z(i, c);
    }
    for (const auto& v : r)
        if (v != 0) return false;
    return true;
}

long long to_ll(const BigInt& b) { return static_cast<long long>(b); }

}  // namespace

HomologyReport homology(const ChainComplex& C, bool with_bases) {
    const int top = static_cast<int>(C.dims.size()) - 1;
    if (top < 0 || std::all_of(C.dims.begin(), C.dims.end(), [](int d) { return d == 0; }))
        throw PreconditionError("empty chain complex");
    auto bd = [&](int k) -> const SparseIntMatrix* {
        if (k < 1 || k > top || k >= static_cast<int>(C.boundary.size())) return nullptr;
        return &C.boundary[k];
    };
    HomologyReport R;
    R.groups.resize(top + 1);
    std::vector<std::vector<BigInt>> factors(top + 2);
    std::vector<int> ranks(top + 2, 0);
    for (int k = 1; k <= top; ++k) {
        if (const auto* B = bd(k)) {
            factors[k] = sparse_invariant_factors(*B);
            ranks[k] = static_cast<int>(factors[k].size());
        }
    }
    for (int k = 0; k <= top; ++k) {
        HomologyGroup& G = R.groups[k];
        G.rank = C.dims[k] - ranks[k] - ranks[k + 1];
        G.incoming_snf = factors[k + 1];
        for (const auto& d : factors[k + 1])
            if (d > 1) G.torsion.push_back(d);
        if (!with_bases || G.rank == 0) continue;

        IntMatrix Z = bd(k) ? integer_kernel_rows(bd(k)->to_dense()) : IntMatrix::identity(C.dims[k]);
        const int m = Z.rows();
        const int next = k + 1 <= top ? C.dims[k + 1] : 0;
        IntMatrix Bc(m, next);
        if (next > 0 && bd(k + 1)) {
            IntMatrix D = bd(k + 1)->to_dense();
            for (int c = 0; c < next; ++c) {
                std::vector<BigInt> y;
                if (!echelon_coordinates(Z, D.column(c), y))
                    throw Error("boundary operators do not compose to zero");
                for (int i = 0; i < m; ++i) Bc(i, c) = y[i];
            }
        }
        SmithForm S = smith_normal_form(Bc);
        for (int i = S.rank(); i < m; ++i) {
            std::vector<BigInt> chain(C.dims[k], 0);
            for (int j = 0; j < m; ++j) {
                const BigInt& g = S.Uinv(j, i);
                if (g == 0) continue;
                for (int c = 0; c < C.dims[k]; ++c) chain[c] += g * Z(j, c);
            }
            G.free_basis.push_back(std::move(chain));
        }
    }
    return R;
}

ChainComplex relative_complex(const TriangulatedManifold& M) {
    if (M.kind != ManifoldKind::Ideal) throw PreconditionError("relative complex needs an ideal triangulation");
    const Combinatorics C = analyze_combinatorics(M);
    const int n = M.num_tets();
    const int nf = static_cast<int>(C.face_pairs.size());
    const int ne = static_cast<int>(C.edge_cycles.size());
    ChainComplex X;
    X.dims = {0, ne, nf, n};
    X.boundary.resize(4);
    X.boundary[1] = SparseIntMatrix(0, ne);
    X.boundary[2] = SparseIntMatrix(ne, nf);
    X.boundary[3] = SparseIntMatrix(nf, n);
    for (int p = 0; p < nf; ++p) {
        const FacePair& fp = C.face_pairs[p];
        auto v = face_vertices(fp.face0);
        const int t = fp.tet0;
        auto add_edge = [&](int a, int b, int sgn) {
            int e = local_edge_index(a, b);
            X.boundary[2].add(C.edge_class[t][e], p, sgn * C.edge_sign[t][e]);
        };
        add_edge(v[1], v[2], 1);
        add_edge(v[0], v[2], -1);
        add_edge(v[0], v[1], 1);
    }
    for (int t = 0; t < n; ++t) {
        for (int f = 0; f < 4; ++f) {
            const int p = C.face_pair_of[t][f];
            const FacePair& fp = C.face_pairs[p];
            int s = 1;
            if (C.face_side[t][f] == 1) {
                std::array<int, 4> inv{};
                for (int i = 0; i < 4; ++i) inv[fp.perm[i]] = i;
                auto w = face_vertices(f);
                s = perm_parity({inv[w[0]], inv[w[1]], inv[w[2]]});
            }
            X.boundary[3].add(p, t, (f % 2 == 0 ? 1 : -1) * s);
        }
    }
    return X;
}

ChainComplex spine_complex(const TriangulatedManifold& M) {
    if (M.kind != ManifoldKind::Ideal) throw PreconditionError("spine complex needs an ideal triangulation");
    const Combinatorics C = analyze_combinatorics(M);
    const int n = M.num_tets();
    const int nf = static_cast<int>(C.face_pairs.size());
    const int ne = static_cast<int>(C.edge_cycles.size());
    ChainComplex S;
    S.dims = {n, nf, ne};
    S.boundary.resize(3);
    S.boundary[1] = SparseIntMatrix(n, nf);
    S.boundary[2] = SparseIntMatrix(nf, ne);
    // Dual edge of a face pair runs from tet0 to tet1; the dual polygon of an edge class
    // follows its walk.
    for (int p = 0; p < nf; ++p) {
        S.boundary[1].add(C.face_pairs[p].tet1, p, 1);
        S.boundary[1].add(C.face_pairs[p].tet0, p, -1);
    }
    for (int k = 0; k < ne; ++k)
        for (size_t j = 0; j < C.edge_cycles[k].size(); ++j) {
            const int t = C.edge_cycles[k][j].tet, f = C.edge_cycle_face[k][j];
            S.boundary[2].add(C.face_pair_of[t][f], k, C.face_side[t][f] == 0 ? 1 : -1);
        }
    return S;
}

ChainComplex mesh_complex(const MetricMesh& mesh) {
    ChainComplex X;
    const int V = mesh.num_vertices, E = mesh.num_edges(), F = mesh.num_faces(), T = mesh.num_tets();
    X.dims = {V, E, F, T};
    X.boundary.resize(4);
    X.boundary[1] = SparseIntMatrix(V, E);
    X.boundary[2] = SparseIntMatrix(E, F);
    X.boundary[3] = SparseIntMatrix(F, T);
    for (int e = 0; e < E; ++e) {
        X.boundary[1].add(mesh.edges[e].v[1], e, 1);
        X.boundary[1].add(mesh.edges[e].v[0], e, -1);
    }
    for (int f = 0; f < F; ++f) {
        const MeshFace& fc = mesh.faces[f];
        X.boundary[2].add(fc.e[0], f, fc.es[0]);
        X.boundary[2].add(fc.e[1], f, -fc.es[1]);
        X.boundary[2].add(fc.e[2], f, fc.es[2]);
    }
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < 4; ++i) X.boundary[3].add(mesh.tets[t].f[i], t, (i % 2 == 0 ? 1 : -1) * mesh.tets[t].fs[i]);
    return X;
}

namespace {

struct BoundaryCells {
    std::vector<char> vertex, edge, face;
};

BoundaryCells boundary_cells(const MetricMesh& mesh) {
    BoundaryCells B;
    B.vertex.assign(mesh.num_vertices, 0);
    B.edge.assign(mesh.num_edges(), 0);
    B.face.assign(mesh.num_faces(), 0);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        if (mesh.face_boundary.empty() || mesh.face_boundary[f] < 0) continue;
        B.face[f] = 1;
        for (int i = 0; i < 3; ++i) {
            B.edge[mesh.faces[f].e[i]] = 1;
            B.vertex[mesh.faces[f].v[i]] = 1;
        }
    }
    return B;
}

std::vector<int> renumber(const std::vector<char>& drop, int& count) {
    std::vector<int> id(drop.size(), -1);
    count = 0;
    for (size_t i = 0; i < drop.size(); ++i)
        if (!drop[i]) id[i] = count++;
    return id;
}

}  // namespace

ChainComplex mesh_relative_complex(const MetricMesh& mesh) {
    const BoundaryCells B = boundary_cells(mesh);
    int V, E, F;
    auto vid = renumber(B.vertex, V);
    auto eid = renumber(B.edge, E);
    auto fid = renumber(B.face, F);
    const int T = mesh.num_tets();
    ChainComplex X;
    X.dims = {V, E, F, T};
    X.boundary.resize(4);
    X.boundary[1] = SparseIntMatrix(V, E);
    X.boundary[2] = SparseIntMatrix(E, F);
    X.boundary[3] = SparseIntMatrix(F, T);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (eid[e] < 0) continue;
        if (vid[mesh.edges[e].v[1]] >= 0) X.boundary[1].add(vid[mesh.edges[e].v[1]], eid[e], 1);
        if (vid[mesh.edges[e].v[0]] >= 0) X.boundary[1].add(vid[mesh.edges[e].v[0]], eid[e], -1);
    }
    for (int f = 0; f < mesh.num_faces(); ++f) {
        if (fid[f] < 0) continue;
        const MeshFace& fc = mesh.faces[f];
        const int sg[3] = {1, -1, 1};
        for (int i = 0; i < 3; ++i)
            if (eid[fc.e[i]] >= 0) X.boundary[2].add(eid[fc.e[i]], fid[f], sg[i] * fc.es[i]);
    }
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < 4; ++i)
            if (fid[mesh.tets[t].f[i]] >= 0)
                X.boundary[3].add(fid[mesh.tets[t].f[i]], t, (i % 2 == 0 ? 1 : -1) * mesh.tets[t].fs[i]);
    return X;
}

std::optional<std::vector<int>> mesh_orientation(const MetricMesh& mesh) {
    const int T = mesh.num_tets();
    std::vector<std::vector<std::pair<int, int>>> by_face(mesh.num_faces());  // (tet, induced sign)
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < 4; ++i) by_face[mesh.tets[t].f[i]].push_back({t, (i % 2 == 0 ? 1 : -1) * mesh.tets[t].fs[i]});
    std::vector<int> eps(T, 0);
    for (int root = 0; root < T; ++root) {
        if (eps[root]) continue;
        eps[root] = 1;
        std::deque<int> q{root};
        while (!q.empty()) {
            const int t = q.front();
            q.pop_front();
            for (int i = 0; i < 4; ++i) {
                const auto& inc = by_face[mesh.tets[t].f[i]];
                if (inc.size() != 2) continue;
                // Interior faces must cancel: eps_a s_a + eps_b s_b = 0.
                const auto [ta, sa] = inc[0];
                const auto [tb, sb] = inc[1];
                if (ta == tb) {
                    if (sa + sb != 0) return std::nullopt;
                    continue;
                }
                const int other = ta == t ? tb : ta;
                const int need = -eps[t] * sa * sb;
                if (eps[other] == 0) {
                    eps[other] = need;
                    q.push_back(other);
                } else if (eps[other] != need) {
                    return std::nullopt;
                }
            }
        }
    }
    return eps;
}

int mesh_image_rank(const MetricMesh& mesh) {
    const ChainComplex X = mesh_complex(mesh);
    const HomologyReport H = homology(X);
    if (!mesh.has_boundary()) return H.betti(2);
    const auto eps = mesh_orientation(mesh);
    // Non-orientable boundary components carry no integral fundamental class.
    if (!eps) return H.betti(2);
    // Rows of the transposed boundary map plus one row per boundary torus cycle.
    SparseIntMatrix D(mesh.num_tets(), mesh.num_faces());
    for (int r = 0; r < X.boundary[3].rows; ++r)
        for (auto [c, v] : X.boundary[3].row_entries[r]) D.add(c, r, v);
    const int base = sparse_rank(D);
    SparseIntMatrix W(mesh.num_tets() + mesh.num_boundary_components, mesh.num_faces());
    W.row_entries = D.row_entries;
    W.row_entries.resize(W.rows);
    for (int t = 0; t < mesh.num_tets(); ++t)
        for (int i = 0; i < 4; ++i) {
            const int f = mesh.tets[t].f[i];
            const int c = mesh.face_boundary[f];
            if (c >= 0) W.add(mesh.num_tets() + c, f, (*eps)[t] * (i % 2 == 0 ? 1 : -1) * mesh.tets[t].fs[i]);
        }
    const int tori = sparse_rank(W) - base;
    return H.betti(2) - tori;
}

// ---- Edge cocycles ------------------------------------------------------------------------

std::vector<long long> ImageSubspace::cocycle(int i) const {
    std::vector<long long> phi(num_edges, 0);
    for (size_t j = 0; j < free_edges.size(); ++j) phi[free_edges[j]] = to_ll(basis(i, static_cast<int>(j)));
    return phi;
}

ImageSubspace image_subspace(const TriangulatedManifold& M) {
    if (M.kind != ManifoldKind::Ideal) throw PreconditionError("edge cocycles need an ideal triangulation");
    const Combinatorics C = analyze_combinatorics(M);
    ImageSubspace S;
    S.num_edges = static_cast<int>(C.edge_cycles.size());
    S.num_cusps = C.num_cusps;
    S.edge_tail.resize(S.num_edges);
    S.edge_head.resize(S.num_edges);
    for (int k = 0; k < S.num_edges; ++k) {
        const EdgeOccurrence& o = C.edge_cycles[k].front();
        S.edge_tail[k] = C.vertex_class[o.tet][o.a];
        S.edge_head[k] = C.vertex_class[o.tet][o.b];
    }
    // Spanning tree of the cusp graph, breadth first from cusp 0.
    std::vector<char> reached(S.num_cusps, 0), in_tree(S.num_edges, 0);
    std::deque<int> queue;
    if (S.num_cusps > 0) {
        reached[0] = 1;
        queue.push_back(0);
    }
    while (!queue.empty()) {
        int c = queue.front();
        queue.pop_front();
        for (int k = 0; k < S.num_edges; ++k) {
            int a = S.edge_tail[k], b = S.edge_head[k];
            int other = a == c ? b : (b == c ? a : -1);
            if (other < 0 || reached[other]) continue;
            reached[other] = 1;
            in_tree[k] = 1;
            queue.push_back(other);
        }
    }
    for (int k = 0; k < S.num_edges; ++k) (in_tree[k] ? S.tree_edges : S.free_edges).push_back(k);

    const ChainComplex R = relative_complex(M);
    const IntMatrix d2 = R.boundary[2].to_dense();  // edges x faces
    S.delta1 = d2.transpose();
    IntMatrix restricted(S.delta1.rows(), static_cast<int>(S.free_edges.size()));
    for (int r = 0; r < S.delta1.rows(); ++r)
        for (size_t j = 0; j < S.free_edges.size(); ++j) restricted(r, static_cast<int>(j)) = S.delta1(r, S.free_edges[j]);
    S.basis = integer_kernel_rows(restricted);
    return S;
}

bool is_cocycle(const ImageSubspace& S, const std::vector<long long>& phi) {
    if (static_cast<int>(phi.size()) != S.num_edges) return false;
    for (int r = 0; r < S.delta1.rows(); ++r) {
        BigInt acc = 0;
        for (int c = 0; c < S.num_edges; ++c) acc += S.delta1(r, c) * phi[c];
        if (acc != 0) return false;
    }
    return true;
}

std::vector<double> class_coordinates(const ImageSubspace& S, const std::vector<long long>& phi) {
    if (!is_cocycle(S, phi)) throw DomainError("edge values do not form a cocycle");
    // Gauge away the tree edges: phi - delta0 f vanishes on the tree.
    std::vector<long long> f(S.num_cusps, 0);
    std::vector<char> known(S.num_cusps, 0);
    if (S.num_cusps > 0) known[0] = 1;
    bool progress = true;
    while (progress) {
        progress = false;
        for (int k : S.tree_edges) {
            int a = S.edge_tail[k], b = S.edge_head[k];
            if (known[a] && !known[b]) {
                f[b] = f[a] + phi[k];
                known[b] = 1;
                progress = true;
            } else if (known[b] && !known[a]) {
                f[a] = f[b] - phi[k];
                known[a] = 1;
                progress = true;
            }
        }
    }
    std::vector<BigInt> psi(S.free_edges.size());
    for (size_t j = 0; j < S.free_edges.size(); ++j) {
        int k = S.free_edges[j];
        psi[j] = phi[k] - (f[S.edge_head[k]] - f[S.edge_tail[k]]);
    }
    std::vector<BigInt> y;
    if (!echelon_coordinates(S.basis, psi, y)) throw Error("gauge-fixed cocycle outside the image lattice");
    std::vector<double> out(y.size());
    for (size_t i = 0; i < y.size(); ++i) out[i] = static_cast<double>(y[i]);
    return out;
}

std::vector<long long> cocycle_from_coords(const ImageSubspace& S, const std::vector<long long>& coords) {
    if (static_cast<int>(coords.size()) != S.rank()) throw DomainError("coordinate count does not match the image rank");
    std::vector<long long> phi(S.num_edges, 0);
    for (int i = 0; i < S.rank(); ++i) {
        if (coords[i] == 0) continue;
        auto c = S.cocycle(i);
        for (int k = 0; k < S.num_edges; ++k) phi[k] += coords[i] * c[k];
    }
    return phi;
}

std::vector<long long> peripheral_cocycle(const ImageSubspace& S, int cusp) {
    if (cusp < 0 || cusp >= S.num_cusps) throw DomainError("cusp index out of range");
    std::vector<long long> phi(S.num_edges, 0);
    for (int k = 0; k < S.num_edges; ++k) phi[k] = (S.edge_head[k] == cusp) - (S.edge_tail[k] == cusp);
    return phi;
}

ClassSpace class_space(const TriangulatedManifold& M) {
    ClassSpace S;
    S.kind = M.kind;
    S.box = M.box;
    if (M.kind == ManifoldKind::Ideal) {
        S.image = image_subspace(M);
        const Combinatorics C = analyze_combinatorics(M);
        S.tet_edge_class = C.edge_class;
        S.tet_edge_sign = C.edge_sign;
    }
    return S;
}

std::vector<std::array<double, 4>> tet_potentials(const ClassSpace& S, const std::vector<double>& coords) {
    if (S.kind != ManifoldKind::Ideal) throw PreconditionError("tetrahedron potentials need an ideal triangulation");
    if (static_cast<int>(coords.size()) != S.rank()) throw DomainError("coordinate count does not match the image rank");
    std::vector<double> phi(S.image.num_edges, 0.0);
    for (int i = 0; i < S.rank(); ++i) {
        auto c = S.image.cocycle(i);
        for (int k = 0; k < S.image.num_edges; ++k) phi[k] += coords[i] * static_cast<double>(c[k]);
    }
    std::vector<std::array<double, 4>> u(S.tet_edge_class.size());
    for (size_t t = 0; t < u.size(); ++t) {
        u[t][0] = 0.0;
        for (int a = 1; a < 4; ++a) {
            int e = local_edge_index(0, a);
            u[t][a] = S.tet_edge_sign[t][e] * phi[S.tet_edge_class[t][e]];
        }
    }
    return u;
}

std::vector<double> transfer_cochain(const MetricMesh& mesh, const ClassSpace& S, const std::vector<double>& coords) {
    if (static_cast<int>(coords.size()) != S.rank()) throw DomainError("coordinate count does not match the class rank");
    std::vector<double> x(mesh.num_edges(), 0.0);
    if (S.kind == ManifoldKind::FlatTorus) {
        const std::array<double, 4> u{coords[0] / S.box[0], coords[1] / S.box[1], coords[2] / S.box[2], 0.0};
        for (int k = 0; k < mesh.num_edges(); ++k)
            for (int a = 0; a < 4; ++a) x[k] += mesh.edge_delta[k][a] * u[a];
        return x;
    }
    const auto u = tet_potentials(S, coords);
    for (int k = 0; k < mesh.num_edges(); ++k) {
        const int src = mesh.edge_source[k];
        if (src < 0) continue;
        for (int a = 0; a < 4; ++a) x[k] += mesh.edge_delta[k][a] * u[src][a];
    }
    return x;
}

// ---- Dual surfaces ------------------------------------------------------------------------

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

struct PointKeyHash {
    size_t operator()(const std::array<long long, 3>& k) const {
        return std::hash<long long>()(k[0] * 1000003LL ^ (k[1] * 7919LL) ^ (k[2] << 20));
    }
};

}  // namespace

DualSurface dual_surface(const MetricMesh& mesh, const ClassSpace& S, const std::vector<long long>& coords,
                         std::optional<double> level) {
    if (static_cast<int>(coords.size()) != S.rank()) throw DomainError("coordinate count does not match the class rank");
    long long g = 0;
    for (long long c : coords) g = std::gcd(g, std::llabs(c));
    if (g == 0) throw DomainError("the zero class has no dual surface");
    std::vector<double> primitive(coords.size());
    for (size_t i = 0; i < coords.size(); ++i) primitive[i] = static_cast<double>(coords[i] / g);
    return level_surface(mesh, transfer_cochain(mesh, S, primitive), static_cast<int>(g), level);
}

DualSurface level_surface(const MetricMesh& mesh, const std::vector<double>& x, int copies, std::optional<double> level) {
    if (static_cast<int>(x.size()) != mesh.num_edges()) throw DomainError("cochain length does not match the edge count");
    if (copies < 1) throw DomainError("surface needs at least one copy");
    const long long g = copies;
    // Global potential modulo 1.
    const int V = mesh.num_vertices;
    std::vector<std::vector<std::pair<int, int>>> adj(V);
    for (int k = 0; k < mesh.num_edges(); ++k) {
        adj[mesh.edges[k].v[0]].push_back({k, 1});
        adj[mesh.edges[k].v[1]].push_back({k, -1});
    }
    std::vector<double> U(V, 0.0);
    std::vector<char> seen(V, 0);
    for (int root = 0; root < V; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        std::deque<int> q{root};
        while (!q.empty()) {
            int a = q.front();
            q.pop_front();
            for (auto [k, dir] : adj[a]) {
                int b = mesh.edges[k].v[dir == 1 ? 1 : 0];
                if (seen[b]) continue;
                seen[b] = 1;
                U[b] = U[a] + dir * x[k];
                q.push_back(b);
            }
        }
    }
    std::vector<double> frac(V);
    for (int v = 0; v < V; ++v) frac[v] = U[v] - std::floor(U[v]);
    std::sort(frac.begin(), frac.end());
    frac.erase(std::unique(frac.begin(), frac.end(), [](double a, double b) { return b - a < 1e-9; }), frac.end());
    // Level in the middle of the widest gap between vertex values.
    double s = 0.5, gap = 1.0;
    if (!frac.empty()) {
        gap = frac.front() + 1.0 - frac.back();
        s = frac.back() + gap / 2;
        for (size_t i = 0; i + 1 < frac.size(); ++i)
            if (frac[i + 1] - frac[i] > gap) gap = frac[i + 1] - frac[i], s = frac[i] + gap / 2;
        s -= std::floor(s);
    }
    if (level) {
        // Requested level, nudged off vertex values; parallel copies fit in the gap above it.
        s = *level - std::floor(*level);
        gap = 1.0;
        for (double f : frac) {
            double d = f - s;
            if (d <= 0) d += 1.0;
            gap = std::min(gap, d);
            if (std::fabs(f - s) < 1e-9 || std::fabs(f - s) > 1 - 1e-9) throw DomainError("dual surface level passes through a vertex");
        }
        const double step = gap / (static_cast<double>(g) + 1.0);
        s += step * static_cast<double>(g - 1) / 2.0;
        gap = 2.0 * step * (static_cast<double>(g) + 1.0);
    }
    const double step = gap / (2.0 * static_cast<double>(g) + 2.0);
    const double s0 = s - step * static_cast<double>(g - 1) / 2.0;

    DualSurface D;
    D.copies = static_cast<int>(g);
    D.level = s0;
    std::unordered_map<std::array<long long, 3>, int, PointKeyHash> point_id;
    std::map<std::array<int, 3>, int> segment_count;  // (face, point, point)
    std::vector<std::array<int, 4>> poly_points;
    auto point = [&](long long e, long long copy, long long n) {
        auto [it, inserted] = point_id.try_emplace({e, copy, n}, static_cast<int>(point_id.size()));
        return it->second;
    };
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const MeshTet& T = mesh.tets[t];
        std::array<double, 4> u{};
        u[0] = U[T.v[0]];
        for (int a = 1; a < 4; ++a) {
            int e = local_edge_index(0, a);
            u[a] = u[0] + T.es[e] * x[T.e[e]];
        }
        std::array<long long, 4> offset{};
        for (int a = 0; a < 4; ++a) {
            offset[a] = std::llround(u[a] - U[T.v[a]]);
            if (std::fabs(u[a] - U[T.v[a]] - static_cast<double>(offset[a])) > 1e-6)
                throw DomainError("cochain periods are not integral");
        }
        const double lo = *std::min_element(u.begin(), u.end());
        const double hi = *std::max_element(u.begin(), u.end());
        for (long long j = 0; j < g; ++j) {
            const double sj = s0 + step * static_cast<double>(j);
            for (long long n = static_cast<long long>(std::ceil(lo - sj)); sj + n < hi; ++n) {
                const double L = sj + static_cast<double>(n);
                if (L <= lo) continue;
                std::array<int, 4> below{}, above{};
                int nb = 0, na = 0;
                for (int a = 0; a < 4; ++a) (u[a] < L ? below[nb++] : above[na++]) = a;
                std::vector<std::pair<int, int>> cross;
                if (nb == 2) {
                    cross = {{below[0], above[0]}, {below[0], above[1]}, {below[1], above[1]}, {below[1], above[0]}};
                } else if (nb == 1) {
                    for (int k = 0; k < 3; ++k) cross.push_back({below[0], above[k]});
                } else if (nb == 3) {
                    for (int k = 0; k < 3; ++k) cross.push_back({below[k], above[0]});
                } else {
                    continue;
                }
                SurfacePolygon P;
                P.tet = t;
                P.nverts = static_cast<int>(cross.size());
                std::array<int, 4> ids{-1, -1, -1, -1};
                for (int k = 0; k < P.nverts; ++k) {
                    auto [a, b] = cross[k];
                    const int e = local_edge_index(std::min(a, b), std::max(a, b));
                    const int p0 = kEdgeVerts[e][0], p1 = kEdgeVerts[e][1];
                    P.edge[k] = e;
                    P.param[k] = (L - u[p0]) / (u[p1] - u[p0]);
                    const int tail_local = T.es[e] > 0 ? p0 : p1;
                    const long long level = std::llround(L - static_cast<double>(offset[tail_local]) - sj);
                    ids[k] = point(T.e[e], j, level);
                }
                for (int k = 0; k < P.nverts; ++k) {
                    const int k2 = (k + 1) % P.nverts;
                    int used[4] = {0, 0, 0, 0};
                    for (int e : {P.edge[k], P.edge[k2]}) used[kEdgeVerts[e][0]] = used[kEdgeVerts[e][1]] = 1;
                    int missing = 0;
                    while (used[missing]) ++missing;
                    const int a = ids[k], b = ids[k2];
                    ++segment_count[{T.f[missing], std::min(a, b), std::max(a, b)}];
                }
                D.polygons.push_back(P);
                poly_points.push_back(ids);
            }
        }
    }
    for (const auto& [seg, count] : segment_count)
        if (count != 2) throw MeshError("dual surface is not closed along a segment");

    const int np = static_cast<int>(point_id.size());
    UnionFind uf(np);
    for (const auto& [seg, count] : segment_count) uf.unite(seg[1], seg[2]);
    std::map<int, std::array<long long, 3>> comp;  // root -> V, E, F
    for (int p = 0; p < np; ++p) comp[uf.find(p)][0] += 1;
    for (const auto& [seg, count] : segment_count) comp[uf.find(seg[1])][1] += 1;
    for (const auto& ids : poly_points) comp[uf.find(ids[0])][2] += 1;
    D.components = static_cast<int>(comp.size());
    for (const auto& [root, c] : comp) {
        const long long chi = c[0] - c[1] + c[2];
        D.euler_characteristic += static_cast<int>(chi);
        D.chi_minus += static_cast<int>(std::max(0LL, -chi));
    }
    return D;
}

ThurstonValue thurston_norm(const TriangulatedManifold& M, const std::vector<double>& coords, const MetricMesh* mesh,
                            const ClassSpace* S) {
    ThurstonValue out;
    if (std::all_of(coords.begin(), coords.end(), [](double c) { return c == 0.0; })) {
        out.provenance = "zero";
        return out;
    }
    if (!M.thurston_ball.empty()) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& v : M.thurston_ball) {
            if (v.size() != coords.size()) throw ValidationError("thurston_ball vertex dimension does not match the class");
            double d = 0.0;
            for (size_t i = 0; i < v.size(); ++i) d += v[i] * coords[i];
            best = std::max(best, d);
        }
        out.value = std::max(0.0, best);
        out.provenance = "ingested";
        return out;
    }
    for (const auto& cn : M.class_norms) {
        if (cn.coords.size() != coords.size()) continue;
        double lambda = 0.0;
        bool ok = true;
        size_t ref = 0;
        while (ref < cn.coords.size() && cn.coords[ref] == 0) ++ref;
        if (ref == cn.coords.size()) continue;
        lambda = coords[ref] / static_cast<double>(cn.coords[ref]);
        for (size_t i = 0; i < coords.size(); ++i)
            if (std::fabs(coords[i] - lambda * static_cast<double>(cn.coords[i])) > 1e-12 * (1.0 + std::fabs(coords[i]))) ok = false;
        if (ok) {
            out.value = std::fabs(lambda) * cn.value;
            out.provenance = "ingested";
            return out;
        }
    }
    if (mesh && S) {
        std::vector<long long> ic(coords.size());
        for (size_t i = 0; i < coords.size(); ++i) {
            ic[i] = std::llround(coords[i]);
            if (std::fabs(coords[i] - static_cast<double>(ic[i])) > 1e-9)
                throw DomainError("surface bound needs an integral class");
        }
        DualSurface D = dual_surface(*mesh, *S, ic);
        out.value = D.chi_minus;
        out.provenance = "upper_bound";
        return out;
    }
    throw PreconditionError("no Thurston norm data for this class");
}

}  // namespace hnorm
