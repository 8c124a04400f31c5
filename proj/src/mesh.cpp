#include "hnorm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"

namespace hnorm {

double cayley_menger_volume(const std::array<double, 6>& l) {
    // Gram matrix of the edge vectors from vertex 0.
    const double d01 = l[0] * l[0], d02 = l[1] * l[1], d03 = l[2] * l[2];
    const double d12 = l[3] * l[3], d13 = l[4] * l[4], d23 = l[5] * l[5];
    Eigen::Matrix3d G;
    G(0, 0) = d01;
    G(1, 1) = d02;
    G(2, 2) = d03;
    G(0, 1) = G(1, 0) = 0.5 * (d01 + d02 - d12);
    G(0, 2) = G(2, 0) = 0.5 * (d01 + d03 - d13);
    G(1, 2) = G(2, 1) = 0.5 * (d02 + d03 - d23);
    double det = G.determinant();
    return det >= 0 ? std::sqrt(det) / 6.0 : -std::sqrt(-det) / 6.0;
}

std::array<double, 6> tet_lengths(const MetricMesh& mesh, int t) {
    std::array<double, 6> l{};
    for (int k = 0; k < 6; ++k) l[k] = mesh.edges[mesh.tets[t].e[k]].length;
    return l;
}

double mesh_volume(const MetricMesh& mesh) {
    double v = 0.0;
    for (int t = 0; t < mesh.num_tets(); ++t) v += cayley_menger_volume(tet_lengths(mesh, t));
    return v;
}

void check_mesh(const MetricMesh& mesh) {
    for (int t = 0; t < mesh.num_tets(); ++t) {
        auto l = tet_lengths(mesh, t);
        double scale = 0.0;
        for (double x : l) scale = std::max(scale, x);
        double v = cayley_menger_volume(l);
        if (!(v > 1e-12 * scale * scale * scale)) throw MeshError("degenerate cell: non-positive Cayley-Menger volume", t);
    }
}

namespace {

int sort_parity(std::array<int, 3> a) {
    int s = 1;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (a[i] > a[j]) s = -s;
    return s;
}

// Tolerant lookup table for point keys.
class KeyTable {
public:
    explicit KeyTable(double tol) : tol_(tol), h_(tol * 64.0) {}

    int find(const PointKey& k) const {
        std::array<long long, 4> base{};
        std::array<int, 4> alt{};
        for (int i = 0; i < k.dim; ++i) {
            double s = k.c[i] / h_;
            base[i] = static_cast<long long>(std::floor(s));
            double frac = s - std::floor(s);
            alt[i] = frac * h_ < tol_ ? -1 : ((1.0 - frac) * h_ < tol_ ? 1 : 0);
        }
        const int combos = 1 << k.dim;
        for (int m = 0; m < combos; ++m) {
            std::array<long long, 4> q = base;
            bool skip = false;
            for (int i = 0; i < k.dim; ++i)
                if (m & (1 << i)) {
                    if (alt[i] == 0) {
                        skip = true;
                        break;
                    }
                    q[i] += alt[i];
                }
            if (skip) continue;
            auto it = cells_.find(hash(k, q));
            if (it == cells_.end()) continue;
            for (int id : it->second) {
                const PointKey& o = keys_[id];
                if (o.type != k.type || o.id != k.id || o.dim != k.dim) continue;
                bool same = true;
                for (int i = 0; i < k.dim && same; ++i) same = std::abs(o.c[i] - k.c[i]) <= tol_;
                if (same) return id;
            }
        }
        return -1;
    }

    int insert(const PointKey& k) {
        int id = static_cast<int>(keys_.size());
        keys_.push_back(k);
        std::array<long long, 4> q{};
        for (int i = 0; i < k.dim; ++i) q[i] = static_cast<long long>(std::floor(k.c[i] / h_));
        cells_[hash(k, q)].push_back(id);
        return id;
    }

    const PointKey& operator[](int id) const { return keys_[id]; }

private:
    static size_t hash(const PointKey& k, const std::array<long long, 4>& q) {
        size_t h = static_cast<size_t>(k.type) * 1000003u ^ static_cast<size_t>(k.id) * 7919u;
        for (int i = 0; i < k.dim; ++i) h = h * 1469598103934665603ull ^ static_cast<size_t>(q[i] + 0x9e3779b9);
        return h;
    }
    double tol_, h_;
    std::vector<PointKey> keys_;
    std::unordered_map<size_t, std::vector<int>> cells_;
};

bool same_key(const PointKey& a, const PointKey& b, double tol) {
    if (a.type != b.type || a.id != b.id || a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
        if (std::abs(a.c[i] - b.c[i]) > tol) return false;
    return true;
}

}  // namespace

MetricMesh assemble_mesh(const std::vector<AsmTet>& tets, const AssemblyModel& model, const std::string& kind) {
    MetricMesh mesh;
    mesh.kind = kind;
    KeyTable vkeys(model.tolerance), ekeys(model.tolerance), fkeys(model.tolerance);
    std::vector<PointKey> edge_near_tail;
    std::vector<std::array<PointKey, 3>> face_near;
    std::vector<int> face_count;
    std::vector<std::pair<int, int>> face_first;  // (tet, local face) of first incidence

    auto point_key = [&](const AsmTet& T, const std::array<double, 4>& bary) {
        Vec4 X[4];
        double w[4];
        int n = 0;
        for (int i = 0; i < 4; ++i)
            if (bary[i] != 0.0) {
                X[n] = T.X[i];
                w[n] = bary[i];
                ++n;
            }
        return model.key(T.source, model.combine(X, w, n));
    };

    mesh.tets.reserve(tets.size());
    for (size_t ti = 0; ti < tets.size(); ++ti) {
        const AsmTet& T = tets[ti];
        MeshTet mt;
        mt.source = T.source;
        for (int i = 0; i < 4; ++i) {
            PointKey k = model.key(T.source, T.X[i]);
            int id = vkeys.find(k);
            if (id < 0) {
                id = vkeys.insert(k);
                mesh.vertex_coords.push_back(T.X[i]);
                auto info = model.vertex_info(T, i);
                mesh.vertex_cusp.push_back(info.first);
                mesh.vertex_height.push_back(info.second);
            }
            mt.v[i] = id;
        }
        for (int e = 0; e < 6; ++e) {
            int a = kEdgeVerts[e][0], b = kEdgeVerts[e][1];
            std::array<double, 4> mid{};
            mid[a] = mid[b] = 0.5;
            PointKey k = point_key(T, mid);
            int id = ekeys.find(k);
            std::array<double, 4> near{};
            near[a] = 2.0 / 3.0;
            near[b] = 1.0 / 3.0;
            if (id < 0) {
                id = ekeys.insert(k);
                MeshEdge me;
                me.v = {mt.v[a], mt.v[b]};
                me.length = model.distance(T.X[a], T.X[b]);
                mesh.edges.push_back(me);
                edge_near_tail.push_back(point_key(T, near));
                mesh.edge_source.push_back(T.source);
                std::array<double, 4> d{};
                for (int u = 0; u < 4; ++u) d[u] = T.w[b][u] - T.w[a][u];
                mesh.edge_delta.push_back(d);
                mt.es[e] = 1;
            } else if (mt.v[a] != mt.v[b]) {
                mt.es[e] = mesh.edges[id].v[0] == mt.v[a] ? 1 : -1;
            } else {
                mt.es[e] = same_key(point_key(T, near), edge_near_tail[id], model.tolerance) ? 1 : -1;
            }
            mt.e[e] = id;
        }
        for (int f = 0; f < 4; ++f) {
            std::array<int, 3> loc{};
            int n = 0;
            for (int v = 0; v < 4; ++v)
                if (v != f) loc[n++] = v;
            std::array<double, 4> cen{};
            for (int v : loc) cen[v] = 1.0 / 3.0;
            PointKey k = point_key(T, cen);
            std::array<PointKey, 3> near;
            for (int c = 0; c < 3; ++c) {
                std::array<double, 4> b{};
                for (int v : loc) b[v] = 0.1;
                b[loc[c]] = 0.8;
                near[c] = point_key(T, b);
            }
            int id = fkeys.find(k);
            if (id < 0) {
                id = fkeys.insert(k);
                MeshFace mf;
                mf.v = {mt.v[loc[0]], mt.v[loc[1]], mt.v[loc[2]]};
                mf.e = {mt.e[local_edge_index(loc[0], loc[1])], mt.e[local_edge_index(loc[0], loc[2])],
                        mt.e[local_edge_index(loc[1], loc[2])]};
                mf.es = {mt.es[local_edge_index(loc[0], loc[1])], mt.es[local_edge_index(loc[0], loc[2])],
                         mt.es[local_edge_index(loc[1], loc[2])]};
                mesh.faces.push_back(mf);
                face_near.push_back(near);
                face_count.push_back(1);
                face_first.emplace_back(static_cast<int>(ti), f);
                mt.fs[f] = 1;
            } else {
                // sigma[c] = position in loc of the point matching the face's corner c.
                std::array<int, 3> sigma{-1, -1, -1};
                for (int c = 0; c < 3; ++c)
                    for (int j = 0; j < 3; ++j)
                        if (same_key(face_near[id][c], near[j], model.tolerance)) sigma[c] = j;
                if (sigma[0] < 0 || sigma[1] < 0 || sigma[2] < 0)
                    throw MeshError("face corner correspondence failed", static_cast<int>(ti));
                mt.fs[f] = sort_parity(sigma);
                if (++face_count[id] > 2) throw MeshError("face shared by more than two tetrahedra", static_cast<int>(ti));
            }
            mt.f[f] = id;
        }
        mesh.tets.push_back(mt);
    }
    mesh.num_vertices = static_cast<int>(mesh.vertex_coords.size());
    mesh.face_boundary.assign(mesh.faces.size(), -1);
    mesh.face_height.assign(mesh.faces.size(), 0.0);
    mesh.vertex_boundary.assign(mesh.num_vertices, -1);
    int comps = 0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        if (face_count[f] != 1) continue;
        auto [t, lf] = face_first[f];
        std::array<int, 3> loc{};
        int n = 0;
        for (int v = 0; v < 4; ++v)
            if (v != lf) loc[n++] = v;
        auto [comp, height] = model.boundary_of(tets[t], loc);
        if (comp < 0) throw MeshError("unexpected free face", t);
        mesh.face_boundary[f] = comp;
        mesh.face_height[f] = height;
        comps = std::max(comps, comp + 1);
        for (int v : mesh.faces[f].v) mesh.vertex_boundary[v] = comp;
    }
    mesh.num_boundary_components = comps;
    return mesh;
}

// ---- Flat torus -------------------------------------------------------------------------------

namespace {

class FlatTorusModel : public AssemblyModel {
public:
    explicit FlatTorusModel(const std::array<double, 3>& box) : box_(box) {}
    PointKey key(int, const Vec4& X) const override {
        PointKey k;
        k.dim = 3;
        for (int i = 0; i < 3; ++i) {
            double s = X[i] / box_[i];
            double f = s - std::floor(s + 1e-9);
            k.c[i] = f;
        }
        return k;
    }
    Vec4 combine(const Vec4* X, const double* w, int n) const override {
        Vec4 r = Vec4::Zero();
        double s = 0;
        for (int i = 0; i < n; ++i) r += w[i] * X[i], s += w[i];
        return r / s;
    }
    double distance(const Vec4& A, const Vec4& B) const override { return (A - B).head<3>().norm(); }
    std::pair<int, double> boundary_of(const AsmTet&, const std::array<int, 3>&) const override { return {-1, 0.0}; }

private:
    std::array<double, 3> box_;
};

// Kuhn subdivision of the unit cube: one tetrahedron per ordering of the axes.
const std::array<std::array<int, 3>, 6> kAxisOrders{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

}  // namespace

MetricMesh build_flat_torus_mesh(const std::array<double, 3>& box, int k) {
    if (k < 1) k = 1;
    for (double b : box)
        if (!(b > 0)) throw PreconditionError("flat torus box sides must be positive");
    std::vector<AsmTet> tets;
    tets.reserve(6 * k * k * k);
    const double hx = box[0] / k, hy = box[1] / k, hz = box[2] / k;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (int l = 0; l < k; ++l)
                for (const auto& ord : kAxisOrders) {
                    AsmTet T;
                    std::array<int, 3> p{i, j, l};
                    for (int s = 0; s < 4; ++s) {
                        if (s > 0) p[ord[s - 1]] += 1;
                        Vec4 X(p[0] * hx, p[1] * hy, p[2] * hz, 0.0);
                        T.X[s] = X;
                        T.w[s] = {X[0], X[1], X[2], 0.0};
                    }
                    tets.push_back(T);
                }
    FlatTorusModel model(box);
    model.tolerance = 1e-9;
    MetricMesh mesh = assemble_mesh(tets, model, "flat_torus");
    check_mesh(mesh);
    return mesh;
}

// ---- Model cusp -------------------------------------------------------------------------------

namespace {

class ModelCuspModel : public AssemblyModel {
public:
    ModelCuspModel(cplx xi, cplx eta, double z0, double z1) : xi_(xi), eta_(eta), z0_(z0), z1_(z1) {
        det_ = (std::conj(xi) * eta).imag();
    }
    // Lattice coordinates (a, b) with p = a xi + b eta.
    std::pair<double, double> lattice_coords(double x, double y) const {
        double a = (x * eta_.imag() - y * eta_.real()) / det_;
        double b = (xi_.real() * y - xi_.imag() * x) / det_;
        return {a, b};
    }
    PointKey key(int, const Vec4& X) const override {
        auto [a, b] = lattice_coords(X[0], X[1]);
        PointKey k;
        k.dim = 3;
        k.c[0] = a - std::floor(a + 1e-9);
        k.c[1] = b - std::floor(b + 1e-9);
        k.c[2] = std::log(X[2]);
        return k;
    }
    Vec4 combine(const Vec4* X, const double* w, int n) const override {
        Vec4 r = Vec4::Zero();
        double s = 0;
        for (int i = 0; i < n; ++i) r += w[i] * X[i], s += w[i];
        return r / s;
    }
    double distance(const Vec4& A, const Vec4& B) const override {
        double d2 = (A - B).head<3>().squaredNorm();
        return std::acosh(1.0 + d2 / (2.0 * A[2] * B[2]));
    }
    std::pair<int, double> boundary_of(const AsmTet& t, const std::array<int, 3>& loc) const override {
        double z = t.X[loc[0]][2];
        for (int v : loc)
            if (std::abs(t.X[v][2] - z) > 1e-12 * z) return {-1, 0.0};
        if (std::abs(z - z0_) <= 1e-12 * z0_) return {0, z};
        if (std::abs(z - z1_) <= 1e-12 * z1_) return {1, z};
        return {-1, 0.0};
    }
    std::pair<int, double> vertex_info(const AsmTet& t, int local) const override { return {0, t.X[local][2]}; }

private:
    cplx xi_, eta_;
    double z0_, z1_, det_;
};

}  // namespace

MetricMesh build_model_cusp_mesh(const ModelCusp& mc, ModelCuspMeshInfo* info) {
    const int n = mc.grid;
    const double z0 = mc.base_height, z1 = mc.top_height;
    if (n < 1 || !(z0 > 0) || !(z1 > z0)) throw PreconditionError("invalid model cusp parameters");
    cplx xi = mc.cusp.xi, eta = mc.cusp.eta;
    double rho = mc.ratio;
    if (!(rho > 1.0)) {
        // Euclidean vertical spacing at the top matches the horizontal grid spacing.
        double h = std::min(std::abs(xi), std::abs(eta)) / n;
        rho = 1.0 + h / z1;
    }
    int layers = std::max(1, static_cast<int>(std::ceil(std::log(z1 / z0) / std::log(rho) - 1e-9)));
    std::vector<double> zs(layers + 1);
    for (int j = 0; j <= layers; ++j) zs[j] = z0 * std::pow(z1 / z0, static_cast<double>(j) / layers);
    zs[layers] = z1;
    std::vector<AsmTet> tets;
    tets.reserve(static_cast<size_t>(6) * n * n * layers);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < layers; ++l)
                for (const auto& ord : kAxisOrders) {
                    AsmTet T;
                    std::array<int, 3> p{i, j, l};
                    for (int s = 0; s < 4; ++s) {
                        if (s > 0) p[ord[s - 1]] += 1;
                        cplx q = (static_cast<double>(p[0]) * xi + static_cast<double>(p[1]) * eta) / static_cast<double>(n);
                        T.X[s] = Vec4(q.real(), q.imag(), zs[p[2]], 0.0);
                        T.w[s] = {q.real(), q.imag(), zs[p[2]], 0.0};
                    }
                    tets.push_back(T);
                }
    ModelCuspModel model(xi, eta, z0, z1);
    model.tolerance = 1e-9;
    MetricMesh mesh = assemble_mesh(tets, model, "model_cusp");
    check_mesh(mesh);
    if (info) {
        info->grid = n;
        info->layer_heights = zs;
        info->layer_vertices.assign(layers + 1, std::vector<int>(static_cast<size_t>(n) * n, -1));
        for (int v = 0; v < mesh.num_vertices; ++v) {
            const Vec4& X = mesh.vertex_coords[v];
            auto [a, b] = model.lattice_coords(X[0], X[1]);
            int ia = static_cast<int>(std::lround(a * n)) % n, ib = static_cast<int>(std::lround(b * n)) % n;
            if (ia < 0) ia += n;
            if (ib < 0) ib += n;
            int l = static_cast<int>(std::lround(std::log(X[2] / z0) / std::log(z1 / z0) * layers));
            info->layer_vertices[l][static_cast<size_t>(ia) * n + ib] = v;
        }
    }
    return mesh;
}

// ---- Simplicial meshes and files ----------------------------------------------------------------

MetricMesh simplicial_mesh(int num_vertices, const std::vector<std::array<int, 4>>& tets,
                           const std::vector<std::pair<std::array<int, 2>, double>>& lengths) {
    MetricMesh mesh;
    mesh.kind = "simplicial";
    mesh.num_vertices = num_vertices;
    std::map<std::pair<int, int>, double> len;
    for (auto& [p, l] : lengths) {
        if (!(l > 0)) throw ValidationError("edge lengths must be positive");
        len[{std::min(p[0], p[1]), std::max(p[0], p[1])}] = l;
    }
    std::map<std::pair<int, int>, int> edge_id;
    std::map<std::array<int, 3>, int> face_id;
    std::vector<int> face_count;
    auto edge_of = [&](int a, int b, int& sign) {
        sign = a < b ? 1 : -1;
        std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        auto it = edge_id.find(key);
        if (it != edge_id.end()) return it->second;
        auto lit = len.find(key);
        if (lit == len.end())
            throw ValidationError("missing length for edge " + std::to_string(key.first) + "-" + std::to_string(key.second));
        int id = static_cast<int>(mesh.edges.size());
        mesh.edges.push_back(MeshEdge{{key.first, key.second}, lit->second});
        mesh.edge_source.push_back(-1);
        mesh.edge_delta.push_back({0, 0, 0, 0});
        edge_id[key] = id;
        return id;
    };
    for (size_t ti = 0; ti < tets.size(); ++ti) {
        const auto& tv = tets[ti];
        for (int v : tv)
            if (v < 0 || v >= num_vertices) throw ValidationError("tetrahedron vertex out of range");
        MeshTet mt;
        mt.v = tv;
        for (int e = 0; e < 6; ++e) mt.e[e] = edge_of(tv[kEdgeVerts[e][0]], tv[kEdgeVerts[e][1]], mt.es[e]);
        if (std::set<int>(tv.begin(), tv.end()).size() != 4) throw ValidationError("tetrahedron repeats a vertex");
        for (int f = 0; f < 4; ++f) {
            std::array<int, 3> loc{};
            int n = 0;
            for (int v = 0; v < 4; ++v)
                if (v != f) loc[n++] = tv[v];
            std::array<int, 3> sorted = loc;
            std::sort(sorted.begin(), sorted.end());
            auto it = face_id.find(sorted);
            int id;
            if (it == face_id.end()) {
                id = static_cast<int>(mesh.faces.size());
                MeshFace mf;
                mf.v = sorted;
                int s;
                mf.e = {edge_of(sorted[0], sorted[1], s), edge_of(sorted[0], sorted[2], s), edge_of(sorted[1], sorted[2], s)};
                mf.es = {1, 1, 1};
                mesh.faces.push_back(mf);
                face_id[sorted] = id;
                face_count.push_back(0);
            } else {
                id = it->second;
            }
            ++face_count[id];
            mt.f[f] = id;
            mt.fs[f] = sort_parity(loc);
        }
        mesh.tets.push_back(mt);
    }
    mesh.face_boundary.assign(mesh.faces.size(), -1);
    mesh.face_height.assign(mesh.faces.size(), 0.0);
    mesh.vertex_boundary.assign(num_vertices, -1);
    bool any = false;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        if (face_count[f] > 2) throw ValidationError("face shared by more than two tetrahedra");
        if (face_count[f] == 1) {
            mesh.face_boundary[f] = 0;
            for (int v : mesh.faces[f].v) mesh.vertex_boundary[v] = 0;
            any = true;
        }
    }
    mesh.num_boundary_components = any ? 1 : 0;
    mesh.vertex_coords.assign(num_vertices, Vec4::Zero());
    mesh.vertex_cusp.assign(num_vertices, -1);
    mesh.vertex_height.assign(num_vertices, 0.0);
    return mesh;
}

MetricMesh parse_mesh_text(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    int nv = -1;
    std::vector<std::array<int, 4>> tets;
    std::vector<std::pair<std::array<int, 2>, double>> lengths;
    std::string section;
    auto parse_int = [&](const std::string& s) {
        try {
            size_t pos = 0;
            int v = std::stoi(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParseError("expected an integer, got '" + s + "'", line_no);
        }
    };
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok[0] == "vertices") {
            if (tok.size() != 2) throw ParseError("vertices takes a count", line_no);
            nv = parse_int(tok[1]);
            section.clear();
        } else if (tok[0] == "tetrahedra" || tok[0] == "edge_lengths") {
            section = tok[0];
        } else if (section == "tetrahedra") {
            if (tok.size() != 4) throw ParseError("tetrahedron row needs 4 vertex ids", line_no);
            tets.push_back({parse_int(tok[0]), parse_int(tok[1]), parse_int(tok[2]), parse_int(tok[3])});
        } else if (section == "edge_lengths") {
            if (tok.size() != 3) throw ParseError("edge length row needs 'i j length'", line_no);
            double l;
            try {
                l = std::stod(tok[2]);
            } catch (const std::exception&) {
                throw ParseError("bad edge length '" + tok[2] + "'", line_no);
            }
            lengths.push_back({{parse_int(tok[0]), parse_int(tok[1])}, l});
        } else {
            throw ParseError("unexpected line '" + line + "'", line_no);
        }
    }
    if (nv < 0) throw ParseError("vertices count required");
    return simplicial_mesh(nv, tets, lengths);
}

MetricMesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mesh file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_mesh_text(ss.str());
}

void write_mesh_file(const MetricMesh& mesh, const std::string& path) {
    std::ostringstream os;
    os << "vertices " << mesh.num_vertices << "\ntetrahedra\n";
    std::set<std::pair<int, int>> pairs;
    for (const auto& t : mesh.tets) {
        if (std::set<int>(t.v.begin(), t.v.end()).size() != 4)
            throw PreconditionError("mesh files require simplicial complexes");
        os << t.v[0] << " " << t.v[1] << " " << t.v[2] << " " << t.v[3] << "\n";
    }
    os << "edge_lengths\n";
    os.precision(17);
    for (const auto& e : mesh.edges) {
        if (!pairs.insert({std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])}).second)
            throw PreconditionError("mesh files require simplicial complexes");
        os << e.v[0] << " " << e.v[1] << " " << e.length << "\n";
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << os.str();
}

double truncated_volume(const TriangulatedManifold& M, double T) {
    double v = volume(M);
    if (M.kind == ManifoldKind::FlatTorus) return v;
    for (const auto& c : M.cusps) v -= c.area / (2.0 * std::exp(2.0 * T));
    return v;
}

MetricMesh build_mesh_for(const TriangulatedManifold& M, double T, int refinement, const HyperbolicMeshOptions& opt) {
    if (M.kind == ManifoldKind::FlatTorus) return build_flat_torus_mesh(M.box, refinement);
    return build_metric_mesh(M, T, refinement, opt);
}

}  // namespace hnorm
