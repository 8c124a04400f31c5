#include "hnorm/covers.hpp"

#include <cmath>

#include "hnorm/cohomology.hpp"
#include "hnorm/errors.hpp"

namespace hnorm {

std::vector<std::vector<int>> double_cover_labellings(const TriangulatedManifold& M) {
    if (M.kind != ManifoldKind::Ideal) throw PreconditionError("double covers need an ideal triangulation");
    const Combinatorics C = analyze_combinatorics(M);
    const int np = static_cast<int>(C.face_pairs.size());
    std::vector<std::vector<int>> rows;
    for (size_t k = 0; k < C.edge_cycles.size(); ++k) {
        std::vector<int> row(np, 0);
        for (size_t j = 0; j < C.edge_cycles[k].size(); ++j) {
            const int t = C.edge_cycles[k][j].tet;
            row[C.face_pair_of[t][C.edge_cycle_face[k][j]]] ^= 1;
        }
        rows.push_back(row);
    }
    // Reduced row echelon form over GF(2).
    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < np && r < static_cast<int>(rows.size()); ++c) {
        int p = -1;
        for (int i = r; i < static_cast<int>(rows.size()); ++i)
            if (rows[i][c]) p = i;
        if (p < 0) continue;
        std::swap(rows[p], rows[r]);
        for (int i = 0; i < static_cast<int>(rows.size()); ++i)
            if (i != r && rows[i][c])
                for (int j = 0; j < np; ++j) rows[i][j] ^= rows[r][j];
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<int> is_pivot(np, -1);
    for (int i = 0; i < r; ++i) is_pivot[pivot_col[i]] = i;
    std::vector<std::vector<int>> kernel;
    for (int c = 0; c < np; ++c) {
        if (is_pivot[c] >= 0) continue;
        std::vector<int> v(np, 0);
        v[c] = 1;
        for (int i = 0; i < r; ++i)
            if (rows[i][c]) v[pivot_col[i]] = 1;
        kernel.push_back(v);
    }
    if (kernel.size() > 20) throw DomainError("too many Z/2 labellings to enumerate");
    std::vector<std::vector<int>> out;
    for (unsigned mask = 1; mask < (1u << kernel.size()); ++mask) {
        std::vector<int> v(np, 0);
        for (size_t b = 0; b < kernel.size(); ++b)
            if (mask & (1u << b))
                for (int j = 0; j < np; ++j) v[j] ^= kernel[b][j];
        out.push_back(v);
    }
    return out;
}

TriangulatedManifold double_cover(const TriangulatedManifold& M, const std::vector<int>& labels,
                                  const std::string& name) {
    const Combinatorics C = analyze_combinatorics(M);
    const int n = M.num_tets();
    if (labels.size() != C.face_pairs.size()) throw PreconditionError("one label per face pair required");
    TriangulatedManifold W;
    W.name = name;
    W.kind = ManifoldKind::Ideal;
    W.gluings.resize(2 * n);
    W.shapes.resize(2 * n);
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < n; ++t) {
            W.shapes[s * n + t] = M.shapes[t];
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = M.gluings[t][f];
                const int ts = s ^ (labels[C.face_pair_of[t][f]] & 1);
                W.gluings[s * n + t][f] = Gluing{ts * n + g.tet, g.perm};
            }
        }
    const Combinatorics CW = analyze_combinatorics(W);
    // Connectedness: tetrahedron 0 of both sheets must be reachable from each other.
    std::vector<char> seen(2 * n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        for (int f = 0; f < 4; ++f) {
            const int u = W.gluings[t][f].tet;
            if (!seen[u]) seen[u] = 1, stack.push_back(u);
        }
    }
    if (!seen[n]) throw DomainError("labelling defines a disconnected cover");
    W.cusps.resize(CW.num_cusps);
    std::vector<int> count(CW.num_cusps, 0), base_of(CW.num_cusps, -1), base_count(C.num_cusps, 0);
    for (int t = 0; t < n; ++t)
        for (int v = 0; v < 4; ++v) ++base_count[C.vertex_class[t][v]];
    for (int k = 0; k < 2 * n; ++k)
        for (int v = 0; v < 4; ++v) {
            const int c = CW.vertex_class[k][v];
            ++count[c];
            base_of[c] = C.vertex_class[k % n][v];
        }
    for (int c = 0; c < CW.num_cusps; ++c) {
        if (count[c] != base_count[base_of[c]])
            throw DomainError("a cusp is covered twice by one cusp; its lattice is not derived");
        if (!M.cusps.empty()) W.cusps[c] = M.cusps[base_of[c]];
    }
    W.systole = M.systole;
    W.tau0 = M.tau0;
    W.cover_of = CoverOf{M.name, 2, {}};
    return W;
}

TriangulatedManifold find_double_cover(const TriangulatedManifold& M, int cusps, const std::string& name) {
    for (const auto& labels : double_cover_labellings(M)) {
        try {
            TriangulatedManifold W = double_cover(M, labels, name);
            if (static_cast<int>(W.cusps.size()) == cusps) return W;
        } catch (const DomainError&) {
        }
    }
    throw DomainError("no connected double cover with the requested number of cusps");
}

std::vector<std::vector<long long>> pullback_correspondence(const TriangulatedManifold& base,
                                                            const TriangulatedManifold& cover) {
    const int n = base.num_tets();
    if (n == 0 || cover.num_tets() % n != 0) throw PreconditionError("cover tetrahedra must be copies of the base");
    const ImageSubspace SB = image_subspace(base), SC = image_subspace(cover);
    const Combinatorics CB = analyze_combinatorics(base), CC = analyze_combinatorics(cover);
    std::vector<std::vector<long long>> out;
    for (int i = 0; i < SB.rank(); ++i) {
        const std::vector<long long> phi = SB.cocycle(i);
        std::vector<long long> lift(SC.num_edges, 0);
        for (int k = 0; k < cover.num_tets(); ++k)
            for (int e = 0; e < 6; ++e) {
                const int t = k % n;
                lift[CC.edge_class[k][e]] = CC.edge_sign[k][e] * CB.edge_sign[t][e] * phi[CB.edge_class[t][e]];
            }
        const std::vector<double> y = class_coordinates(SC, lift);
        std::vector<long long> row;
        for (double v : y) {
            if (std::abs(v - std::round(v)) > 1e-9) throw DomainError("pullback is not integral in the cover basis");
            row.push_back(std::llround(v));
        }
        out.push_back(row);
    }
    return out;
}

}  // namespace hnorm
