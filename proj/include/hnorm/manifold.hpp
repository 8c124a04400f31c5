#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace hnorm {

using cplx = std::complex<double>;

struct CuspData {
    cplx xi{1.0, 0.0};
    cplx eta{0.0, 1.0};
    double area = 0.0;
    double waist = 0.0;
    double diameter = 0.0;
};

// Face `f` of a tetrahedron is glued to face perm[f] of tetrahedron `tet`;
// local vertex v maps to local vertex perm[v] of the target.
struct Gluing {
    int tet = -1;
    std::array<int, 4> perm{0, 1, 2, 3};
};

enum class ManifoldKind { Ideal, FlatTorus };

struct ClassNorm {
    std::vector<long long> coords;
    double value = 0.0;
};

struct CoverOf {
    std::string base;
    int degree = 1;
    // Row i lists the cover-image coordinates of the pullback of base basis class i.
    std::vector<std::vector<long long>> matrix;
};

struct TriangulatedManifold {
    std::string name;
    ManifoldKind kind = ManifoldKind::Ideal;
    std::vector<std::array<Gluing, 4>> gluings;
    std::vector<cplx> shapes;
    std::vector<CuspData> cusps;
    double systole = 0.0;
    std::optional<double> injectivity_radius;
    double tau0 = 0.0;
    std::array<double, 3> box{1.0, 1.0, 1.0};
    std::vector<std::vector<double>> thurston_ball;  // vertices of the dual unit ball
    std::vector<ClassNorm> class_norms;
    std::optional<CoverOf> cover_of;

    int num_tets() const { return static_cast<int>(gluings.size()); }
    bool is_closed() const { return kind == ManifoldKind::FlatTorus || cusps.empty(); }
};

// Local edge numbering inside a tetrahedron: 01, 02, 03, 12, 13, 23.
constexpr std::array<std::array<int, 2>, 6> kEdgeVerts{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
int local_edge_index(int a, int b);

// Shape parameter attached to local edge e of a tetrahedron with shape z.
cplx edge_shape(cplx z, int e);

struct EdgeOccurrence {
    int tet;
    int a, b;  // oriented local endpoints, a -> b follows the class orientation
};

struct FacePair {
    int tet0, face0, tet1, face1;
    std::array<int, 4> perm;  // from tet0 to tet1
};

struct Combinatorics {
    int num_cusps = 0;
    std::vector<std::array<int, 4>> vertex_class;  // per tet local vertex
    std::vector<std::array<int, 6>> edge_class;    // per tet local edge
    std::vector<std::array<int, 6>> edge_sign;     // +1 if local low->high agrees with class orientation
    std::vector<std::vector<EdgeOccurrence>> edge_cycles;  // walk order around each edge class
    std::vector<std::vector<int>> edge_cycle_parity;        // +1 / -1 orientation parity per step
    std::vector<std::vector<int>> edge_cycle_face;          // local face crossed when leaving each step
    std::vector<FacePair> face_pairs;
    std::vector<std::array<int, 4>> face_pair_of;  // pair id per tet face
    std::vector<std::array<int, 4>> face_side;     // 0 if this face is tet0/face0 of its pair, else 1
    bool orientable = true;
};

Combinatorics analyze_combinatorics(const TriangulatedManifold& M);

struct ValidationResult {
    double edge_residual = 0.0;  // max over edge classes
    std::vector<std::string> warnings;
};

TriangulatedManifold parse_manifold(const std::string& path);
TriangulatedManifold parse_manifold_text(const std::string& text);
std::string serialize_manifold(const TriangulatedManifold& M);
void write_manifold(const TriangulatedManifold& M, const std::string& path);

// Structural checks (gluing consistency, shapes, systole) plus edge-equation residuals.
ValidationResult validate_manifold(const TriangulatedManifold& M, double tolerance = 1e-8);

struct ModelCusp {
    CuspData cusp;
    double base_height = 1.0;
    double top_height = 4.0;
    int grid = 16;            // horizontal subdivisions per period
    double ratio = 1.0;       // vertical layer ratio; 1 selects an automatic value
};

ModelCusp parse_model_cusp(const std::string& path);
ModelCusp parse_model_cusp_text(const std::string& text);

}  // namespace hnorm
