#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hnorm/integer_matrix.hpp"
#include "hnorm/manifold.hpp"
#include "hnorm/mesh.hpp"

namespace hnorm {

// Integer chain complex; boundary[k] maps C_k to C_{k-1} (boundary[0] is unused).
struct ChainComplex {
    std::vector<int> dims;
    std::vector<SparseIntMatrix> boundary;
};

struct HomologyGroup {
    int rank = 0;
    std::vector<BigInt> torsion;                  // invariant factors > 1
    std::vector<BigInt> incoming_snf;             // nonzero SNF diagonal of the boundary into this degree
    std::vector<std::vector<BigInt>> free_basis;  // chains generating the free part (when requested)
};

struct HomologyReport {
    std::vector<HomologyGroup> groups;  // indexed by degree
    int betti(int k) const { return k < static_cast<int>(groups.size()) ? groups[k].rank : 0; }
};

HomologyReport homology(const ChainComplex& C, bool with_bases = false);

// Cellular complexes of an ideal triangulation. The relative complex of (M, dM) has cells
// tetrahedra / face pairs / edge classes; the spine complex is its dual and computes H_*(M).
ChainComplex relative_complex(const TriangulatedManifold& M);
ChainComplex spine_complex(const TriangulatedManifold& M);
ChainComplex mesh_complex(const MetricMesh& mesh);
ChainComplex mesh_relative_complex(const MetricMesh& mesh);

// Signs making the tetrahedra a coherently oriented fundamental chain, if one exists.
std::optional<std::vector<int>> mesh_orientation(const MetricMesh& mesh);

// Rank of Im(H_2(M) -> H_2(M, dM)) on a mesh, from the exact sequence of the pair.
int mesh_image_rank(const MetricMesh& mesh);

// The image of H^1_0(M) -> H^1(M) for an ideal triangulation, realised as H^1 of the
// end-compactification: integral edge-class cocycles modulo coboundaries of cusp functions.
// Classes are gauge-fixed to vanish on a spanning tree of the cusp graph; the remaining
// lattice carries a canonical reduced echelon basis.
struct ImageSubspace {
    int num_edges = 0;
    int num_cusps = 0;
    std::vector<int> edge_tail, edge_head;  // cusp at each end of an edge class
    std::vector<int> tree_edges;
    std::vector<int> free_edges;
    IntMatrix delta1;  // face pairs x edge classes
    IntMatrix basis;   // rows over free_edges
    int rank() const { return basis.rows(); }
    std::vector<long long> cocycle(int i) const;  // basis row i as an edge-class cocycle
};

ImageSubspace image_subspace(const TriangulatedManifold& M);
bool is_cocycle(const ImageSubspace& S, const std::vector<long long>& phi);
// Coordinates of a cocycle in the image basis. Throws if phi is not a cocycle.
std::vector<double> class_coordinates(const ImageSubspace& S, const std::vector<long long>& phi);
std::vector<long long> cocycle_from_coords(const ImageSubspace& S, const std::vector<long long>& coords);
// Coboundary of the indicator of a cusp: the dual of the boundary-parallel torus.
std::vector<long long> peripheral_cocycle(const ImageSubspace& S, int cusp);

// Uniform view of the classes handled by the pipeline: edge cocycles for ideal triangulations,
// periods along the coordinate circles for flat tori.
struct ClassSpace {
    ManifoldKind kind = ManifoldKind::Ideal;
    ImageSubspace image;
    std::array<double, 3> box{1, 1, 1};
    int rank() const { return kind == ManifoldKind::FlatTorus ? 3 : image.rank(); }
    std::vector<std::array<int, 6>> tet_edge_class;
    std::vector<std::array<int, 6>> tet_edge_sign;
};

ClassSpace class_space(const TriangulatedManifold& M);

// Per-ideal-tetrahedron potentials of the class with the given coordinates (u(0) = 0).
std::vector<std::array<double, 4>> tet_potentials(const ClassSpace& S, const std::vector<double>& coords);
// Mesh 1-cochain representing the class; vanishes on cusp necks and boundary tori.
std::vector<double> transfer_cochain(const MetricMesh& mesh, const ClassSpace& S, const std::vector<double>& coords);

// Level-set surface dual to an integral class.
struct SurfacePolygon {
    int tet = -1;
    int nverts = 0;
    std::array<int, 4> edge{};     // local edge index carrying each vertex
    std::array<double, 4> param{}; // position along the local edge from kEdgeVerts[e][0]
};

struct DualSurface {
    std::vector<SurfacePolygon> polygons;
    int components = 0;
    int euler_characteristic = 0;
    int chi_minus = 0;
    int copies = 1;  // parallel copies of the primitive class
    double level = 0.0;
    bool upper_bound = true;
};

// Level set {U = level mod 1} of the potential of a closed cochain with integral periods, taken
// `copies` times at nearby parallel levels.
DualSurface level_surface(const MetricMesh& mesh, const std::vector<double>& cochain, int copies = 1,
                          std::optional<double> level = std::nullopt);

// Surface dual to an integral class, built from the transferred cochain of its primitive class.
// The level defaults to the middle of the widest gap between vertex values of the potential mod 1.
DualSurface dual_surface(const MetricMesh& mesh, const ClassSpace& S, const std::vector<long long>& coords,
                         std::optional<double> level = std::nullopt);

struct ThurstonValue {
    double value = 0.0;
    std::string provenance;  // "ingested", "upper_bound", "zero"
};

// Ingested dual-ball vertices v: ||x|| = max_v <v, x>. Falls back to ray data from class_norms,
// then to the dual-surface bound when a mesh is supplied.
ThurstonValue thurston_norm(const TriangulatedManifold& M, const std::vector<double>& coords,
                            const MetricMesh* mesh = nullptr, const ClassSpace* S = nullptr);

}  // namespace hnorm
