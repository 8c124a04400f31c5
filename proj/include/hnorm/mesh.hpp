#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "hnorm/manifold.hpp"

namespace hnorm {

using Vec4 = Eigen::Vector4d;

struct MeshEdge {
    std::array<int, 2> v;  // tail, head
    double length = 0.0;
};

// Triangle with ordered vertices; local edges are (0,1), (0,2), (1,2).
struct MeshFace {
    std::array<int, 3> v;
    std::array<int, 3> e;
    std::array<int, 3> es;  // +1 when the global edge runs from the lower to the higher local vertex
};

// Tetrahedron of a Delta-complex. Local edges follow kEdgeVerts; local face i omits vertex i.
struct MeshTet {
    std::array<int, 4> v;
    std::array<int, 6> e;
    std::array<int, 6> es;
    std::array<int, 4> f;
    // +1 when the global face orientation agrees with the orientation induced on local face i
    // (remaining local vertices in increasing order).
    std::array<int, 4> fs;
    int source = -1;  // ideal tetrahedron the cell was cut from, or -1
};

// Cochain transfer data: a class given by a per-source potential u_src (four values per ideal
// tetrahedron, or a single global vector when edge_source is -1) evaluates on edge k as
// sum_a edge_delta[k][a] * u[edge_source[k]][a].
struct MetricMesh {
    std::string kind;  // "flat_torus", "hyperbolic", "model_cusp", "simplicial"
    int num_vertices = 0;
    std::vector<MeshEdge> edges;
    std::vector<MeshFace> faces;
    std::vector<MeshTet> tets;

    std::vector<int> face_boundary;   // -1 interior, otherwise boundary component id
    std::vector<double> face_height;  // height coordinate of boundary faces
    std::vector<int> vertex_boundary; // -1 interior, otherwise boundary component id
    int num_boundary_components = 0;

    std::vector<int> edge_source;
    std::vector<std::array<double, 4>> edge_delta;

    // Representative coordinates of each vertex (model-dependent; x, y, z chart coordinates for
    // model cusps, unwrapped position for flat tori, hyperboloid vector for hyperbolic meshes).
    std::vector<Vec4> vertex_coords;
    std::vector<int> vertex_cusp;      // cusp neighbourhood containing the vertex, or -1
    std::vector<double> vertex_height; // horospherical height when vertex_cusp >= 0

    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_faces() const { return static_cast<int>(faces.size()); }
    int num_tets() const { return static_cast<int>(tets.size()); }
    bool has_boundary() const { return num_boundary_components > 0; }
};

// Volume of a Euclidean tetrahedron with the six edge lengths in kEdgeVerts order via Cayley-Menger.
// Returns a negative value when the lengths violate the generalized triangle inequalities.
double cayley_menger_volume(const std::array<double, 6>& l);
std::array<double, 6> tet_lengths(const MetricMesh& mesh, int t);
double mesh_volume(const MetricMesh& mesh);
// Throws MeshError naming the first tetrahedron with non-positive Cayley-Menger volume.
void check_mesh(const MetricMesh& mesh);

// ---- Keyed assembly -------------------------------------------------------------------------

// A geometric point key identifying points of the quotient space. Points with equal type and id
// whose coordinates agree to the assembler tolerance are the same point.
struct PointKey {
    int type = 0;
    int id = 0;
    int dim = 0;
    std::array<double, 4> c{0, 0, 0, 0};
};

struct AsmTet {
    int source = -1;
    std::array<Vec4, 4> X;
    std::array<std::array<double, 4>, 4> w{};  // per-vertex transfer weights
    std::array<int, 4> tag{-1, -1, -1, -1};     // model-specific vertex tag
};

class AssemblyModel {
public:
    virtual ~AssemblyModel() = default;
    virtual PointKey key(int source, const Vec4& X) const = 0;
    virtual Vec4 combine(const Vec4* X, const double* w, int n) const = 0;
    virtual double distance(const Vec4& A, const Vec4& B) const = 0;
    // Boundary component and height of a boundary face given by three local vertices of t.
    virtual std::pair<int, double> boundary_of(const AsmTet& t, const std::array<int, 3>& local) const = 0;
    // Cusp id and height of a vertex for bookkeeping; (-1, 0) when not in a cusp neighbourhood.
    virtual std::pair<int, double> vertex_info(const AsmTet& t, int local) const { (void)t; (void)local; return {-1, 0.0}; }
    double tolerance = 1e-7;
};

MetricMesh assemble_mesh(const std::vector<AsmTet>& tets, const AssemblyModel& model, const std::string& kind);

// ---- Concrete meshes --------------------------------------------------------------------------

// Flat torus R^3 / (a Z x b Z x c Z) from k^3 boxes, each cut into 6 tetrahedra (k = max(1, refinement)).
MetricMesh build_flat_torus_mesh(const std::array<double, 3>& box, int k);

// Model cusp region {z0 <= z <= z1} over the torus C / (Z xi + Z eta): a grid x grid periodic grid
// of parallelograms, geometric height layers with ratio <= rho, boundary components 0 (bottom) and 1 (top).
struct ModelCuspMeshInfo {
    std::vector<double> layer_heights;
    std::vector<std::vector<int>> layer_vertices;  // vertex ids per layer, grid-major (i*grid + j)
    int grid = 0;
};
MetricMesh build_model_cusp_mesh(const ModelCusp& mc, ModelCuspMeshInfo* info = nullptr);

// Truncated hyperbolic manifold M_T: horotori at height e^T, necks graded with ratio <= rho.
struct HyperbolicMeshOptions {
    double neck_ratio = 1.5;
    double core_margin = 1.25;  // cores end at this multiple of the largest cusp-triangle circumradius
    double neck_spacing = 2.0;  // cap on layer spacing in units of the shortest cusp-triangle edge
    int max_refinement = 4;
};
MetricMesh build_metric_mesh(const TriangulatedManifold& M, double T, int refinement,
                             const HyperbolicMeshOptions& opt = {});
// Dispatches on the manifold kind (flat tori ignore T).
MetricMesh build_mesh_for(const TriangulatedManifold& M, double T, int refinement,
                          const HyperbolicMeshOptions& opt = {});

// Analytic hyperbolic volume of the truncation at height T: vol(M) - sum_c area_c / (2 e^{2T}).
double truncated_volume(const TriangulatedManifold& M, double T);

// Horosphere-normalised vertex vectors of each ideal tetrahedron (cusp cross-section at height 1
// has the area of the ingested cusp). Exposed for tests.
struct IdealFrames {
    std::vector<std::array<Vec4, 4>> ell;
    double scale_residual = 0.0;  // worst inconsistency of horosphere scales across gluings
};
IdealFrames ideal_frames(const TriangulatedManifold& M);

// ---- Simplicial mesh files --------------------------------------------------------------------
MetricMesh read_mesh_file(const std::string& path);
MetricMesh parse_mesh_text(const std::string& text);
void write_mesh_file(const MetricMesh& mesh, const std::string& path);
// Mesh from explicit simplicial data: distinct vertex ids per tetrahedron, lengths per vertex pair.
MetricMesh simplicial_mesh(int num_vertices, const std::vector<std::array<int, 4>>& tets,
                           const std::vector<std::pair<std::array<int, 2>, double>>& lengths);

}  // namespace hnorm
