#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "hnorm/mesh.hpp"

namespace hnorm {

using SpMat = Eigen::SparseMatrix<double>;

// Euclidean tetrahedron reconstructed from its six edge lengths.
struct TetGeometry {
    double volume = 0.0;
    Eigen::Matrix3d gram;        // G_ij = <p_i - p_0, p_j - p_0>, i, j = 1..3
    Eigen::Matrix3d gram_inv;
    Eigen::Matrix4d grad_gram;   // <grad lambda_i, grad lambda_j>
    std::array<Eigen::Vector3d, 4> position;  // an isometric embedding with p_0 = 0
};

// Throws MeshError when the lengths do not span a positive-volume tetrahedron.
TetGeometry tet_geometry(const std::array<double, 6>& lengths);
std::vector<TetGeometry> mesh_geometry(const MetricMesh& mesh);

// Constant gradient of the affine function with increments x[i] = u(p_{i+1}) - u(p_0), i = 0..2,
// expressed in the embedding coordinates of g.
Eigen::Vector3d affine_gradient(const TetGeometry& g, const Eigen::Vector3d& x);
// Local edge values (kEdgeVerts orientation) of a mesh 1-cochain on tetrahedron t.
std::array<double, 6> local_edge_values(const MetricMesh& mesh, int t, const std::vector<double>& x);

// Local Galerkin mass matrices of Whitney forms. Edge order follows kEdgeVerts; face i omits
// vertex i with the remaining vertices in increasing order.
Eigen::Matrix4d whitney_mass0(const TetGeometry& g);
Eigen::Matrix<double, 6, 6> whitney_mass1(const TetGeometry& g);
Eigen::Matrix4d whitney_mass2(const TetGeometry& g);
// Whitney 1-form of the local edge values evaluated at barycentric point b.
Eigen::Vector3d whitney1_at(const TetGeometry& g, const std::array<double, 6>& x, const std::array<double, 4>& b);

struct DecOperators {
    SpMat d0, d1, d2;  // coboundaries: vertices->edges, edges->faces, faces->tets
    SpMat M0, M1, M2;  // global Galerkin mass matrices
    std::vector<double> tet_volume;
};

DecOperators dec_operators(const MetricMesh& mesh);

// Symmetric 4-point rule exact for quadratics (barycentric points, weights sum to 1).
struct QuadraturePoint {
    std::array<double, 4> bary;
    double weight;
};
const std::array<QuadraturePoint, 4>& tet_quadrature();

}  // namespace hnorm
