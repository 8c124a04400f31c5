#pragma once

#include <array>
#include <string>
#include <vector>

#include "hnorm/cohomology.hpp"
#include "hnorm/dec.hpp"
#include "hnorm/mesh.hpp"

namespace hnorm {

enum class BoundaryCondition { Relative, Absolute };

struct HarmonicOptions {
    BoundaryCondition bc = BoundaryCondition::Relative;
    double tolerance = 1e-10;   // relative CG residual
    int max_iter_factor = 10;   // iteration cap = factor * unknowns
};

// A closed 1-form given per tetrahedron by a local affine potential (value at each local vertex).
struct ClosedForm {
    std::vector<double> cochain;                  // mesh edge values
    std::vector<std::array<double, 4>> potential; // per tetrahedron
};

ClosedForm closed_form(const MetricMesh& mesh, const std::vector<double>& cochain);
// Throws DomainError when the face sums of the cochain are not zero to tolerance.
void require_closed(const MetricMesh& mesh, const std::vector<double>& cochain, double tol = 1e-9);

struct HarmonicResult {
    ClosedForm form;
    std::vector<double> vertex_correction;  // f with alpha = x + df
    double l2 = 0.0;
    int iterations = 0;
    double residual = 0.0;
    int unknowns = 0;
};

// Minimiser of the L2 norm over x + df, f constant on each boundary component (relative) or
// unconstrained (absolute). Throws SolverError when CG does not reach the tolerance.
HarmonicResult harmonic_representative(const MetricMesh& mesh, const std::vector<TetGeometry>& geo,
                                       const std::vector<double>& cochain, const HarmonicOptions& opt = {});

struct NormBundle {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double volume = 0.0;
};

// Norms of the Whitney reconstruction: l2 from the exact mass form, l1 and linf from the
// four-point rule in every cell.
NormBundle form_norms(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const std::vector<double>& cochain);
NormBundle closed_form_norms(const std::vector<TetGeometry>& geo, const ClosedForm& form);

struct L1Options {
    BoundaryCondition bc = BoundaryCondition::Relative;
    int max_iterations = 60;
    double relative_gap = 1e-4;
    double eps_floor = 1e-7;  // relative to the mean pointwise norm
};

struct L1Result {
    double value = 0.0;        // primal objective of the final iterate
    double lower_bound = 0.0;  // dual certificate value
    double gap = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimum L1 norm over the class of x via iteratively reweighted least squares. The weighted
// gradient of each iterate is a divergence-free field of pointwise norm < 1, which certifies
// the lower bound.
L1Result l1_minimize(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const std::vector<double>& cochain,
                     const L1Options& opt = {});

// Flux of the harmonic form through a surface, with each polygon oriented along the gradient of
// `orientation_cochain` (a closed cochain whose level sets produced the surface).
double surface_flux(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const DualSurface& surface,
                    const ClosedForm& harmonic, const std::vector<double>& orientation_cochain);

struct FluxReport {
    double flux = 0.0;          // through the surface at the first sampled level
    double l2_squared = 0.0;
    double discrepancy = 0.0;   // worst |flux - l2^2| / l2^2 over the sampled levels
    double mean_flux = 0.0;     // level average; equals l2^2 up to solver tolerance
    int levels = 0;
};

// The harmonic form of a class divisible by `copies` is sampled through the level surfaces of its
// own potential (copies parallel sheets each) at `levels` evenly spaced levels.
FluxReport flux_check(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const ClosedForm& harmonic,
                      int copies = 1, int levels = 16);

struct SweepFit {
    std::vector<double> heights;
    std::vector<double> values;
    double A = 0.0;  // extrapolated value
    double B = 0.0;
    double lambda1 = 0.0;
    bool fitted = false;
    std::string warning;
};

// Fits values(T) = A - B exp(-2 lambda1 e^T) over truncation heights T (log heights).
// Heights must increase strictly.
SweepFit fit_truncation_sweep(const std::vector<double>& heights, const std::vector<double>& values, double lambda1);

}  // namespace hnorm
