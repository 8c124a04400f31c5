#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hnorm/dec.hpp"
#include "hnorm/manifold.hpp"
#include "hnorm/mesh.hpp"

namespace hnorm {

// v(r) = 6 pi (r + 2 r csch^2 r - coth r (r^2 csch^2 r + 1)). Below r = 0.5 the odd power series
// through r^29 replaces the closed form, which cancels catastrophically near 0.
constexpr double kVSeriesThreshold = 0.5;
double v_of_r(double r);

// ---- Mean-value bound ---------------------------------------------------------------------------

// Harmonic functions on the upper half-space model available to the mean-value check.
std::vector<std::string> harmonic_catalog();

struct MeanValueResult {
    std::string function;
    std::array<double, 3> center{0, 0, 1};
    double radius = 0.0;
    double lhs = 0.0;       // |df_p|
    double ball_l2 = 0.0;   // ||df||_{L2(B)}
    double rhs = 0.0;       // ball_l2 / sqrt(v(r))
    bool pass = false;
};

// Throws PreconditionError for an unknown function id and DomainError unless r > 0 and z > 0.
MeanValueResult mean_value_bound_check(const std::string& function_id, const std::array<double, 3>& center, double r);

// ---- Constants -----------------------------------------------------------------------------------

struct RhsConstants {
    double main = 0.0;  // right-hand constant of the two-sided inequality
    double linf = 0.0;  // L-infinity / L2 constant
    std::string branch; // "systole", "diameter" or "injectivity"
    double sys = 0.0;
    double d_max = 0.0;
};

RhsConstants rhs_constants(double sys, double d_max);
RhsConstants rhs_constants_closed(double inj);
// Cusped manifolds use the systole and the largest cusp diameter; closed ones need an ingested
// injectivity radius (PreconditionError otherwise).
RhsConstants rhs_constants(const TriangulatedManifold& M);

// ---- Per-class report ----------------------------------------------------------------------------

struct ErrorBudget {
    double solver = 0.0;      // CG residual contribution to l2
    double truncation = 0.0;  // cusp tail beyond the truncation height
    double mesh = 0.0;        // change of l2 between the two finest refinements
    double total() const { return solver + truncation + mesh; }
};

// Norm data for one class as produced by the pipeline.
struct ClassNormInput {
    std::vector<long long> coords;
    double thurston = 0.0;
    std::string provenance;   // "ingested", "upper_bound", "zero"
    std::optional<double> l2;
    std::optional<double> l1_min;
    double l1_lower = 0.0;    // certified lower bound of l1_min
    std::optional<double> linf;
    double cv = 0.0;          // constant-length coefficient of variation
    ErrorBudget budget;
};

struct SharpnessRecord {
    double cv = 0.0;
    double ratio_pi = 0.0;    // l1_min / (pi Th)
    double ratio_2pi = 0.0;   // l1_min / (2 pi Th)
    std::string sandwich;     // "inside", "outside" or "inconclusive"
    bool left_strict = false;
};

struct ClassRecord {
    ClassNormInput input;
    bool skipped = false;     // zero class
    double left_slack = 0.0;  // l2 - pi Th / sqrt(vol)
    double right_slack = 0.0; // rhs Th - l2
    bool left_holds = false;
    bool right_holds = false;
    bool left_strict = false; // left slack beyond the error budget
    bool chain_checked = false;
    bool chain_pi_l1 = false;      // pi Th <= l1_min
    bool chain_l1_l2 = false;      // l1_min <= sqrt(vol) l2
    bool chain_l2_linf = false;    // l2^2 <= 2 pi linf Th
    std::vector<std::string> flags;
    SharpnessRecord sharpness;
};

struct ReportContext {
    std::string name;
    double vol = 0.0;
    RhsConstants rhs;
    bool hyperbolic = true;  // false for the flat control case
};

ClassRecord evaluate_class(const ReportContext& ctx, const ClassNormInput& in);

// Sharpness diagnostics from already computed norms.
SharpnessRecord sharpness_diagnostics(const ClassNormInput& in, double left_slack);

// Coefficient of variation (volume weighted) of the pointwise norm of the Whitney form at the
// quadrature points of every cell.
double constant_length_cv(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const std::vector<double>& cochain);

// ---- D_i, D_s -------------------------------------------------------------------------------------

struct DiDsResult {
    double Di = 0.0;
    double Ds = 0.0;
    bool exact = false;
    int samples = 0;            // directions evaluated when sampling
    double resolution = 0.0;    // angular spacing of the final refinement
    std::vector<double> argmin, argmax;  // image coordinates on the L2-unit ellipsoid
};

// `gram` is the L2 Gram matrix of the harmonic basis representatives (row-major, rank x rank).
// With dual-ball vertices the extrema are exact; otherwise `thurston` is sampled on the sphere of
// the L2-orthonormal frame. Throws PreconditionError("no L2 harmonic forms") when the rank is 0.
DiDsResult functionals_DiDs(double vol, const std::vector<std::vector<double>>& gram,
                            const std::vector<std::vector<double>>& ball_vertices,
                            const std::function<double(const std::vector<double>&)>& thurston = {},
                            int samples = 2000);

// ---- Report ---------------------------------------------------------------------------------------

struct NormReport {
    std::string name;
    std::string kind;           // "ideal" or "flat_torus"
    bool hyperbolic = true;
    bool orientable = true;
    int rank = 0;               // dimension of the space of L2 harmonic classes
    double vol = 0.0;
    double sys = 0.0;
    double d_max = 0.0;
    double v_ln_sqrt2 = 0.0;    // v(ln sqrt 2)
    double inv_sqrt_v = 0.0;    // 1 / sqrt(v(ln sqrt 2))
    RhsConstants rhs;
    double truncation_height = 0.0;  // log height T of the finest mesh
    int refinement = 0;
    int mesh_tets = 0;
    double mesh_volume = 0.0;
    std::vector<ClassRecord> classes;
    std::vector<std::vector<double>> gram;
    bool has_D = false;
    DiDsResult D;
    std::vector<std::string> notes;
};

// ---- Cover scaling -------------------------------------------------------------------------------

struct CoverSide {
    double vol = 0.0;
    std::vector<std::vector<double>> gram;
    std::function<double(const std::vector<double>&)> thurston;
    bool thurston_ingested = false;
};

struct CoverClassRatio {
    std::vector<long long> base_coords;
    std::vector<long long> cover_coords;
    double l2_ratio = 0.0;        // expected sqrt(degree)
    double thurston_ratio = 0.0;  // expected degree (0 when not both ingested)
    double d_ratio = 0.0;         // expected 1
};

struct CoverScalingRecord {
    int degree = 1;
    std::vector<CoverClassRatio> classes;
    double worst_l2_deviation = 0.0;  // max |l2_ratio / sqrt(d) - 1|
    double worst_d_deviation = 0.0;   // max |d_ratio - 1|
};

// `correspondence` row i holds the cover coordinates of the pullback of base basis class i.
// Throws PreconditionError when the correspondence is missing or has the wrong shape.
CoverScalingRecord cover_scaling_check(const CoverSide& base, const CoverSide& cover, int degree,
                                       const std::vector<std::vector<long long>>& correspondence,
                                       const std::vector<std::vector<long long>>& base_classes);

}  // namespace hnorm
