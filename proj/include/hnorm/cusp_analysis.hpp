#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hnorm/manifold.hpp"
#include "hnorm/mesh.hpp"

namespace hnorm {

// ---- Flat torus spectrum ------------------------------------------------------------------------

// Dual-lattice vector w with <w, xi> = m and <w, eta> = n; the character is exp(2 pi i <w, p>),
// i.e. exp(2 pi i (m s + n t)) at p = s xi + t eta.
struct LatticeMode {
    int m = 0;
    int n = 0;
    cplx w;
    double lambda = 0.0;  // 2 pi |w|
};

cplx dual_lattice_vector(const CuspData& cusp, int m, int n);
// The `count` smallest nonzero dual-lattice vectors with multiplicity (w and -w both listed),
// ordered by norm, then by (m, n).
std::vector<LatticeMode> torus_spectrum(const CuspData& cusp, int count);

// ---- Fourier-Bessel expansion -------------------------------------------------------------------

// Radial profile g(z) = z K1(lambda z) and its derivative -lambda z K0(lambda z).
double bessel_profile(double lambda, double z);
double bessel_profile_derivative(double lambda, double z);

// One term z K1(lambda z) (a cos(2 pi <w,p>) + b sin(2 pi <w,p>)); w and -w are merged.
struct ExpansionTerm {
    LatticeMode mode;
    double a = 0.0;
    double b = 0.0;
    double amplitude() const;
};

struct CuspExpansion {
    int cusp_id = 0;
    std::vector<ExpansionTerm> terms;  // increasing lambda
    bool lambda1_defined = false;
    double lambda1 = 0.0;              // lambda of the first term
    double base_height = 1.0;
    double area = 1.0;                 // cross-section area at height 1
    double fitted_rate = 0.0;          // free decay-rate fit of the dominant term
    double fit_residual = 0.0;         // relative rms misfit of the traces
    std::vector<double> fit_heights;
    std::array<double, 2> flat_periods{0.0, 0.0};  // horizontal periods of the form (lambda = 0 part)
};

struct ExpandOptions {
    double window = 0.5;        // fit heights lie in [base + window, top - window]
    int max_modes = 24;         // modes examined (with multiplicity)
    double drop_tolerance = 1e-8;
};

// Least-squares Fourier-Bessel fit of the cross-section traces of a closed 1-cochain on a
// model-cusp mesh. Throws PreconditionError("insufficient cross-sections") when fewer than
// three layers fall in the fit window, or when `heights` requests layers that do not exist.
CuspExpansion cusp_expand(const MetricMesh& mesh, const ModelCuspMeshInfo& info, const CuspData& cusp,
                          const std::vector<double>& cochain, const std::vector<double>& heights = {},
                          const ExpandOptions& opt = {});

// Harmonic potential on a model-cusp mesh: prescribed values on the bottom layer (a function of
// the lattice coordinates s, t), zero on the top layer. Returns the vertex potential.
std::vector<double> model_cusp_harmonic(const MetricMesh& mesh, const ModelCuspMeshInfo& info,
                                        const std::function<double(double, double)>& bottom,
                                        double tolerance = 1e-12);
// Vertex values of a function f(x, y, z) in chart coordinates and its coboundary.
std::vector<double> sample_vertices(const MetricMesh& mesh, const std::function<double(double, double, double)>& f);
std::vector<double> coboundary(const MetricMesh& mesh, const std::vector<double>& vertex_values);

struct TailNorms {
    double l2 = 0.0;
    double linf = 0.0;
};
// Norms of the expansion restricted to heights above T (cusp measure dx dy dz / z^3).
TailNorms tail_norms(const CuspExpansion& exp, double T);

// ---- Retraction compactification ----------------------------------------------------------------

struct RetractionResult {
    int support_index = 1;
    double cutoff_start = 0.0;  // the cutoff equals 1 above this height
    double support_height = 0.0;  // and vanishes below this one
    double l2_error = 0.0;        // |alpha - alpha_i|
};

// Cutoff f_i(s) = chi(i s / eps) in the compactified coordinate s = 1/z, eps = 1/base_height,
// with chi = 1 on [0, 1/2] and 0 beyond 1 (cubic smoothstep in between).
double retraction_cutoff(double base_height, int i, double z);
RetractionResult retraction_compactify(const CuspExpansion& exp, int i);
// Discrete counterpart on a model-cusp mesh for an exact form alpha = d f: alpha - d(f_i f).
std::vector<double> retraction_cochain(const MetricMesh& mesh, const std::vector<double>& potential,
                                       double base_height, int i);

struct PowerLawFit {
    double exponent = 0.0;  // err ~ C (1/i)^exponent
    double log_constant = 0.0;
};
PowerLawFit fit_power_law(const std::vector<int>& indices, const std::vector<double>& errors);

// ---- Model computations ------------------------------------------------------------------------

// Raised-cosine bump of half-width 3/8 centred at c, scaled so that its integral against dz/z is 1.
struct TorusModelValue {
    double c = 0.0;
    double norm_squared = 0.0;
    double law = 0.0;    // log((c + 1) / (c - 1))
    double ratio = 0.0;  // norm_squared / law
};
constexpr double kTorusBumpHalfWidth = 0.375;
TorusModelValue torus_model_norm(double c, double area = 1.0);

struct BlowupModel {
    std::vector<double> heights;       // upper heights Z
    std::vector<double> norm_squared;  // partial norm^2 over [sqrt 2, Z]
    double slope = 0.0;                // least-squares slope against log Z
    double intercept = 0.0;
};
// The form dual to a vertical annulus end in the unit-square cusp (dx), integrated on model-cusp
// meshes between sqrt(2) and each Z.
BlowupModel blowup_model(const std::vector<double>& heights, int grid = 8, double ratio = 1.1);

// ---- Analytic checks on basis terms -------------------------------------------------------------

// Hyperbolic Laplacian z^2 (f_xx + f_yy + f_zz) - z f_z by central differences with relative step h.
double hyperbolic_laplacian_fd(const std::function<double(double, double, double)>& f, double x, double y,
                               double z, double h);
// Max |Delta f| / max |f| of z K1(lambda z) cos(lambda x) on a sample grid in [base, base + 2].
double basis_term_residual(double lambda, double h, double base = 1.0);

struct SubharmonicReport {
    double min_laplacian = 0.0;  // minimum of Delta h over interior samples
    int samples = 0;
    bool pass = false;
};
// h = |df|^2 / 2 + (f + c)^2 for f = z K1(lambda z) cos(lambda x). Delta h comes from a
// Richardson-extrapolated stencil; the check passes when its minimum stays above -tolerance times
// the largest sampled |Delta h|.
SubharmonicReport subharmonicity_check(double lambda, double c, double base = 1.0, double tolerance = 1e-6);

// Integral of a nonconstant character term over the cross-section torus at height z (trapezoid
// rule on an n x n grid in lattice coordinates).
double cross_section_mean(const CuspData& cusp, const LatticeMode& mode, double z, int n = 64);

}  // namespace hnorm
