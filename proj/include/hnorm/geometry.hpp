#pragma once

#include <vector>

#include "hnorm/manifold.hpp"

namespace hnorm {

// Lobachevsky function via its Fourier series, truncated once terms drop below `term_tol`.
double lobachevsky(double theta, double term_tol = 1e-12);

double ideal_tet_volume(cplx z);
double volume(const TriangulatedManifold& M);

// Derived lattice data for the translations xi, eta. Throws ValidationError when collinear.
CuspData cusp_from_translations(cplx xi, cplx eta);
std::vector<CuspData> cusp_geometry(const TriangulatedManifold& M);

// Gauss-reduced basis of Z xi + Z eta (shortest vector first).
std::pair<cplx, cplx> reduce_lattice(cplx xi, cplx eta);
// Largest distance from a point of the plane to the lattice (torus intrinsic diameter).
double covering_radius(cplx xi, cplx eta);

struct TruncationConstants {
    double tau0 = 0.0;
    double L0 = 0.0;
    double tau = 0.0;
};

TruncationConstants truncation_constants(const TriangulatedManifold& M, double tau0);

struct ThickThin {
    double mu = 0.29;
    double systole = 0.0;
    bool no_margulis_tubes = false;  // systole >= mu
};

ThickThin thick_thin_constants(const TriangulatedManifold& M);

constexpr double kMargulis = 0.29;

}  // namespace hnorm
