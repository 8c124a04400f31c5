#pragma once

#include <utility>
#include <vector>

namespace hnorm {

// Modified Bessel functions of the second kind for real x > 0: power series for x <= 2,
// Steed's continued fraction beyond. Throws DomainError for x <= 0.
double bessel_k0(double x);
double bessel_k1(double x);
std::pair<double, double> bessel_k01(double x);

// Relative residual of d/dz (z K1(z)) + z K0(z) = 0 with the derivative from a five-point stencil.
double bessel_identity_residual(double z);

struct BesselResidualRow {
    double z;
    double residual;
};
// n points evenly spaced over [a, b].
std::vector<BesselResidualRow> bessel_identity_table(double a, double b, int n);

}  // namespace hnorm
