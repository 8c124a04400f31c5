#include "hnorm/bessel.hpp"

#include <cmath>
#include <numbers>

#include "hnorm/errors.hpp"

namespace hnorm {

namespace {

constexpr double kEuler = 0.57721566490153286061;

std::pair<double, double> series(double x) {
    const double y = 0.25 * x * x;
    const double lg = std::log(0.5 * x);
    // K0 = -(ln(x/2) + gamma) I0 + sum y^k/(k!)^2 H_k
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum (psi(k+1) + psi(k+2)) y^k / (k! (k+1)!)
    double term0 = 1.0;  // y^k / (k!)^2
    double term1 = 1.0;  // y^k / (k! (k+1)!)
    double I0 = 0.0, I1 = 0.0, S0 = 0.0, S1 = 0.0, H = 0.0;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            term0 *= y / (static_cast<double>(k) * k);
            term1 *= y / (static_cast<double>(k) * (k + 1));
            H += 1.0 / k;
        }
        I0 += term0;
        I1 += term1;
        S0 += term0 * H;
        const double psi1 = -kEuler + H;
        const double psi2 = psi1 + 1.0 / (k + 1);
        S1 += (psi1 + psi2) * term1;
        if (term0 < 1e-18 * I0 && k > 2) break;
    }
    I1 *= 0.5 * x;
    const double k0 = -(lg + kEuler) * I0 + S0;
    const double k1 = 1.0 / x + lg * I1 - 0.25 * x * S1;
    return {k0, k1};
}

std::pair<double, double> continued_fraction(double x) {
    const double eps = 1e-16;
    double b = 2.0 * (1.0 + x), d = 1.0 / b, h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < 100000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::fabs(dels / s) < eps) break;
    }
    h = a1 * h;
    const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
    const double k1 = k0 * (x + 0.5 - h) / x;
    return {k0, k1};
}

}  // namespace

std::pair<double, double> bessel_k01(double x) {
    if (!(x > 0.0)) throw DomainError("Bessel K needs a positive argument");
    return x <= 2.0 ? series(x) : continued_fraction(x);
}

double bessel_k0(double x) { return bessel_k01(x).first; }
double bessel_k1(double x) { return bessel_k01(x).second; }

double bessel_identity_residual(double z) {
    const double h = 1e-3 * std::max(1.0, z) * std::min(1.0, z);
    auto g = [](double t) { return t * bessel_k1(t); };
    const double deriv = (g(z - 2 * h) - 8 * g(z - h) + 8 * g(z + h) - g(z + 2 * h)) / (12 * h);
    const double zk0 = z * bessel_k0(z);
    return std::fabs(deriv + zk0) / std::fabs(zk0);
}

std::vector<BesselResidualRow> bessel_identity_table(double a, double b, int n) {
    if (n < 2 || !(b > a) || !(a > 0)) throw PreconditionError("identity table needs 0 < a < b and n >= 2");
    std::vector<BesselResidualRow> rows;
    for (int i = 0; i < n; ++i) {
        const double z = a + (b - a) * i / (n - 1);
        rows.push_back({z, bessel_identity_residual(z)});
    }
    return rows;
}

}  // namespace hnorm
