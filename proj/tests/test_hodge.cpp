#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixture_path.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"
#include "hnorm/hodge.hpp"

using namespace hnorm;

namespace {

const double kPi = std::numbers::pi;

struct Setup {
    TriangulatedManifold M;
    ClassSpace S;
    MetricMesh mesh;
    std::vector<TetGeometry> geo;
};

Setup flat(int k = 2) {
    Setup s;
    s.M = parse_manifold(fixture("flat_torus.mfd"));
    s.S = class_space(s.M);
    s.mesh = build_flat_torus_mesh(s.M.box, k);
    s.geo = mesh_geometry(s.mesh);
    return s;
}

const Setup& s789() {
    static const Setup s = [] {
        Setup r;
        r.M = parse_manifold(fixture("s789.mfd"));
        r.S = class_space(r.M);
        r.mesh = build_mesh_for(r.M, truncation_constants(r.M, r.M.tau0).tau, 0);
        r.geo = mesh_geometry(r.mesh);
        return r;
    }();
    return s;
}

// Coboundary of a vertex function that vanishes on the boundary.
std::vector<double> exact_cochain(const MetricMesh& mesh, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> g(mesh.num_vertices);
    for (int v = 0; v < mesh.num_vertices; ++v) g[v] = mesh.vertex_boundary[v] >= 0 ? 0.0 : u(gen);
    std::vector<double> d(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) d[e] = g[mesh.edges[e].v[1]] - g[mesh.edges[e].v[0]];
    return d;
}

std::vector<double> add(std::vector<double> a, const std::vector<double>& b, double s = 1.0) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
    return a;
}

}  // namespace

TEST_CASE("flat torus: the harmonic representative of the z-dual class is dz") {
    const Setup s = flat();
    const auto x = transfer_cochain(s.mesh, s.S, {0, 0, 1});
    const HarmonicResult h = harmonic_representative(s.mesh, s.geo, add(x, exact_cochain(s.mesh, 1)));
    CHECK(h.l2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(h.residual < 1e-10);
    double diff = 0.0;
    for (int e = 0; e < s.mesh.num_edges(); ++e) diff = std::max(diff, std::abs(h.form.cochain[e] - x[e]));
    CHECK(diff < 1e-9);
}

TEST_CASE("zero class gives the zero form") {
    const Setup s = flat();
    const HarmonicResult h = harmonic_representative(s.mesh, s.geo, std::vector<double>(s.mesh.num_edges(), 0.0));
    CHECK(h.l2 == 0.0);
    for (double v : h.form.cochain) CHECK(v == 0.0);
}

TEST_CASE("non-closed cochains are rejected") {
    const Setup s = flat();
    std::vector<double> x(s.mesh.num_edges(), 0.0);
    x[0] = 1.0;
    CHECK_THROWS_AS(harmonic_representative(s.mesh, s.geo, x), DomainError);
}

TEST_CASE("gauge invariance and minimiser optimality on a cusped mesh") {
    const Setup& s = s789();
    const auto x = transfer_cochain(s.mesh, s.S, {1});
    const HarmonicResult h0 = harmonic_representative(s.mesh, s.geo, x);
    const HarmonicResult h1 = harmonic_representative(s.mesh, s.geo, add(x, exact_cochain(s.mesh, 5)));
    double diff = 0.0, scale = 0.0;
    for (int e = 0; e < s.mesh.num_edges(); ++e) {
        diff = std::max(diff, std::abs(h0.form.cochain[e] - h1.form.cochain[e]));
        scale = std::max(scale, std::abs(h0.form.cochain[e]));
    }
    CHECK(diff < 1e-6 * scale);
    CHECK(h1.l2 == doctest::Approx(h0.l2).epsilon(1e-9));

    for (unsigned seed : {11u, 12u, 13u}) {
        const auto d = exact_cochain(s.mesh, seed);
        for (double eps : {1e-3, -1e-3}) {
            const NormBundle n = form_norms(s.mesh, s.geo, add(h0.form.cochain, d, eps));
            CHECK(n.l2 >= h0.l2 * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("relative boundary condition: the representative vanishes on boundary edges") {
    const Setup& s = s789();
    const HarmonicResult h = harmonic_representative(s.mesh, s.geo, transfer_cochain(s.mesh, s.S, {1}));
    double worst = 0.0;
    for (int e = 0; e < s.mesh.num_edges(); ++e) {
        const auto& ed = s.mesh.edges[e];
        if (s.mesh.vertex_boundary[ed.v[0]] >= 0 && s.mesh.vertex_boundary[ed.v[1]] >= 0)
            worst = std::max(worst, std::abs(h.form.cochain[e]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("norms of dz and their homogeneity") {
    const Setup s = flat();
    const auto x = transfer_cochain(s.mesh, s.S, {0, 0, 1});
    const NormBundle n = form_norms(s.mesh, s.geo, x);
    CHECK(n.l2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.l1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.linf == doctest::Approx(1.0).epsilon(1e-12));
    const NormBundle n2 = form_norms(s.mesh, s.geo, add(x, x));
    CHECK(n2.l2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(n2.l1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(n2.linf == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("norm bundle inequalities on computed forms") {
    const Setup& s = s789();
    const HarmonicResult h = harmonic_representative(s.mesh, s.geo, transfer_cochain(s.mesh, s.S, {1}));
    for (unsigned seed : {0u, 21u, 22u}) {
        const auto x = seed == 0 ? h.form.cochain : add(h.form.cochain, exact_cochain(s.mesh, seed), 0.3);
        const NormBundle n = form_norms(s.mesh, s.geo, x);
        CHECK(n.l1 <= std::sqrt(n.volume) * n.l2 * (1 + 1e-12));
        CHECK(n.l2 * n.l2 <= n.linf * n.l1 * (1 + 1e-12));
    }
    const NormBundle nh = closed_form_norms(s.geo, h.form);
    CHECK(nh.l2 == doctest::Approx(h.l2).epsilon(1e-9));
}

TEST_CASE("L1 minimisation") {
    const Setup s = flat();
    L1Options opt;
    opt.bc = BoundaryCondition::Absolute;
    const auto x = transfer_cochain(s.mesh, s.S, {0, 0, 1});
    const L1Result r = l1_minimize(s.mesh, s.geo, add(x, exact_cochain(s.mesh, 3), 0.2), opt);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.lower_bound <= r.value + 1e-12);
    CHECK(r.lower_bound == doctest::Approx(1.0).epsilon(1e-3));
    const L1Result z = l1_minimize(s.mesh, s.geo, std::vector<double>(s.mesh.num_edges(), 0.0), opt);
    CHECK(z.value == 0.0);

    const Setup& c = s789();
    const auto y = transfer_cochain(c.mesh, c.S, {1});
    const L1Result l = l1_minimize(c.mesh, c.geo, y);
    const double th = 2.0;
    CHECK(l.lower_bound >= kPi * th);
    CHECK(l.value <= 2.0 * kPi * th);
    CHECK(l.value <= form_norms(c.mesh, c.geo, harmonic_representative(c.mesh, c.geo, y).form.cochain).l1 + 1e-9);
}

TEST_CASE("flux identity") {
    const Setup s = flat();
    const auto x = transfer_cochain(s.mesh, s.S, {0, 0, 1});
    const HarmonicResult h = harmonic_representative(s.mesh, s.geo, x);
    const FluxReport f = flux_check(s.mesh, s.geo, h.form);
    CHECK(f.l2_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.flux == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.discrepancy < 1e-12);

    // Class 3 phi: l2^2 scales by 9, three parallel sheets each carry three times the flux.
    std::vector<double> x3 = x;
    for (double& v : x3) v *= 3.0;
    const HarmonicResult h3 = harmonic_representative(s.mesh, s.geo, x3);
    const FluxReport f3 = flux_check(s.mesh, s.geo, h3.form, 3);
    CHECK(f3.l2_squared == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(f3.flux == doctest::Approx(9.0).epsilon(1e-12));

    const Setup& c = s789();
    const HarmonicResult hc = harmonic_representative(c.mesh, c.geo, transfer_cochain(c.mesh, c.S, {1}));
    const FluxReport fc = flux_check(c.mesh, c.geo, hc.form);
    CHECK(fc.discrepancy < 0.05);
    CHECK(std::abs(fc.mean_flux - fc.l2_squared) < 1e-2 * fc.l2_squared);
}

TEST_CASE("truncation sweep fit") {
    const double A = 4.0, B = 0.3, lam = 2.0;
    std::vector<double> T{0.0, 0.2, 0.4, 0.6}, v;
    for (double t : T) v.push_back(A - B * std::exp(-2.0 * lam * std::exp(t)));
    const SweepFit fit = fit_truncation_sweep(T, v, lam);
    CHECK(fit.fitted);
    CHECK(fit.A == doctest::Approx(A).epsilon(1e-9));

    const SweepFit single = fit_truncation_sweep({1.0}, {2.5}, lam);
    CHECK_FALSE(single.fitted);
    CHECK(single.A == 2.5);
    CHECK(single.warning.find("no extrapolation") != std::string::npos);

    CHECK_THROWS_AS(fit_truncation_sweep({1.0, 0.5}, {1.0, 1.0}, lam), PreconditionError);

    const SweepFit bad = fit_truncation_sweep({0.0, 0.5, 1.0}, {1.0, 0.5, 2.0}, lam);
    CHECK_FALSE(bad.fitted);
    CHECK(bad.A == 2.0);
    CHECK_FALSE(bad.warning.empty());
}

TEST_CASE("two truncation heights give consistent L2 norms") {
    const Setup& s = s789();
    const double tau = truncation_constants(s.M, s.M.tau0).tau;
    const MetricMesh high = build_mesh_for(s.M, tau + 0.5, 0);
    const auto geo = mesh_geometry(high);
    const double l2_low = harmonic_representative(s.mesh, s.geo, transfer_cochain(s.mesh, s.S, {1})).l2;
    const double l2_high = harmonic_representative(high, geo, transfer_cochain(high, s.S, {1})).l2;
    CHECK(std::abs(l2_high - l2_low) < 1e-3 * l2_low);
}
