#include <cmath>

#include "doctest.h"
#include "fixture_path.hpp"
#include "hnorm/cohomology.hpp"
#include "hnorm/covers.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"

using namespace hnorm;

TEST_CASE("flat 3-torus homology") {
    const MetricMesh mesh = build_flat_torus_mesh({1, 1, 1}, 2);
    const HomologyReport H = homology(mesh_complex(mesh));
    CHECK(H.betti(0) == 1);
    CHECK(H.betti(1) == 3);
    CHECK(H.betti(2) == 3);
    CHECK(H.betti(3) == 1);
}

TEST_CASE("homology of the cusped fixtures matches SnapPy") {
    // SnapPy: H1(m004) = Z, H1(m000) = Z, H1(s789) = Z + Z.
    struct Row {
        const char* file;
        int b1;
    };
    for (const Row& r : {Row{"figure8.mfd", 1}, Row{"gieseking.mfd", 1}, Row{"s789.mfd", 2}}) {
        CAPTURE(r.file);
        const TriangulatedManifold M = parse_manifold(fixture(r.file));
        const HomologyReport H = homology(spine_complex(M), true);
        CHECK(H.betti(0) == 1);
        CHECK(H.betti(1) == r.b1);
        CHECK(H.groups[1].torsion.empty());
    }
}

TEST_CASE("half of the boundary homology dies: image rank is b1 minus the cusp count") {
    const TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    const HomologyReport rel = homology(relative_complex(M));
    CHECK(rel.betti(2) == 2);  // H2(M, dM) = H^1(M)
    CHECK(image_subspace(M).rank() == 1);
    CHECK(image_subspace(parse_manifold(fixture("figure8.mfd"))).rank() == 0);
    CHECK(image_subspace(parse_manifold(fixture("s789_cover.mfd"))).rank() == 1);
}

TEST_CASE("mesh exact sequence confirms the image rank") {
    const TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    const MetricMesh mesh = build_mesh_for(M, truncation_constants(M, M.tau0).tau, 0);
    CHECK(mesh_image_rank(mesh) == 1);
}

TEST_CASE("empty complex is rejected") { CHECK_THROWS_AS(homology(ChainComplex{}), PreconditionError); }

TEST_CASE("boundary-parallel tori map to zero in the image") {
    const TriangulatedManifold C = parse_manifold(fixture("s789_cover.mfd"));
    const ImageSubspace S = image_subspace(C);
    for (int c = 0; c < S.num_cusps; ++c) {
        const auto phi = peripheral_cocycle(S, c);
        CHECK(is_cocycle(S, phi));
        const auto coords = class_coordinates(S, phi);
        for (double v : coords) CHECK(v == 0.0);
    }
}

TEST_CASE("image basis round trips through coordinates") {
    const ImageSubspace S = image_subspace(parse_manifold(fixture("s789.mfd")));
    for (long long k : {1LL, -3LL, 5LL}) {
        const auto phi = cocycle_from_coords(S, {k});
        CHECK(is_cocycle(S, phi));
        CHECK(class_coordinates(S, phi)[0] == doctest::Approx(static_cast<double>(k)));
    }
}

TEST_CASE("dual surfaces: flat level torus and doubled classes") {
    const TriangulatedManifold F = parse_manifold(fixture("flat_torus.mfd"));
    const ClassSpace SF = class_space(F);
    const MetricMesh flat = build_flat_torus_mesh(F.box, 2);
    const DualSurface T = dual_surface(flat, SF, {0, 0, 1});
    CHECK(T.components == 1);
    CHECK(T.euler_characteristic == 0);
    CHECK(T.chi_minus == 0);
    CHECK_THROWS_AS(dual_surface(flat, SF, {0, 0, 0}), DomainError);

    const TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    const ClassSpace S = class_space(M);
    const MetricMesh mesh = build_mesh_for(M, truncation_constants(M, M.tau0).tau, 0);
    const DualSurface one = dual_surface(mesh, S, {1});
    const DualSurface two = dual_surface(mesh, S, {2});
    CHECK(one.upper_bound);
    CHECK(two.copies == 2);
    CHECK(two.chi_minus == 2 * one.chi_minus);
    CHECK(one.chi_minus >= 2);  // never below the exact norm
}

TEST_CASE("Thurston norm evaluation") {
    const TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    ThurstonValue t = thurston_norm(M, {1.0});
    CHECK(t.value == 2.0);
    CHECK(t.provenance == "ingested");
    CHECK(thurston_norm(M, {-3.5}).value == doctest::Approx(7.0));
    CHECK(thurston_norm(M, {0.0}).provenance == "zero");

    // Class norms along a ray without ball data.
    TriangulatedManifold R = M;
    R.thurston_ball.clear();
    CHECK(thurston_norm(R, {0.25}).value == doctest::Approx(0.5));
    CHECK(thurston_norm(R, {0.25}).provenance == "ingested");

    // Without any ingested data the dual surface gives an upper bound.
    R.class_norms.clear();
    CHECK_THROWS_AS(thurston_norm(R, {1.0}), PreconditionError);
    const ClassSpace S = class_space(R);
    const MetricMesh mesh = build_mesh_for(R, truncation_constants(R, R.tau0).tau, 0);
    const ThurstonValue ub = thurston_norm(R, {1.0}, &mesh, &S);
    CHECK(ub.provenance == "upper_bound");
    CHECK(ub.value >= 2.0);
    CHECK_THROWS_AS(thurston_norm(R, {0.5}, &mesh, &S), DomainError);
}

TEST_CASE("Thurston norm on the image vanishes only at zero and obeys the norm axioms") {
    for (const char* f : {"s789.mfd", "s789_cover.mfd"}) {
        const TriangulatedManifold M = parse_manifold(fixture(f));
        for (double a : {-2.0, -0.5, 0.3, 1.0, 4.0}) {
            CHECK(thurston_norm(M, {a}).value > 0.0);
            for (double b : {-1.0, 0.7})
                CHECK(thurston_norm(M, {a + b}).value <= thurston_norm(M, {a}).value + thurston_norm(M, {b}).value + 1e-12);
        }
    }
}

TEST_CASE("double covers of s789") {
    const TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    // Labellings form a GF(2) space of dimension dim H^1(M; Z/2) + (tetrahedra - 1) = 2 + 5.
    CHECK(double_cover_labellings(M).size() == 127);
    const TriangulatedManifold C = find_double_cover(M, 2, "s789_cover");
    CHECK(C.num_tets() == 12);
    CHECK(C.cusps.size() == 2);
    CHECK(validate_manifold(C).edge_residual < 1e-9);
    CHECK(volume(C) == doctest::Approx(2.0 * volume(M)).epsilon(1e-12));
    const auto P = pullback_correspondence(M, C);
    REQUIRE(P.size() == 1);
    CHECK(std::llabs(P[0][0]) == 2);

    // The stored fixture is the regenerated cover with ingested systole and Thurston data.
    const TriangulatedManifold stored = parse_manifold(fixture("s789_cover.mfd"));
    CHECK(stored.gluings.size() == C.gluings.size());
    for (int t = 0; t < C.num_tets(); ++t)
        for (int f = 0; f < 4; ++f) {
            CHECK(stored.gluings[t][f].tet == C.gluings[t][f].tet);
            CHECK(stored.gluings[t][f].perm == C.gluings[t][f].perm);
        }
    CHECK(stored.cover_of->matrix == P);
}
