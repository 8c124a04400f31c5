#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "fixture_path.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"
#include "hnorm/mesh.hpp"

using namespace hnorm;

TEST_CASE("Cayley-Menger volume of a regular tetrahedron") {
    CHECK(cayley_menger_volume({1, 1, 1, 1, 1, 1}) == doctest::Approx(1.0 / (6.0 * std::sqrt(2.0))).epsilon(1e-14));
    CHECK(cayley_menger_volume({1, 1, 1, 1, 1, 3}) < 0.0);
}

TEST_CASE("flat torus meshes have 6 k^3 positive cells and unit volume") {
    for (int k : {1, 2, 3}) {
        const MetricMesh m = build_flat_torus_mesh({1, 1, 1}, k);
        CHECK(m.num_tets() == 6 * k * k * k);
        CHECK(mesh_volume(m) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_NOTHROW(check_mesh(m));
        CHECK(m.num_vertices - m.num_edges() + m.num_faces() - m.num_tets() == 0);
        CHECK_FALSE(m.has_boundary());
    }
    const MetricMesh box = build_flat_torus_mesh({1, 2, 3}, 2);
    CHECK(mesh_volume(box) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("hyperbolic mesh of a one-cusped manifold has a single boundary torus") {
    const TriangulatedManifold M = parse_manifold(fixture("s789.mfd"));
    const double tau = truncation_constants(M, M.tau0).tau;
    const MetricMesh m = build_metric_mesh(M, tau, 0);
    CHECK(m.num_boundary_components == 1);
    int boundary_faces = 0;
    for (int f = 0; f < m.num_faces(); ++f)
        if (m.face_boundary[f] >= 0) {
            CHECK(m.face_boundary[f] == 0);
            CHECK(m.face_height[f] == doctest::Approx(std::exp(tau)).epsilon(1e-9));
            ++boundary_faces;
        }
    CHECK(boundary_faces > 0);
    // Boundary of a 3-manifold with torus boundary: chi(M) = chi(dM) / 2 = 0.
    CHECK(m.num_vertices - m.num_edges() + m.num_faces() - m.num_tets() == 0);
    CHECK_THROWS_AS(build_metric_mesh(M, tau - 0.1, 0), PreconditionError);
}

TEST_CASE("boundary faces split into one torus per cusp") {
    const TriangulatedManifold C = parse_manifold(fixture("s789_cover.mfd"));
    const MetricMesh m = build_metric_mesh(C, truncation_constants(C, C.tau0).tau, 0);
    CHECK(m.num_boundary_components == 2);
    std::vector<int> count(2, 0);
    for (int f = 0; f < m.num_faces(); ++f)
        if (m.face_boundary[f] >= 0) ++count[m.face_boundary[f]];
    CHECK(count[0] > 0);
    CHECK(count[1] > 0);
}

TEST_CASE("mesh volume converges monotonically to the truncated volume") {
    for (const char* f : {"figure8.mfd", "s789.mfd"}) {
        CAPTURE(f);
        const TriangulatedManifold M = parse_manifold(fixture(f));
        const double tau = truncation_constants(M, M.tau0).tau;
        const double exact = truncated_volume(M, tau);
        double prev = 1e300;
        for (int r = 0; r <= 2; ++r) {
            const double err = std::abs(mesh_volume(build_metric_mesh(M, tau, r)) - exact);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev / exact < 0.02);
    }
}

TEST_CASE("model cusp mesh layers") {
    const ModelCusp mc = parse_model_cusp(fixture("square_cusp.cusp"));
    ModelCuspMeshInfo info;
    const MetricMesh m = build_model_cusp_mesh(mc, &info);
    CHECK(info.layer_heights.front() == doctest::Approx(1.0));
    CHECK(info.layer_heights.back() == doctest::Approx(3.0));
    CHECK(m.num_boundary_components == 2);
    CHECK_NOTHROW(check_mesh(m));
    // Hyperbolic volume of the slab is area (1/z0^2 - 1/z1^2) / 2.
    CHECK(mesh_volume(m) == doctest::Approx(0.5 * (1.0 - 1.0 / 9.0)).epsilon(0.02));
}

TEST_CASE("simplicial mesh files") {
    const std::string text =
        "vertices 5\ntetrahedra\n0 1 2 3\n1 2 3 4\nedge_lengths\n0 1 1\n0 2 1\n0 3 1\n1 2 1\n1 3 1\n2 3 1\n1 4 1\n2 4 1\n3 4 1\n";
    const MetricMesh m = parse_mesh_text(text);
    CHECK(m.num_tets() == 2);
    CHECK(mesh_volume(m) == doctest::Approx(2.0 / (6.0 * std::sqrt(2.0))));
    const auto path = std::filesystem::temp_directory_path() / "hnorm_mesh_roundtrip.txt";
    write_mesh_file(m, path.string());
    const MetricMesh r = read_mesh_file(path.string());
    std::filesystem::remove(path);
    CHECK(r.num_tets() == 2);
    CHECK(mesh_volume(r) == doctest::Approx(mesh_volume(m)).epsilon(1e-14));
    CHECK_THROWS_AS(parse_mesh_text("vertices 4\ntetrahedra\n0 1 2 x\n"), ParseError);
}

TEST_CASE("degenerate cell reports its id") {
    const MetricMesh m = simplicial_mesh(5, {{0, 1, 2, 3}, {1, 2, 3, 4}},
                                         {{{0, 1}, 1}, {{0, 2}, 1}, {{0, 3}, 1}, {{1, 2}, 1}, {{1, 3}, 1}, {{2, 3}, 1},
                                          {{1, 4}, 1}, {{2, 4}, 1}, {{3, 4}, 5}});
    try {
        check_mesh(m);
        FAIL("expected a mesh error");
    } catch (const MeshError& e) {
        CHECK(e.cell == 1);
    }
}
