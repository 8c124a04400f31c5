#include <cmath>

#include "doctest.h"
#include "fixture_path.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"
#include "hnorm/manifold.hpp"

using namespace hnorm;

TEST_CASE("single self-glued regular tetrahedron parses with one cusp and tiny edge residual") {
    const TriangulatedManifold M = parse_manifold(fixture("gieseking.mfd"));
    CHECK(M.num_tets() == 1);
    CHECK(M.cusps.size() == 1);
    const ValidationResult V = validate_manifold(M);
    CHECK(V.edge_residual < 1e-9);
    CHECK_FALSE(analyze_combinatorics(M).orientable);
}

TEST_CASE("face glued twice is rejected naming both gluings") {
    try {
        parse_manifold(fixture("bad_double_glue.mfd"));
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0:0") != std::string::npos);
        CHECK(msg.find("lines 5 and 6") != std::string::npos);
    }
}

TEST_CASE("missing systole is a parse error") {
    try {
        parse_manifold(fixture("bad_no_systole.mfd"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("systole required") != std::string::npos);
    }
}

TEST_CASE("malformed rows report their line number") {
    const std::string text = "name x\nkind ideal\ntetrahedra 1\ngluings\n0 0 0 01x3\n";
    try {
        parse_manifold_text(text);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 5);
    }
    CHECK_THROWS_AS(parse_manifold_text("name x\nkind hexagonal\nsystole 1\n"), ParseError);
    CHECK_THROWS_AS(parse_manifold_text("name x\nkind flat_torus\nbox 1 1 1\nsystole 1.5q\n"), ParseError);
}

TEST_CASE("shapes in the lower half-plane are rejected") {
    std::string text =
        "name bad\nkind ideal\ntetrahedra 2\ngluings\n0 0 1 0213\n0 1 1 2103\n0 2 1 1230\n0 3 1 1302\n"
        "1 0 0 0213\n1 1 0 2103\n1 2 0 2031\n1 3 0 3012\nshapes\n0.5 -0.8660254037844386\n0.5 0.8660254037844386\n"
        "cusps\n0 1 3.4641016151377544 0\nsystole 1\n";
    CHECK_THROWS_AS(parse_manifold_text(text), ValidationError);
}

TEST_CASE("serialize then parse is the identity on the data model") {
    for (const char* name : {"s789.mfd", "figure8.mfd", "flat_torus.mfd", "s789_cover.mfd", "gieseking.mfd"}) {
        CAPTURE(name);
        const TriangulatedManifold M = parse_manifold(fixture(name));
        const std::string once = serialize_manifold(M);
        const TriangulatedManifold N = parse_manifold_text(once);
        CHECK(serialize_manifold(N) == once);
        CHECK(N.name == M.name);
        CHECK(N.kind == M.kind);
        CHECK(N.num_tets() == M.num_tets());
        CHECK(N.systole == M.systole);
        REQUIRE(N.shapes.size() == M.shapes.size());
        for (size_t t = 0; t < M.shapes.size(); ++t) CHECK(N.shapes[t] == M.shapes[t]);
        for (int t = 0; t < M.num_tets(); ++t)
            for (int f = 0; f < 4; ++f) {
                CHECK(N.gluings[t][f].tet == M.gluings[t][f].tet);
                CHECK(N.gluings[t][f].perm == M.gluings[t][f].perm);
            }
        CHECK(N.thurston_ball == M.thurston_ball);
        CHECK(N.class_norms.size() == M.class_norms.size());
        CHECK(N.cover_of.has_value() == M.cover_of.has_value());
    }
}

TEST_CASE("optional Thurston and cover data are preserved") {
    const TriangulatedManifold C = parse_manifold(fixture("s789_cover.mfd"));
    REQUIRE(C.cover_of);
    CHECK(C.cover_of->base == "s789");
    CHECK(C.cover_of->degree == 2);
    REQUIRE(C.cover_of->matrix.size() == 1);
    CHECK(C.cover_of->matrix[0] == std::vector<long long>{-2});
    REQUIRE(C.thurston_ball.size() == 2);
    CHECK(C.thurston_ball[0][0] == 2.0);
    const TriangulatedManifold F = parse_manifold(fixture("flat_torus.mfd"));
    REQUIRE(F.class_norms.size() == 1);
    CHECK(F.class_norms[0].coords == std::vector<long long>{0, 0, 1});
    CHECK(F.class_norms[0].value == 0.0);
    REQUIRE(F.injectivity_radius);
    CHECK(*F.injectivity_radius == 0.5);
}

TEST_CASE("model cusp files derive the lattice geometry") {
    const ModelCusp mc = parse_model_cusp(fixture("square_cusp.cusp"));
    CHECK(mc.cusp.area == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mc.cusp.waist == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mc.cusp.diameter == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    CHECK(mc.base_height == 1.0);
    CHECK(mc.top_height == 3.0);
    CHECK(mc.grid == 16);

    const ModelCusp r = parse_model_cusp_text("xi 2 0\neta 0 2\nbase_height 1\n");
    CHECK(r.cusp.area == doctest::Approx(4.0));
    CHECK(r.cusp.waist == doctest::Approx(2.0));

    CHECK_THROWS_AS(parse_model_cusp(fixture("bad_collinear.cusp")), ValidationError);
}

TEST_CASE("waist below one is a warning, not an error") {
    TriangulatedManifold M = parse_manifold(fixture("figure8.mfd"));
    M.cusps[0] = cusp_from_translations(M.cusps[0].xi * 0.5, M.cusps[0].eta * 0.5);
    ValidationResult V;
    CHECK_NOTHROW(V = validate_manifold(M));
    bool warned = false;
    for (const auto& w : V.warnings) warned |= w.find("waist") != std::string::npos;
    CHECK(warned);
}
