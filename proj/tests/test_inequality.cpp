#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hnorm/errors.hpp"
#include "hnorm/inequality.hpp"

using namespace hnorm;

namespace {

const double kPi = std::numbers::pi;

// Closed form evaluated with 50 decimal digits, so the cancellation near 0 is harmless.
double v_oracle(double r) {
    using F = boost::multiprecision::cpp_bin_float_50;
    const F x = r;
    const F csch2 = 1 / (sinh(x) * sinh(x));
    const F coth = cosh(x) / sinh(x);
    return static_cast<double>(6 * boost::math::constants::pi<F>() * (x + 2 * x * csch2 - coth * (x * x * csch2 + 1)));
}

ClassNormInput basic_input(double th, double l2, double l1, double linf) {
    ClassNormInput in;
    in.coords = {1};
    in.thurston = th;
    in.provenance = "ingested";
    in.l2 = l2;
    in.l1_min = l1;
    in.linf = linf;
    return in;
}

}  // namespace

TEST_CASE("v(r) agrees with a high-precision closed form on both sides of the series switch") {
    for (double r : {1e-3, 0.05, 0.2, 0.49, 0.5, 0.51, 1.0, 2.5, 5.0})
        CHECK(v_of_r(r) == doctest::Approx(v_oracle(r)).epsilon(1e-12));
    CHECK(v_of_r(std::log(std::sqrt(2.0))) == doctest::Approx(0.1702671197).epsilon(1e-9));
    double prev = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double v = v_of_r(0.025 * k);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(v_of_r(0.0), DomainError);
    CHECK_THROWS_AS(v_of_r(-1.0), DomainError);
}

TEST_CASE("right-hand constants pick the larger branch") {
    const RhsConstants a = rhs_constants(1.0, 1.0);
    CHECK(a.branch == "systole");
    CHECK(a.main == doctest::Approx(10 * kPi));
    CHECK(a.linf == doctest::Approx(5.0));

    const RhsConstants b = rhs_constants(9.0, 3.0);
    CHECK(b.branch == "diameter");
    CHECK(b.main == doctest::Approx(4.86 * kPi * std::sqrt(5.5)));
    CHECK(b.linf == doctest::Approx(2.43 * std::sqrt(5.5)));

    double prev = 0.0;
    for (double d : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        CHECK(rhs_constants(1.0, d).main >= prev);
        prev = rhs_constants(1.0, d).main;
    }
    CHECK(rhs_constants(0.5, 1.0).main > rhs_constants(2.0, 1.0).main);

    const RhsConstants c = rhs_constants_closed(0.25);
    CHECK(c.branch == "injectivity");
    CHECK(c.main == doctest::Approx(20 * kPi));
    CHECK_THROWS_AS(rhs_constants(0.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(rhs_constants_closed(-1.0), PreconditionError);
}

TEST_CASE("class evaluation: slacks, flags and the chain") {
    ReportContext ctx{"m", 4.0, rhs_constants(1.0, 1.0), true};
    const ClassNormInput in = basic_input(1.0, 2.0, 4.0, 1.0);
    const ClassRecord r = evaluate_class(ctx, in);
    CHECK(r.left_slack == doctest::Approx(2.0 - kPi / 2));
    CHECK(r.right_slack == doctest::Approx(10 * kPi - 2.0));
    CHECK(r.left_holds == (r.left_slack >= 0));
    CHECK(r.right_holds == (r.right_slack >= 0));
    CHECK(r.chain_checked);
    CHECK(r.chain_pi_l1);
    CHECK(r.chain_l1_l2);
    CHECK(r.chain_l2_linf);
    CHECK(r.sharpness.sandwich == "inside");
    // When the chain holds the left inequality follows.
    if (r.chain_pi_l1 && r.chain_l1_l2) CHECK(r.left_holds);

    ClassNormInput weak = in;
    weak.budget.mesh = 1.0;
    CHECK_FALSE(evaluate_class(ctx, weak).left_strict);
    CHECK(evaluate_class(ctx, in).left_strict);

    ClassNormInput up = in;
    up.provenance = "upper_bound";
    const ClassRecord ru = evaluate_class(ctx, up);
    CHECK_FALSE(ru.chain_checked);
    CHECK(ru.sharpness.sandwich == "inconclusive");

    ClassNormInput zero = in;
    zero.coords = {0};
    zero.l2.reset();
    const ClassRecord rz = evaluate_class(ctx, zero);
    CHECK(rz.skipped);
    CHECK(rz.flags.front() == "zero class");

    ClassNormInput missing = in;
    missing.l1_min.reset();
    CHECK_THROWS_WITH_AS(evaluate_class(ctx, missing), "missing norm for class", PreconditionError);
}

TEST_CASE("flat control case reports a right-hand violation") {
    // dz on the unit cube torus: every norm equals 1 and the Thurston norm vanishes.
    ReportContext ctx{"flat", 1.0, rhs_constants(1.0, std::sqrt(3.0) / 2), false};
    ClassNormInput in = basic_input(0.0, 1.0, 1.0, 1.0);
    const ClassRecord r = evaluate_class(ctx, in);
    CHECK(r.left_slack == doctest::Approx(1.0));
    CHECK(r.left_holds);
    CHECK_FALSE(r.right_holds);
    auto has = [&](const std::string& f) { return std::find(r.flags.begin(), r.flags.end(), f) != r.flags.end(); };
    CHECK(has("non-hyperbolic control case"));
    CHECK(has("right inequality violated"));
    CHECK(r.sharpness.sandwich == "inconclusive");
}

TEST_CASE("D functionals") {
    SUBCASE("rank one gives equal values") {
        const DiDsResult d = functionals_DiDs(4.0, {{9.0}}, {{2.0}, {-2.0}});
        CHECK(d.exact);
        CHECK(d.Di == doctest::Approx(d.Ds));
        CHECK(d.Ds == doctest::Approx(kPi / 2 * 2.0 / 3.0));
    }
    SUBCASE("square ball against a round Gram matrix") {
        const std::vector<std::vector<double>> G{{1, 0}, {0, 1}}, ball{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        const DiDsResult e = functionals_DiDs(1.0, G, ball);
        CHECK(e.Ds == doctest::Approx(kPi));
        CHECK(e.Di == doctest::Approx(kPi / std::sqrt(2.0)));
        auto th = [](const std::vector<double>& x) { return std::max(std::abs(x[0]), std::abs(x[1])); };
        const DiDsResult s = functionals_DiDs(1.0, G, {}, th, 4000);
        CHECK_FALSE(s.exact);
        CHECK(s.Ds == doctest::Approx(e.Ds).epsilon(1e-4));
        CHECK(s.Di == doctest::Approx(e.Di).epsilon(1e-4));
    }
    SUBCASE("independent of the integral basis") {
        const std::vector<std::vector<double>> G{{2.0, 0.3}, {0.3, 1.0}};
        const std::vector<std::vector<double>> ball{{1, 1}, {-1, -1}, {1, -2}, {-1, 2}};
        // New basis e1' = e1, e2' = e1 + 7 e2: Gram A^T G A, dual vertices A^T v.
        const double a[2][2] = {{1, 1}, {0, 7}};
        std::vector<std::vector<double>> G2(2, std::vector<double>(2, 0.0)), b2;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) G2[i][j] += a[k][i] * G[k][l] * a[l][j];
        for (const auto& v : ball) b2.push_back({a[0][0] * v[0] + a[1][0] * v[1], a[0][1] * v[0] + a[1][1] * v[1]});
        const DiDsResult d1 = functionals_DiDs(3.0, G, ball), d2 = functionals_DiDs(3.0, G2, b2);
        CHECK(d1.Di == doctest::Approx(d2.Di));
        CHECK(d1.Ds == doctest::Approx(d2.Ds));
        CHECK(d1.Di <= d1.Ds);
    }
    CHECK_THROWS_WITH_AS(functionals_DiDs(1.0, {}, {}), "no L2 harmonic forms", PreconditionError);
    CHECK_THROWS_AS(functionals_DiDs(1.0, {{1.0}}, {}), PreconditionError);
}

TEST_CASE("mean-value bound on the harmonic catalog") {
    const auto ids = harmonic_catalog();
    CHECK(ids.size() >= 4);
    for (const auto& id : ids)
        for (double r : {0.1, 0.3, 0.6}) {
            const MeanValueResult m = mean_value_bound_check(id, {0.0, 0.0, 1.0}, r);
            CHECK(m.pass);
            CHECK(m.rhs == doctest::Approx(m.ball_l2 / std::sqrt(v_of_r(r))));
        }
    const MeanValueResult h = mean_value_bound_check("horizontal_x", {0.3, -0.2, 2.0}, 0.3);
    CHECK(h.lhs == doctest::Approx(2.0));  // |dx| = z in the hyperbolic metric
    CHECK_THROWS_AS(mean_value_bound_check("nope", {0, 0, 1}, 0.3), PreconditionError);
    CHECK_THROWS_AS(mean_value_bound_check("constant", {0, 0, -1}, 0.3), DomainError);
}

TEST_CASE("cover scaling bookkeeping") {
    CoverSide side{2.0, {{4.0}}, [](const std::vector<double>& x) { return std::abs(x[0]); }, true};
    const CoverScalingRecord same = cover_scaling_check(side, side, 1, {{1}}, {{1}, {3}});
    for (const auto& c : same.classes) {
        CHECK(c.l2_ratio == doctest::Approx(1.0));
        CHECK(c.d_ratio == doctest::Approx(1.0));
        CHECK(c.thurston_ratio == doctest::Approx(1.0));
    }
    // Degree-2 cover in which the pullback doubles both the Thurston and the squared L2 norm.
    CoverSide cover{4.0, {{2.0}}, [](const std::vector<double>& x) { return std::abs(x[0]); }, true};
    const CoverScalingRecord d2 = cover_scaling_check(side, cover, 2, {{2}}, {{1}});
    CHECK(d2.classes[0].cover_coords == std::vector<long long>{2});
    CHECK(d2.classes[0].l2_ratio == doctest::Approx(std::sqrt(2.0)));
    CHECK(d2.classes[0].thurston_ratio == doctest::Approx(2.0));
    CHECK(d2.classes[0].d_ratio == doctest::Approx(1.0));
    CHECK(d2.worst_l2_deviation < 1e-12);
    CHECK_THROWS_WITH_AS(cover_scaling_check(side, cover, 2, {}, {{1}}), "missing class correspondence", PreconditionError);
}
