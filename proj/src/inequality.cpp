#include "hnorm/inequality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "hnorm/bessel.hpp"
#include "hnorm/cusp_analysis.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"

namespace hnorm {

namespace {

constexpr double kPi = std::numbers::pi;

// Odd coefficients of v(r) / (6 pi), r^3 through r^29.
constexpr std::array<double, 14> kVSeries{
    2.0 / 9.0,
    -2.0 / 45.0,
    4.0 / 525.0,
    -2.0 / 1701.0,
    2764.0 / 16372125.0,
    -4.0 / 173745.0,
    28936.0 / 9577693125.0,
    -87734.0 / 227949096375.0,
    698444.0 / 14584090145625.0,
    -310732.0 / 53153584745625.0,
    1890912728.0 / 2692260959516753625.0,
    -2631724.0 / 31608210757921875.0,
    27142241176.0 / 2781545123990523515625.0,
    -13785346041608.0 / 12173932913266844460365625.0,
};

struct CatalogEntry {
    std::function<double(double, double, double)> f;
    std::function<Eigen::Vector3d(double, double, double)> grad;
};

const std::map<std::string, CatalogEntry>& catalog() {
    static const std::map<std::string, CatalogEntry> entries = [] {
        std::map<std::string, CatalogEntry> m;
        m["constant"] = {[](double, double, double) { return 1.0; },
                         [](double, double, double) { return Eigen::Vector3d::Zero().eval(); }};
        const double l1 = 2.0 * kPi;
        m["cusp_k1_x"] = {
            [l1](double x, double, double z) { return bessel_profile(l1, z) * std::cos(l1 * x); },
            [l1](double x, double, double z) {
                return Eigen::Vector3d(-l1 * bessel_profile(l1, z) * std::sin(l1 * x), 0.0,
                                       bessel_profile_derivative(l1, z) * std::cos(l1 * x));
            }};
        const double l2 = 2.0 * std::sqrt(2.0) * kPi;
        m["cusp_k1_xy"] = {
            [l2](double x, double y, double z) { return bessel_profile(l2, z) * std::cos(2.0 * kPi * (x + y)); },
            [l2](double x, double y, double z) {
                const double s = -2.0 * kPi * bessel_profile(l2, z) * std::sin(2.0 * kPi * (x + y));
                return Eigen::Vector3d(s, s, bessel_profile_derivative(l2, z) * std::cos(2.0 * kPi * (x + y)));
            }};
        m["height_squared"] = {[](double, double, double z) { return z * z; },
                               [](double, double, double z) { return Eigen::Vector3d(0.0, 0.0, 2.0 * z); }};
        m["horizontal_x"] = {[](double x, double, double) { return x; },
                             [](double, double, double) { return Eigen::Vector3d(1.0, 0.0, 0.0); }};
        return m;
    }();
    return entries;
}

}  // namespace

double v_of_r(double r) {
    if (!(r > 0)) throw DomainError("v(r) needs r > 0");
    if (r < kVSeriesThreshold) {
        const double r2 = r * r;
        double s = 0.0;
        for (size_t k = kVSeries.size(); k-- > 0;) s = s * r2 + kVSeries[k];
        return 6.0 * kPi * s * r2 * r;
    }
    const double csch2 = 1.0 / (std::sinh(r) * std::sinh(r));
    const double coth = 1.0 / std::tanh(r);
    return 6.0 * kPi * (r + 2.0 * r * csch2 - coth * (r * r * csch2 + 1.0));
}

std::vector<std::string> harmonic_catalog() {
    std::vector<std::string> ids;
    for (const auto& [k, v] : catalog()) ids.push_back(k);
    return ids;
}

MeanValueResult mean_value_bound_check(const std::string& id, const std::array<double, 3>& c, double r) {
    auto it = catalog().find(id);
    if (it == catalog().end()) throw PreconditionError("unknown test function '" + id + "'");
    if (!(r > 0) || !(c[2] > 0)) throw DomainError("mean-value check needs r > 0 and a centre with z > 0");
    const auto& grad = it->second.grad;
    MeanValueResult R;
    R.function = id;
    R.center = c;
    R.radius = r;
    R.lhs = c[2] * grad(c[0], c[1], c[2]).norm();
    // The hyperbolic ball is the Euclidean ball of radius z sinh r centred at height z cosh r;
    // |df|^2 dV = |grad f|^2 / z dV_euclid there.
    const double zc = c[2] * std::cosh(r), R0 = c[2] * std::sinh(r);
    constexpr int kPhi = 64;
    using GL = boost::math::quadrature::gauss<double, 30>;
    const double energy = GL::integrate(
        [&](double rho) {
            return rho * rho * GL::integrate(
                                   [&](double ct) {
                                       const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                                       double s = 0.0;
                                       for (int k = 0; k < kPhi; ++k) {
                                           const double ph = 2.0 * kPi * k / kPhi;
                                           const double x = c[0] + rho * st * std::cos(ph);
                                           const double y = c[1] + rho * st * std::sin(ph);
                                           const double z = zc + rho * ct;
                                           s += grad(x, y, z).squaredNorm() / z;
                                       }
                                       return s * 2.0 * kPi / kPhi;
                                   },
                                   -1.0, 1.0);
        },
        0.0, R0);
    R.ball_l2 = std::sqrt(energy);
    R.rhs = R.ball_l2 / std::sqrt(v_of_r(r));
    R.pass = R.lhs <= R.rhs * (1.0 + 1e-12) + 1e-300;
    return R;
}

RhsConstants rhs_constants(double sys, double d_max) {
    if (!(sys > 0)) throw PreconditionError("systole must be positive");
    RhsConstants C;
    C.sys = sys;
    C.d_max = d_max;
    const double by_sys = 10.0 * kPi / std::sqrt(sys);
    const double by_diam = 4.86 * kPi * std::sqrt(1.0 + d_max * d_max / 2.0);
    C.main = std::max(by_sys, by_diam);
    C.linf = std::max(5.0 / std::sqrt(sys), 2.43 * std::sqrt(1.0 + d_max * d_max / 2.0));
    C.branch = by_sys >= by_diam ? "systole" : "diameter";
    return C;
}

RhsConstants rhs_constants_closed(double inj) {
    if (!(inj > 0)) throw PreconditionError("injectivity radius must be positive");
    RhsConstants C;
    C.main = 10.0 * kPi / std::sqrt(inj);
    C.linf = 5.0 / std::sqrt(inj);
    C.branch = "injectivity";
    return C;
}

RhsConstants rhs_constants(const TriangulatedManifold& M) {
    if (M.is_closed()) {
        if (!M.injectivity_radius) throw PreconditionError("closed manifold needs an ingested injectivity radius");
        RhsConstants C = rhs_constants_closed(*M.injectivity_radius);
        C.sys = M.systole;
        return C;
    }
    double d = 0.0;
    for (const CuspData& c : cusp_geometry(M)) d = std::max(d, c.diameter);
    return rhs_constants(M.systole, d);
}

SharpnessRecord sharpness_diagnostics(const ClassNormInput& in, double left_slack) {
    SharpnessRecord S;
    S.cv = in.cv;
    S.left_strict = left_slack > in.budget.total();
    if (in.provenance == "upper_bound" || !(in.thurston > 0) || !in.l1_min) {
        S.sandwich = "inconclusive";
        return S;
    }
    S.ratio_pi = *in.l1_min / (kPi * in.thurston);
    S.ratio_2pi = *in.l1_min / (2.0 * kPi * in.thurston);
    S.sandwich = (S.ratio_pi >= 1.0 && S.ratio_2pi <= 1.0) ? "inside" : "outside";
    return S;
}

ClassRecord evaluate_class(const ReportContext& ctx, const ClassNormInput& in) {
    ClassRecord R;
    R.input = in;
    if (std::all_of(in.coords.begin(), in.coords.end(), [](long long v) { return v == 0; })) {
        R.skipped = true;
        R.left_holds = R.right_holds = true;
        R.flags.push_back("zero class");
        R.sharpness.sandwich = "inconclusive";
        return R;
    }
    if (!in.l2 || !in.l1_min) throw PreconditionError("missing norm for class");
    if (!(ctx.vol > 0)) throw PreconditionError("volume must be positive");
    const double l2 = *in.l2, l1 = *in.l1_min, th = in.thurston, sv = std::sqrt(ctx.vol);
    R.left_slack = l2 - kPi * th / sv;
    R.right_slack = ctx.rhs.main * th - l2;
    R.left_holds = R.left_slack >= 0;
    R.right_holds = R.right_slack >= 0;
    R.left_strict = R.left_slack > in.budget.total();
    R.chain_pi_l1 = kPi * th <= l1;
    R.chain_l1_l2 = l1 <= sv * l2;
    R.chain_l2_linf = in.linf && l2 * l2 <= 2.0 * kPi * *in.linf * th;
    R.chain_checked = in.provenance != "upper_bound";
    if (!R.chain_checked) R.flags.push_back("chain skipped: Thurston value is an upper bound");
    if (!ctx.hyperbolic) R.flags.push_back("non-hyperbolic control case");
    if (!R.left_holds) R.flags.push_back("left inequality violated");
    if (!R.right_holds) R.flags.push_back("right inequality violated");
    R.sharpness = sharpness_diagnostics(in, R.left_slack);
    return R;
}

double constant_length_cv(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const std::vector<double>& x) {
    double w = 0, s1 = 0, s2 = 0;
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const auto xe = local_edge_values(mesh, t, x);
        for (const auto& q : tet_quadrature()) {
            const double n = whitney1_at(geo[t], xe, q.bary).norm();
            const double wt = q.weight * geo[t].volume;
            w += wt, s1 += wt * n, s2 += wt * n * n;
        }
    }
    if (!(w > 0) || !(s1 > 0)) return 0.0;
    const double mean = s1 / w;
    return std::sqrt(std::max(0.0, s2 / w - mean * mean)) / mean;
}

DiDsResult functionals_DiDs(double vol, const std::vector<std::vector<double>>& gram,
                            const std::vector<std::vector<double>>& ball,
                            const std::function<double(const std::vector<double>&)>& thurston, int samples) {
    const int r = static_cast<int>(gram.size());
    if (r == 0) throw PreconditionError("no L2 harmonic forms");
    if (!(vol > 0)) throw PreconditionError("volume must be positive");
    Eigen::MatrixXd G(r, r);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(gram[i].size()) != r) throw PreconditionError("Gram matrix must be square");
        for (int j = 0; j < r; ++j) G(i, j) = gram[i][j];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) throw DomainError("Gram matrix is not positive definite");
    const double pref = kPi / std::sqrt(vol);
    DiDsResult D;
    auto to_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };

    if (!ball.empty()) {
        const Eigen::MatrixXd Ginv = G.inverse();
        std::vector<Eigen::VectorXd> V;
        for (const auto& v : ball) {
            if (static_cast<int>(v.size()) != r) throw PreconditionError("ball vertex dimension mismatch");
            V.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), r));
        }
        double best = -1;
        for (const auto& v : V) {
            const double val = std::sqrt(v.dot(Ginv * v));
            if (val > best) best = val, D.argmax = val > 0 ? to_vec(Ginv * v / val) : std::vector<double>{};
        }
        // Vertices of the norm ball {x : <v, x> <= 1}: intersections of r facet hyperplanes.
        double far = -1;
        std::vector<int> pick(r);
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == r) {
                Eigen::MatrixXd A(r, r);
                for (int k = 0; k < r; ++k) A.row(k) = V[pick[k]].transpose();
                Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
                if (lu.rank() < r) return;
                const Eigen::VectorXd p = lu.solve(Eigen::VectorXd::Ones(r));
                for (const auto& v : V)
                    if (v.dot(p) > 1.0 + 1e-9) return;
                const double g = std::sqrt(p.dot(G * p));
                if (g > far) far = g, D.argmin = to_vec(p / g);
                return;
            }
            for (int k = start; k < static_cast<int>(V.size()); ++k) {
                pick[depth] = k;
                rec(k + 1, depth + 1);
            }
        };
        rec(0, 0);
        D.Ds = pref * best;
        D.Di = far > 0 ? pref / far : 0.0;
        D.exact = true;
        return D;
    }

    if (!thurston) throw PreconditionError("Thurston norm unavailable for D functionals");
    const Eigen::MatrixXd Linv_t = llt.matrixU().solve(Eigen::MatrixXd::Identity(r, r));  // x = U^{-1} y
    auto eval = [&](const Eigen::VectorXd& y) { return thurston(to_vec(Linv_t * y.normalized())); };
    std::vector<Eigen::VectorXd> dirs;
    if (r == 1) {
        dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
        dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    } else if (r == 2) {
        for (int k = 0; k < samples; ++k) {
            const double a = 2.0 * kPi * k / samples;
            Eigen::VectorXd y(2);
            y << std::cos(a), std::sin(a);
            dirs.push_back(y);
        }
    } else if (r == 3) {
        const double golden = kPi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < samples; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / samples, rad = std::sqrt(1.0 - z * z);
            Eigen::VectorXd y(3);
            y << rad * std::cos(golden * k), rad * std::sin(golden * k), z;
            dirs.push_back(y);
        }
    } else {
        std::mt19937 gen(12345);
        std::normal_distribution<double> nd;
        for (int k = 0; k < samples; ++k) {
            Eigen::VectorXd y(r);
            for (int i = 0; i < r; ++i) y[i] = nd(gen);
            dirs.push_back(y.normalized());
        }
    }
    D.resolution = r == 1 ? 0.0 : (r == 2 ? 2.0 * kPi / samples : std::sqrt(4.0 * kPi / samples));
    Eigen::VectorXd ymin = dirs[0], ymax = dirs[0];
    double vmin = eval(dirs[0]), vmax = vmin;
    for (const auto& y : dirs) {
        const double v = eval(y);
        if (v < vmin) vmin = v, ymin = y;
        if (v > vmax) vmax = v, ymax = y;
    }
    D.samples = static_cast<int>(dirs.size());
    if (r > 1) {
        // Local refinement: coordinate-wise pattern search with a shrinking step.
        auto refine = [&](Eigen::VectorXd y, double v, int sign) {
            double step = D.resolution;
            while (step > 1e-9) {
                bool moved = false;
                for (int i = 0; i < r; ++i)
                    for (double s : {step, -step}) {
                        Eigen::VectorXd c = y;
                        c[i] += s;
                        c.normalize();
                        const double cv = eval(c);
                        ++D.samples;
                        if (sign * (cv - v) > 0) y = c, v = cv, moved = true;
                    }
                if (!moved) step *= 0.5;
            }
            return std::make_pair(y, v);
        };
        std::tie(ymin, vmin) = refine(ymin, vmin, -1);
        std::tie(ymax, vmax) = refine(ymax, vmax, +1);
    }
    D.Di = pref * vmin;
    D.Ds = pref * vmax;
    D.argmin = to_vec(Linv_t * ymin.normalized());
    D.argmax = to_vec(Linv_t * ymax.normalized());
    return D;
}

CoverScalingRecord cover_scaling_check(const CoverSide& base, const CoverSide& cover, int degree,
                                       const std::vector<std::vector<long long>>& corr,
                                       const std::vector<std::vector<long long>>& classes) {
    const size_t rb = base.gram.size(), rc = cover.gram.size();
    if (corr.empty() || corr.size() != rb) throw PreconditionError("missing class correspondence");
    for (const auto& row : corr)
        if (row.size() != rc) throw PreconditionError("class correspondence has the wrong shape");
    if (degree < 1) throw PreconditionError("cover degree must be positive");
    auto quad = [](const std::vector<std::vector<double>>& G, const std::vector<double>& x) {
        double s = 0;
        for (size_t i = 0; i < x.size(); ++i)
            for (size_t j = 0; j < x.size(); ++j) s += x[i] * G[i][j] * x[j];
        return std::sqrt(s);
    };
    CoverScalingRecord out;
    out.degree = degree;
    for (const auto& cls : classes) {
        if (cls.size() != rb) throw PreconditionError("class dimension mismatch");
        CoverClassRatio C;
        C.base_coords = cls;
        C.cover_coords.assign(rc, 0);
        for (size_t i = 0; i < rb; ++i)
            for (size_t j = 0; j < rc; ++j) C.cover_coords[j] += cls[i] * corr[i][j];
        std::vector<double> x(cls.begin(), cls.end()), y(C.cover_coords.begin(), C.cover_coords.end());
        const double l2b = quad(base.gram, x), l2c = quad(cover.gram, y);
        if (!(l2b > 0)) throw PreconditionError("zero class in cover scaling check");
        C.l2_ratio = l2c / l2b;
        if (base.thurston && cover.thurston) {
            const double tb = base.thurston(x), tc = cover.thurston(y);
            if (base.thurston_ingested && cover.thurston_ingested && tb > 0) C.thurston_ratio = tc / tb;
            if (tb > 0) {
                const double qb = kPi * tb / (std::sqrt(base.vol) * l2b);
                const double qc = kPi * tc / (std::sqrt(cover.vol) * l2c);
                C.d_ratio = qc / qb;
            }
        }
        out.worst_l2_deviation = std::max(out.worst_l2_deviation, std::abs(C.l2_ratio / std::sqrt(degree) - 1.0));
        out.worst_d_deviation = std::max(out.worst_d_deviation, std::abs(C.d_ratio - 1.0));
        out.classes.push_back(C);
    }
    return out;
}

}  // namespace hnorm
