#include "hnorm/cusp_analysis.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "hnorm/bessel.hpp"
#include "hnorm/dec.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"
#include "hnorm/hodge.hpp"

namespace hnorm {

namespace {

constexpr double kPi = std::numbers::pi;

double lattice_det(const CuspData& c) { return c.xi.real() * c.eta.imag() - c.xi.imag() * c.eta.real(); }

double semi_infinite(const std::function<double(double)>& f, double a) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double t) { return f(a + t); }, 0.0, std::numeric_limits<double>::infinity());
}

double finite(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

// Cross-section energy density of a unit-amplitude term, integrated against dz / z.
double term_density(double lambda, double z) {
    const double g = bessel_profile(lambda, z), dg = bessel_profile_derivative(lambda, z);
    return (lambda * lambda * g * g + dg * dg) / z;
}

}  // namespace

cplx dual_lattice_vector(const CuspData& c, int m, int n) {
    const double det = lattice_det(c);
    if (std::abs(det) < 1e-300) throw ValidationError("cusp translations are collinear");
    return {(m * c.eta.imag() - n * c.xi.imag()) / det, (c.xi.real() * n - c.eta.real() * m) / det};
}

std::vector<LatticeMode> torus_spectrum(const CuspData& cusp, int count) {
    if (count < 1) throw PreconditionError("torus spectrum needs a positive count");
    const cplx a = dual_lattice_vector(cusp, 1, 0), b = dual_lattice_vector(cusp, 0, 1);
    Eigen::Matrix2d B;
    B << a.real(), b.real(), a.imag(), b.imag();
    const double sigma = Eigen::JacobiSVD<Eigen::Matrix2d>(B).singularValues().minCoeff();
    for (int K = 1;; ++K) {
        std::vector<LatticeMode> modes;
        for (int m = -K; m <= K; ++m)
            for (int n = -K; n <= K; ++n) {
                if (m == 0 && n == 0) continue;
                LatticeMode md{m, n, dual_lattice_vector(cusp, m, n), 0.0};
                md.lambda = 2.0 * kPi * std::abs(md.w);
                modes.push_back(md);
            }
        std::sort(modes.begin(), modes.end(), [](const LatticeMode& p, const LatticeMode& q) {
            if (std::abs(p.lambda - q.lambda) > 1e-12 * std::max(p.lambda, q.lambda)) return p.lambda < q.lambda;
            return std::make_pair(p.m, p.n) < std::make_pair(q.m, q.n);
        });
        if (static_cast<int>(modes.size()) >= count &&
            modes[count - 1].lambda <= 2.0 * kPi * sigma * (K + 1) * (1.0 - 1e-12)) {
            modes.resize(count);
            return modes;
        }
    }
}

double bessel_profile(double lambda, double z) {
    const double x = lambda * z;
    if (x > 700.0) return 0.0;
    return z * bessel_k1(x);
}

double bessel_profile_derivative(double lambda, double z) {
    const double x = lambda * z;
    if (x > 700.0) return 0.0;
    return -lambda * z * bessel_k0(x);
}

double ExpansionTerm::amplitude() const { return std::hypot(a, b); }

std::vector<double> sample_vertices(const MetricMesh& mesh, const std::function<double(double, double, double)>& f) {
    std::vector<double> out(mesh.num_vertices);
    for (int v = 0; v < mesh.num_vertices; ++v) {
        const Vec4& X = mesh.vertex_coords[v];
        out[v] = f(X[0], X[1], X[2]);
    }
    return out;
}

std::vector<double> coboundary(const MetricMesh& mesh, const std::vector<double>& u) {
    if (static_cast<int>(u.size()) != mesh.num_vertices) throw PreconditionError("vertex vector size mismatch");
    std::vector<double> out(mesh.num_edges());
    for (int k = 0; k < mesh.num_edges(); ++k) out[k] = u[mesh.edges[k].v[1]] - u[mesh.edges[k].v[0]];
    return out;
}

std::vector<double> model_cusp_harmonic(const MetricMesh& mesh, const ModelCuspMeshInfo& info,
                                        const std::function<double(double, double)>& bottom, double tolerance) {
    if (mesh.kind != "model_cusp" || info.layer_heights.size() < 3)
        throw PreconditionError("model cusp harmonic solve needs a model-cusp mesh with interior layers");
    const DecOperators ops = dec_operators(mesh);
    const SpMat S = SpMat(ops.d0.transpose() * ops.M1 * ops.d0);
    const int nv = mesh.num_vertices;
    std::vector<double> u(nv, 0.0);
    std::vector<int> unknown(nv, -1);
    int nu = 0;
    // Lattice coordinates from the layer index tables.
    const int g = info.grid;
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b) {
            const int v = info.layer_vertices.front()[static_cast<size_t>(a) * g + b];
            u[v] = bottom(static_cast<double>(a) / g, static_cast<double>(b) / g);
        }
    for (int v = 0; v < nv; ++v)
        if (mesh.vertex_boundary[v] < 0) unknown[v] = nu++;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
    for (int k = 0; k < S.outerSize(); ++k)
        for (SpMat::InnerIterator it(S, k); it; ++it) {
            const int r = unknown[it.row()];
            if (r < 0) continue;
            const int c = unknown[it.col()];
            if (c >= 0)
                trip.emplace_back(r, c, it.value());
            else
                rhs[r] -= it.value() * u[it.col()];
        }
    SpMat A(nu, nu);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    cg.setTolerance(tolerance);
    cg.setMaxIterations(10 * std::max(nu, 1));
    cg.compute(A);
    const Eigen::VectorXd x = cg.solve(rhs);
    if (cg.info() != Eigen::Success && cg.error() > 10 * tolerance)
        throw SolverError("model cusp solve did not converge", cg.error());
    for (int v = 0; v < nv; ++v)
        if (unknown[v] >= 0) u[v] = x[unknown[v]];
    return u;
}

CuspExpansion cusp_expand(const MetricMesh& mesh, const ModelCuspMeshInfo& info, const CuspData& cusp,
                          const std::vector<double>& cochain, const std::vector<double>& heights,
                          const ExpandOptions& opt) {
    if (mesh.kind != "model_cusp") throw PreconditionError("cusp expansion requires a model-cusp mesh");
    if (static_cast<int>(cochain.size()) != mesh.num_edges()) throw PreconditionError("cochain size mismatch");
    const auto& zs = info.layer_heights;
    const int n = info.grid;
    CuspExpansion E;
    E.base_height = zs.front();
    E.area = std::abs(lattice_det(cusp));

    std::vector<int> layers;
    if (heights.empty()) {
        for (size_t l = 0; l < zs.size(); ++l)
            if (zs[l] >= zs.front() + opt.window - 1e-12 && zs[l] <= zs.back() - opt.window + 1e-12)
                layers.push_back(static_cast<int>(l));
    } else {
        for (double h : heights) {
            auto it = std::find_if(zs.begin(), zs.end(), [&](double z) { return std::abs(z - h) <= 1e-9 * h; });
            if (it == zs.end()) throw PreconditionError("insufficient cross-sections: no layer at requested height");
            layers.push_back(static_cast<int>(it - zs.begin()));
        }
    }
    if (layers.size() < 3) throw PreconditionError("insufficient cross-sections");
    for (int l : layers) E.fit_heights.push_back(zs[l]);

    std::unordered_map<long long, std::pair<int, int>> edge_of;
    for (int k = 0; k < mesh.num_edges(); ++k) {
        const auto& e = mesh.edges[k];
        edge_of[static_cast<long long>(e.v[0]) * mesh.num_vertices + e.v[1]] = {k, 1};
        edge_of[static_cast<long long>(e.v[1]) * mesh.num_vertices + e.v[0]] = {k, -1};
    }
    auto value = [&](int a, int b) {
        auto it = edge_of.find(static_cast<long long>(a) * mesh.num_vertices + b);
        if (it == edge_of.end()) throw MeshError("model cusp layer is missing a grid edge");
        return it->second.second * cochain[it->second.first];
    };

    // Traces with the linear (period) part removed; layer constants are irrelevant.
    const size_t nn = static_cast<size_t>(n) * n;
    std::vector<std::vector<double>> trace(layers.size(), std::vector<double>(nn));
    double scale = 0.0;
    for (size_t li = 0; li < layers.size(); ++li) {
        const auto& V = info.layer_vertices[layers[li]];
        auto vid = [&](int a, int b) { return V[static_cast<size_t>((a % n + n) % n) * n + (b % n + n) % n]; };
        std::vector<double> row(n + 1, 0.0);
        for (int a = 0; a < n; ++a) row[a + 1] = row[a] + value(vid(a, 0), vid(a + 1, 0));
        const double px = row[n];
        double py = 0.0;
        for (int a = 0; a < n; ++a) {
            double f = row[a];
            for (int b = 0; b < n; ++b) {
                trace[li][static_cast<size_t>(a) * n + b] = f;
                f += value(vid(a, b), vid(a, b + 1));
            }
            if (a == 0) py = f - row[0];
        }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double& t = trace[li][static_cast<size_t>(a) * n + b];
                t -= px * a / n + py * b / n;
            }
        double mean = 0.0;
        for (double t : trace[li]) mean += t / nn;
        for (double& t : trace[li]) {
            t -= mean;
            scale = std::max(scale, std::abs(t));
        }
        E.flat_periods[0] += px / layers.size();
        E.flat_periods[1] += py / layers.size();
    }
    if (scale == 0.0) return E;

    std::vector<std::vector<double>> coefA, coefB;  // per kept term, per layer
    for (const LatticeMode& md : torus_spectrum(cusp, opt.max_modes)) {
        if (!(md.m > 0 || (md.m == 0 && md.n > 0))) continue;
        if (2 * std::abs(md.m) >= n || 2 * std::abs(md.n) >= n) continue;
        std::vector<double> A(layers.size()), B(layers.size());
        for (size_t li = 0; li < layers.size(); ++li) {
            double sa = 0, sb = 0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    const double ph = 2.0 * kPi * (md.m * a + md.n * b) / n;
                    const double t = trace[li][static_cast<size_t>(a) * n + b];
                    sa += t * std::cos(ph);
                    sb += t * std::sin(ph);
                }
            A[li] = 2.0 * sa / nn;
            B[li] = 2.0 * sb / nn;
        }
        double gg = 0, ga = 0, gb = 0;
        for (size_t li = 0; li < layers.size(); ++li) {
            const double g = bessel_profile(md.lambda, zs[layers[li]]);
            gg += g * g, ga += g * A[li], gb += g * B[li];
        }
        if (gg <= 0) continue;
        ExpansionTerm T{md, ga / gg, gb / gg};
        if (T.amplitude() * bessel_profile(md.lambda, zs[layers.front()]) <= opt.drop_tolerance * scale) continue;
        E.terms.push_back(T);
        coefA.push_back(A);
        coefB.push_back(B);
    }
    if (E.terms.empty()) return E;
    E.lambda1_defined = true;
    E.lambda1 = E.terms.front().mode.lambda;

    double num = 0, den = 0;
    for (size_t li = 0; li < layers.size(); ++li)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double model = 0;
                for (const auto& T : E.terms) {
                    const double ph = 2.0 * kPi * (T.mode.m * a + T.mode.n * b) / n;
                    model += bessel_profile(T.mode.lambda, zs[layers[li]]) * (T.a * std::cos(ph) + T.b * std::sin(ph));
                }
                const double t = trace[li][static_cast<size_t>(a) * n + b];
                num += (t - model) * (t - model);
                den += t * t;
            }
    E.fit_residual = std::sqrt(num / den);

    size_t dom = 0;
    double best = -1;
    for (size_t k = 0; k < E.terms.size(); ++k) {
        const double v = E.terms[k].amplitude() * bessel_profile(E.terms[k].mode.lambda, zs[layers.front()]);
        if (v > best) best = v, dom = k;
    }
    const ExpansionTerm& D = E.terms[dom];
    std::vector<double> M(layers.size());
    for (size_t li = 0; li < layers.size(); ++li)
        M[li] = (coefA[dom][li] * D.a + coefB[dom][li] * D.b) / D.amplitude();
    auto misfit = [&](double lam) {
        std::vector<double> r(layers.size());
        double mean = 0;
        for (size_t li = 0; li < layers.size(); ++li) {
            r[li] = M[li] / bessel_profile(lam, zs[layers[li]]);
            mean += r[li] / layers.size();
        }
        double s = 0;
        for (double x : r) s += (x / mean - 1) * (x / mean - 1);
        return s;
    };
    E.fitted_rate = boost::math::tools::brent_find_minima(misfit, 0.2 * D.mode.lambda, 5.0 * D.mode.lambda, 40).first;
    return E;
}

TailNorms tail_norms(const CuspExpansion& exp, double T) {
    if (T < exp.base_height * (1 - 1e-12)) throw PreconditionError("tail height below the cusp base");
    TailNorms out;
    double l2sq = 0;
    for (const auto& term : exp.terms) {
        const double lam = term.mode.lambda, amp = term.amplitude();
        l2sq += amp * amp * exp.area / 2.0 * semi_infinite([&](double z) { return term_density(lam, z); }, T);
        // Pointwise sup over phases is z max(lambda |g|, |g'|); scan heights until the profile is negligible.
        double sup = 0;
        const double span = 60.0 / lam;
        for (int k = 0; k <= 4000; ++k) {
            const double z = T + span * k / 4000.0;
            sup = std::max(sup, z * std::max(lam * bessel_profile(lam, z), std::abs(bessel_profile_derivative(lam, z))));
        }
        out.linf += amp * sup;
    }
    out.l2 = std::sqrt(l2sq);
    return out;
}

double retraction_cutoff(double base_height, int i, double z) {
    const double u = i * base_height / z;
    if (u <= 0.5) return 1.0;
    if (u >= 1.0) return 0.0;
    const double t = 2.0 * u - 1.0;
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

RetractionResult retraction_compactify(const CuspExpansion& exp, int i) {
    if (i < 1) throw PreconditionError("support index must be positive");
    RetractionResult R;
    R.support_index = i;
    R.support_height = i * exp.base_height;
    R.cutoff_start = 2.0 * i * exp.base_height;
    const double c = i * exp.base_height;
    auto dcut = [&](double z) {
        const double u = c / z;
        if (u <= 0.5 || u >= 1.0) return 0.0;
        const double t = 2.0 * u - 1.0;
        return -6.0 * t * (1.0 - t) * 2.0 * (-c / (z * z));
    };
    double err2 = 0;
    for (const auto& term : exp.terms) {
        const double lam = term.mode.lambda;
        auto density = [&](double z) {
            const double F = retraction_cutoff(exp.base_height, i, z);
            const double g = bessel_profile(lam, z), dg = bessel_profile_derivative(lam, z);
            const double vert = F * dg + g * dcut(z);
            return (F * F * lam * lam * g * g + vert * vert) / z;
        };
        const double part = finite(density, R.support_height, R.cutoff_start) +
                            semi_infinite([&](double z) { return term_density(lam, z); }, R.cutoff_start);
        err2 += term.amplitude() * term.amplitude() * exp.area / 2.0 * part;
    }
    R.l2_error = std::sqrt(err2);
    return R;
}

std::vector<double> retraction_cochain(const MetricMesh& mesh, const std::vector<double>& potential,
                                       double base_height, int i) {
    if (static_cast<int>(potential.size()) != mesh.num_vertices) throw PreconditionError("potential size mismatch");
    std::vector<double> rest(mesh.num_vertices);
    for (int v = 0; v < mesh.num_vertices; ++v)
        rest[v] = (1.0 - retraction_cutoff(base_height, i, mesh.vertex_coords[v][2])) * potential[v];
    return coboundary(mesh, rest);
}

PowerLawFit fit_power_law(const std::vector<int>& indices, const std::vector<double>& errors) {
    if (indices.size() != errors.size() || indices.size() < 2) throw PreconditionError("power-law fit needs two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(indices.size());
    for (size_t j = 0; j < indices.size(); ++j) {
        if (!(errors[j] > 0) || indices[j] < 1) throw DomainError("power-law fit needs positive data");
        const double x = -std::log(static_cast<double>(indices[j])), y = std::log(errors[j]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    PowerLawFit P;
    P.exponent = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    P.log_constant = (sy - P.exponent * sx) / k;
    return P;
}

TorusModelValue torus_model_norm(double c, double area) {
    if (!(c > 1.0)) throw DomainError("torus model needs c > 1");
    const double w = kTorusBumpHalfWidth;
    auto bump = [&](double z) { return 0.5 * (1.0 + std::cos(kPi * (z - c) / w)); };
    const double mass = finite([&](double z) { return bump(z) / z; }, c - w, c + w);
    const double k = 1.0 / mass;
    TorusModelValue V;
    V.c = c;
    V.norm_squared = area * k * k * finite([&](double z) { return bump(z) * bump(z) / (z * z * z); }, c - w, c + w);
    V.law = std::log((c + 1.0) / (c - 1.0));
    V.ratio = V.norm_squared / V.law;
    return V;
}

BlowupModel blowup_model(const std::vector<double>& heights, int grid, double ratio) {
    BlowupModel B;
    const double z0 = std::sqrt(2.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double Z : heights) {
        if (!(Z > z0)) throw DomainError("blow-up heights must exceed sqrt(2)");
        ModelCusp mc;
        mc.cusp = cusp_from_translations({1.0, 0.0}, {0.0, 1.0});
        mc.base_height = z0;
        mc.top_height = Z;
        mc.grid = grid;
        mc.ratio = ratio;
        const MetricMesh mesh = build_model_cusp_mesh(mc);
        std::vector<double> dx(mesh.num_edges());
        for (int k = 0; k < mesh.num_edges(); ++k) dx[k] = mesh.edge_delta[k][0];
        const double l2 = form_norms(mesh, mesh_geometry(mesh), dx).l2;
        B.heights.push_back(Z);
        B.norm_squared.push_back(l2 * l2);
        const double x = std::log(Z);
        sx += x, sy += l2 * l2, sxx += x * x, sxy += x * l2 * l2;
    }
    const double k = static_cast<double>(heights.size());
    if (k >= 2) {
        B.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        B.intercept = (sy - B.slope * sx) / k;
    }
    return B;
}

double hyperbolic_laplacian_fd(const std::function<double(double, double, double)>& f, double x, double y,
                               double z, double h) {
    const double s = h * z;
    const double f0 = f(x, y, z);
    const double fxx = (f(x + s, y, z) - 2 * f0 + f(x - s, y, z)) / (s * s);
    const double fyy = (f(x, y + s, z) - 2 * f0 + f(x, y - s, z)) / (s * s);
    const double fzz = (f(x, y, z + s) - 2 * f0 + f(x, y, z - s)) / (s * s);
    const double fz = (f(x, y, z + s) - f(x, y, z - s)) / (2 * s);
    return z * z * (fxx + fyy + fzz) - z * fz;
}

double basis_term_residual(double lambda, double h, double base) {
    auto f = [&](double x, double, double z) { return bessel_profile(lambda, z) * std::cos(lambda * x); };
    double worst = 0, fmax = 0;
    for (int a = 0; a < 12; ++a)
        for (int b = 0; b <= 12; ++b) {
            const double x = (a + 0.3) / 12.0 * 2.0 * kPi / lambda, z = base + 2.0 * b / 12.0;
            worst = std::max(worst, std::abs(hyperbolic_laplacian_fd(f, x, 0.0, z, h)));
            fmax = std::max(fmax, std::abs(f(x, 0.0, z)));
        }
    return worst / fmax;
}

SubharmonicReport subharmonicity_check(double lambda, double c, double base, double tolerance) {
    auto hfun = [&](double x, double, double z) {
        const double g = bessel_profile(lambda, z), dg = bessel_profile_derivative(lambda, z);
        const double f = g * std::cos(lambda * x);
        const double fx = -lambda * g * std::sin(lambda * x), fz = dg * std::cos(lambda * x);
        return 0.5 * z * z * (fx * fx + fz * fz) + (f + c) * (f + c);
    };
    SubharmonicReport R;
    R.min_laplacian = std::numeric_limits<double>::infinity();
    double scale = 0;
    for (int a = 0; a < 16; ++a)
        for (int b = 1; b < 16; ++b) {
            const double x = a / 16.0 * 2.0 * kPi / lambda, z = base + 2.0 * b / 16.0;
            const double h = 0.02;
            const double L = (4.0 * hyperbolic_laplacian_fd(hfun, x, 0.0, z, h / 2) -
                              hyperbolic_laplacian_fd(hfun, x, 0.0, z, h)) / 3.0;
            R.min_laplacian = std::min(R.min_laplacian, L);
            scale = std::max(scale, std::abs(L));
            ++R.samples;
        }
    R.pass = R.min_laplacian >= -tolerance * scale;
    return R;
}

double cross_section_mean(const CuspData& cusp, const LatticeMode& mode, double z, int n) {
    double s = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += std::cos(2.0 * kPi * (mode.m * a + mode.n * b) / n);
    return bessel_profile(mode.lambda, z) * s * std::abs(lattice_det(cusp)) / (static_cast<double>(n) * n);
}

}  // namespace hnorm
