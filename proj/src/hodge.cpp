#include "hnorm/hodge.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <string>

#include "hnorm/errors.hpp"

namespace hnorm {

namespace {

using Trip = Eigen::Triplet<double>;

// Vertex unknowns of x + df: boundary vertices share one unknown per component in the relative
// case, and one unknown is pinned to remove constants.
struct Reduction {
    std::vector<int> id;  // -1 when pinned to zero
    int n = 0;
};

Reduction reduce(const MetricMesh& mesh, BoundaryCondition bc) {
    Reduction R;
    R.id.assign(mesh.num_vertices, -1);
    const bool tied = bc == BoundaryCondition::Relative && mesh.has_boundary();
    std::vector<int> comp_id(mesh.num_boundary_components, -1);
    int next = 0;
    for (int v = 0; v < mesh.num_vertices; ++v) {
        const int c = tied ? mesh.vertex_boundary[v] : -1;
        if (c >= 0) {
            if (c == 0) continue;  // pinned component
            if (comp_id[c] < 0) comp_id[c] = next++;
            R.id[v] = comp_id[c];
        } else if (!tied && v == 0) {
            continue;  // pinned vertex
        } else {
            R.id[v] = next++;
        }
    }
    R.n = next;
    return R;
}

double potential_norm2(const TetGeometry& g, const std::array<double, 4>& p) {
    Eigen::Vector4d v(p[0], p[1], p[2], p[3]);
    return std::max(0.0, v.dot(g.grad_gram * v));
}

struct WeightedSolve {
    Eigen::VectorXd f;
    int iterations = 0;
    double residual = 0.0;
};

// Minimises sum_t w_t vol_t |grad(phi_t + f)|^2 over the reduced unknowns.
WeightedSolve weighted_solve(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const Reduction& R,
                             const std::vector<std::array<double, 4>>& phi, const std::vector<double>& w,
                             double tol, int max_iter, const Eigen::VectorXd* guess) {
    WeightedSolve out;
    out.f = Eigen::VectorXd::Zero(R.n);
    if (R.n == 0) return out;
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(mesh.num_tets()) * 16);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(R.n);
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const double s = geo[t].volume * w[t];
        const Eigen::Matrix4d& D = geo[t].grad_gram;
        Eigen::Vector4d p(phi[t][0], phi[t][1], phi[t][2], phi[t][3]);
        Eigen::Vector4d Dp = D * p;
        for (int a = 0; a < 4; ++a) {
            const int ia = R.id[mesh.tets[t].v[a]];
            if (ia < 0) continue;
            b[ia] -= s * Dp[a];
            for (int c = 0; c < 4; ++c) {
                const int ic = R.id[mesh.tets[t].v[c]];
                if (ic >= 0) trips.emplace_back(ia, ic, s * D(a, c));
            }
        }
    }
    if (b.norm() == 0.0) return out;
    SpMat K(R.n, R.n);
    K.setFromTriplets(trips.begin(), trips.end());
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(max_iter);
    cg.compute(K);
    if (cg.info() != Eigen::Success) throw SolverError("preconditioner setup failed", 1.0);
    if (guess && guess->size() == R.n)
        out.f = cg.solveWithGuess(b, *guess);
    else
        out.f = cg.solve(b);
    out.iterations = static_cast<int>(cg.iterations());
    out.residual = (K * out.f - b).norm() / b.norm();
    return out;
}

std::vector<std::array<double, 4>> corrected(const MetricMesh& mesh, const Reduction& R,
                                             const std::vector<std::array<double, 4>>& phi, const Eigen::VectorXd& f) {
    auto out = phi;
    for (int t = 0; t < mesh.num_tets(); ++t)
        for (int a = 0; a < 4; ++a) {
            const int i = R.id[mesh.tets[t].v[a]];
            if (i >= 0) out[t][a] += f[i];
        }
    return out;
}

}  // namespace

void require_closed(const MetricMesh& mesh, const std::vector<double>& x, double tol) {
    if (static_cast<int>(x.size()) != mesh.num_edges()) throw DomainError("cochain length does not match the edge count");
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::fabs(v));
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const MeshFace& fc = mesh.faces[f];
        const double s = fc.es[0] * x[fc.e[0]] - fc.es[1] * x[fc.e[1]] + fc.es[2] * x[fc.e[2]];
        if (std::fabs(s) > tol * std::max(1.0, scale)) throw DomainError("cochain is not closed");
    }
}

ClosedForm closed_form(const MetricMesh& mesh, const std::vector<double>& x) {
    require_closed(mesh, x);
    ClosedForm F;
    F.cochain = x;
    F.potential.resize(mesh.num_tets());
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const auto v = local_edge_values(mesh, t, x);
        F.potential[t] = {0.0, v[0], v[1], v[2]};
    }
    return F;
}

HarmonicResult harmonic_representative(const MetricMesh& mesh, const std::vector<TetGeometry>& geo,
                                       const std::vector<double>& x, const HarmonicOptions& opt) {
    ClosedForm base = closed_form(mesh, x);
    if (opt.bc == BoundaryCondition::Relative && mesh.has_boundary()) {
        double scale = 0.0, bmax = 0.0;
        for (double v : x) scale = std::max(scale, std::fabs(v));
        for (int e = 0; e < mesh.num_edges(); ++e) {
            const auto& ed = mesh.edges[e];
            if (mesh.vertex_boundary[ed.v[0]] >= 0 && mesh.vertex_boundary[ed.v[1]] >= 0 &&
                mesh.vertex_boundary[ed.v[0]] == mesh.vertex_boundary[ed.v[1]])
                bmax = std::max(bmax, std::fabs(x[e]));
        }
        if (bmax > 1e-9 * std::max(1.0, scale)) throw DomainError("relative cochain does not vanish on the boundary");
    }
    const Reduction R = reduce(mesh, opt.bc);
    const std::vector<double> ones(mesh.num_tets(), 1.0);
    const int cap = std::max(1, opt.max_iter_factor * R.n);
    WeightedSolve S = weighted_solve(mesh, geo, R, base.potential, ones, opt.tolerance, cap, nullptr);
    if (S.residual > opt.tolerance * 10.0) throw SolverError("conjugate gradient did not converge", S.residual);

    HarmonicResult H;
    H.form.potential = corrected(mesh, R, base.potential, S.f);
    H.vertex_correction.assign(mesh.num_vertices, 0.0);
    for (int v = 0; v < mesh.num_vertices; ++v)
        if (R.id[v] >= 0) H.vertex_correction[v] = S.f[R.id[v]];
    H.form.cochain = x;
    for (int e = 0; e < mesh.num_edges(); ++e)
        H.form.cochain[e] += H.vertex_correction[mesh.edges[e].v[1]] - H.vertex_correction[mesh.edges[e].v[0]];
    double s = 0.0;
    for (int t = 0; t < mesh.num_tets(); ++t) s += geo[t].volume * potential_norm2(geo[t], H.form.potential[t]);
    H.l2 = std::sqrt(s);
    H.iterations = S.iterations;
    H.residual = S.residual;
    H.unknowns = R.n;
    return H;
}

NormBundle form_norms(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != mesh.num_edges()) throw DomainError("cochain length does not match the edge count");
    NormBundle N;
    double l2sq = 0.0;
    for (int t = 0; t < mesh.num_tets(); ++t) {
        const auto v = local_edge_values(mesh, t, x);
        Eigen::Matrix<double, 6, 1> xv;
        for (int e = 0; e < 6; ++e) xv[e] = v[e];
        l2sq += xv.dot(whitney_mass1(geo[t]) * xv);
        N.volume += geo[t].volume;
        for (const auto& q : tet_quadrature()) {
            const double m = whitney1_at(geo[t], v, q.bary).norm();
            N.l1 += q.weight * geo[t].volume * m;
            N.linf = std::max(N.linf, m);
        }
    }
    N.l2 = std::sqrt(std::max(0.0, l2sq));
    return N;
}

NormBundle closed_form_norms(const std::vector<TetGeometry>& geo, const ClosedForm& F) {
    NormBundle N;
    double l2sq = 0.0;
    for (size_t t = 0; t < geo.size(); ++t) {
        const double m2 = potential_norm2(geo[t], F.potential[t]);
        const double m = std::sqrt(m2);
        N.volume += geo[t].volume;
        l2sq += geo[t].volume * m2;
        N.l1 += geo[t].volume * m;
        N.linf = std::max(N.linf, m);
    }
    N.l2 = std::sqrt(l2sq);
    return N;
}

L1Result l1_minimize(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const std::vector<double>& x,
                     const L1Options& opt) {
    const ClosedForm base = closed_form(mesh, x);
    const Reduction R = reduce(mesh, opt.bc);
    const int T = mesh.num_tets();
    L1Result out;
    auto pointwise = [&](const std::vector<std::array<double, 4>>& p) {
        std::vector<double> m(T);
        for (int t = 0; t < T; ++t) m[t] = std::sqrt(potential_norm2(geo[t], p[t]));
        return m;
    };
    auto current = base.potential;
    std::vector<double> m = pointwise(current);
    double vol = 0.0, mean = 0.0;
    for (int t = 0; t < T; ++t) vol += geo[t].volume, mean += geo[t].volume * m[t];
    if (mean == 0.0) {
        out.converged = true;
        return out;
    }
    mean /= vol;
    double eps = mean;
    const double eps_min = opt.eps_floor * mean;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(R.n);
    std::vector<double> w(T);
    double best_primal = 0.0, best_dual = 0.0;
    for (int t = 0; t < T; ++t) best_primal += geo[t].volume * m[t];
    for (int it = 0; it < opt.max_iterations; ++it) {
        for (int t = 0; t < T; ++t) w[t] = 1.0 / std::sqrt(m[t] * m[t] + eps * eps);
        WeightedSolve S = weighted_solve(mesh, geo, R, base.potential, w, 1e-10, std::max(50, 10 * R.n), &f);
        f = S.f;
        // Dual field p = w * grad(phi + f_new) is divergence free up to the solver residual.
        current = corrected(mesh, R, base.potential, f);
        m = pointwise(current);
        // p = w grad(phi + f) is orthogonal to admissible gradients; scaled to |p| <= 1 it
        // certifies sum vol <p, grad(phi + f)> as a lower bound for every representative.
        double primal = 0.0, pairing = 0.0, pmax = 0.0;
        for (int t = 0; t < T; ++t) {
            primal += geo[t].volume * m[t];
            pairing += geo[t].volume * w[t] * m[t] * m[t];
            pmax = std::max(pmax, w[t] * m[t]);
        }
        const double dual = pmax > 0 ? pairing / std::max(1.0, pmax) : 0.0;
        best_primal = std::min(best_primal, primal);
        best_dual = std::max(best_dual, dual);
        out.iterations = it + 1;
        if ((best_primal - best_dual) <= opt.relative_gap * best_primal) {
            out.converged = true;
            break;
        }
        eps = std::max(eps_min, eps * 0.5);
    }
    out.value = best_primal;
    out.lower_bound = best_dual;
    out.gap = best_primal - best_dual;
    return out;
}

double surface_flux(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const DualSurface& surface,
                    const ClosedForm& harmonic, const std::vector<double>& orientation_cochain) {
    double flux = 0.0;
    for (const SurfacePolygon& P : surface.polygons) {
        const TetGeometry& g = geo[P.tet];
        std::array<Eigen::Vector3d, 4> pts;
        for (int k = 0; k < P.nverts; ++k) {
            const int a = kEdgeVerts[P.edge[k]][0], b = kEdgeVerts[P.edge[k]][1];
            pts[k] = g.position[a] + P.param[k] * (g.position[b] - g.position[a]);
        }
        Eigen::Vector3d area = Eigen::Vector3d::Zero();
        for (int k = 0; k < P.nverts; ++k) area += 0.5 * pts[k].cross(pts[(k + 1) % P.nverts]);
        const auto cv = local_edge_values(mesh, P.tet, orientation_cochain);
        const Eigen::Vector3d gu = affine_gradient(g, Eigen::Vector3d(cv[0], cv[1], cv[2]));
        if (area.dot(gu) < 0) area = -area;
        const auto& p = harmonic.potential[P.tet];
        const Eigen::Vector3d ga = affine_gradient(g, Eigen::Vector3d(p[1] - p[0], p[2] - p[0], p[3] - p[0]));
        flux += ga.dot(area);
    }
    return flux;
}

FluxReport flux_check(const MetricMesh& mesh, const std::vector<TetGeometry>& geo, const ClosedForm& harmonic,
                      int copies, int levels) {
    if (copies < 1 || levels < 1) throw PreconditionError("flux check needs positive copy and level counts");
    FluxReport R;
    const double l2 = closed_form_norms(geo, harmonic).l2;
    R.l2_squared = l2 * l2;
    R.levels = levels;
    std::vector<double> primitive = harmonic.cochain;
    for (double& v : primitive) v /= copies;
    for (int i = 0; i < levels; ++i) {
        double level = (i + 0.5) / levels;
        DualSurface S;
        for (int attempt = 0;; ++attempt) {
            try {
                S = level_surface(mesh, primitive, copies, level);
                break;
            } catch (const DomainError& e) {
                if (attempt > 8 || std::string(e.what()).find("vertex") == std::string::npos) throw;
                level += 1e-7 * (attempt + 1);
            }
        }
        const double f = surface_flux(mesh, geo, S, harmonic, harmonic.cochain);
        if (i == 0) R.flux = f;
        R.mean_flux += f / levels;
        const double d = R.l2_squared > 0 ? std::fabs(f - R.l2_squared) / R.l2_squared : std::fabs(f);
        R.discrepancy = std::max(R.discrepancy, d);
    }
    return R;
}

SweepFit fit_truncation_sweep(const std::vector<double>& heights, const std::vector<double>& values, double lambda1) {
    if (heights.empty() || heights.size() != values.size()) throw PreconditionError("sweep needs matching heights and values");
    for (size_t i = 1; i < heights.size(); ++i)
        if (!(heights[i] > heights[i - 1])) throw PreconditionError("truncation heights must increase");
    SweepFit F;
    F.heights = heights;
    F.values = values;
    F.lambda1 = lambda1;
    F.A = values.back();
    if (heights.size() == 1) {
        F.warning = "single height: no extrapolation";
        return F;
    }
    bool inc = true, dec = true;
    for (size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[i - 1]) dec = false;
        if (values[i] < values[i - 1]) inc = false;
    }
    if (!inc && !dec) {
        F.warning = "non-monotone sweep: reporting the last value";
        return F;
    }
    const size_t n = values.size();
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = -std::exp(-2.0 * lambda1 * std::exp(heights[i]));
        y[i] = values[i];
    }
    const double spread = X.col(1).maxCoeff() - X.col(1).minCoeff();
    F.fitted = true;
    if (spread < 1e-14 * (1.0 + std::fabs(y.mean()))) {
        // The exponential tail is below resolution at every height.
        F.A = values.back();
        F.B = 0.0;
        return F;
    }
    Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
    F.A = c[0];
    F.B = c[1];
    return F;
}

}  // namespace hnorm
