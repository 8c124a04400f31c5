#include "hnorm/manifold.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"

namespace hnorm {

int local_edge_index(int a, int b) {
    if (a > b) std::swap(a, b);
    for (int e = 0; e < 6; ++e)
        if (kEdgeVerts[e][0] == a && kEdgeVerts[e][1] == b) return e;
    throw PreconditionError("invalid local edge");
}

cplx edge_shape(cplx z, int e) {
    switch (e) {
        case 0:
        case 5:
            return z;
        case 1:
        case 4:
            return 1.0 / (1.0 - z);
        default:
            return (z - 1.0) / z;
    }
}

namespace {

int perm_parity(const std::array<int, 4>& p) {
    int s = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (p[i] > p[j]) s = -s;
    return s;
}

std::array<int, 4> inverse(const std::array<int, 4>& p) {
    std::array<int, 4> q{};
    for (int i = 0; i < 4; ++i) q[p[i]] = i;
    return q;
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& s, int line, const std::string& field) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected a number for " + field + ", got '" + s + "'", line);
    }
}

long long to_int(const std::string& s, int line, const std::string& field) {
    try {
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected an integer for " + field + ", got '" + s + "'", line);
    }
}

std::array<int, 4> parse_perm(const std::string& s, int line) {
    if (s.size() != 4) throw ParseError("permutation must have 4 symbols: '" + s + "'", line);
    std::array<int, 4> p{};
    std::set<int> seen;
    for (int i = 0; i < 4; ++i) {
        if (s[i] < '0' || s[i] > '3') throw ParseError("bad permutation symbol in '" + s + "'", line);
        p[i] = s[i] - '0';
        seen.insert(p[i]);
    }
    if (seen.size() != 4) throw ParseError("permutation repeats a symbol: '" + s + "'", line);
    return p;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

const std::set<std::string> kSections = {"gluings", "shapes", "cusps", "thurston_ball", "class_norms", "cover_of"};
const std::set<std::string> kKeys = {"name", "kind", "tetrahedra", "systole", "injectivity_radius", "tau0", "box"};

}  // namespace

TriangulatedManifold parse_manifold(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifold file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifold_text(ss.str());
}

TriangulatedManifold parse_manifold_text(const std::string& text) {
    TriangulatedManifold M;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::string section;
    int declared_tets = -1;
    bool have_systole = false;
    std::map<std::pair<int, int>, int> glued_at;  // (tet, face) -> line
    std::vector<std::array<bool, 4>> have_face;
    std::vector<std::tuple<int, int, int, std::array<int, 4>>> gl_rows;

    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto tok = split_ws(line);
        const std::string& head = tok[0];
        if (kKeys.count(head)) {
            section.clear();
            if (head == "name") {
                if (tok.size() != 2) throw ParseError("name takes one identifier", line_no);
                M.name = tok[1];
            } else if (head == "kind") {
                if (tok.size() != 2) throw ParseError("kind takes one value", line_no);
                if (tok[1] == "ideal") M.kind = ManifoldKind::Ideal;
                else if (tok[1] == "flat_torus") M.kind = ManifoldKind::FlatTorus;
                else throw ParseError("unknown kind '" + tok[1] + "'", line_no);
            } else if (head == "tetrahedra") {
                if (tok.size() != 2) throw ParseError("tetrahedra takes a count", line_no);
                declared_tets = static_cast<int>(to_int(tok[1], line_no, "tetrahedra"));
                if (declared_tets < 0) throw ParseError("negative tetrahedron count", line_no);
            } else if (head == "systole") {
                if (tok.size() != 2) throw ParseError("systole takes one value", line_no);
                M.systole = to_double(tok[1], line_no, "systole");
                have_systole = true;
            } else if (head == "injectivity_radius") {
                if (tok.size() != 2) throw ParseError("injectivity_radius takes one value", line_no);
                M.injectivity_radius = to_double(tok[1], line_no, "injectivity_radius");
            } else if (head == "tau0") {
                if (tok.size() != 2) throw ParseError("tau0 takes one value", line_no);
                M.tau0 = to_double(tok[1], line_no, "tau0");
            } else if (head == "box") {
                if (tok.size() != 4) throw ParseError("box takes three side lengths", line_no);
                for (int i = 0; i < 3; ++i) M.box[i] = to_double(tok[i + 1], line_no, "box");
            }
            continue;
        }
        if (kSections.count(head)) {
            section = head;
            if (head == "cover_of") {
                if (tok.size() != 3) throw ParseError("cover_of takes a base name and a degree", line_no);
                CoverOf c;
                c.base = tok[1];
                c.degree = static_cast<int>(to_int(tok[2], line_no, "cover degree"));
                if (c.degree < 1) throw ParseError("cover degree must be positive", line_no);
                M.cover_of = c;
            } else if (tok.size() != 1) {
                throw ParseError("section header '" + head + "' takes no arguments", line_no);
            }
            continue;
        }
        if (section.empty()) throw ParseError("unexpected content '" + head + "'", line_no);

        if (section == "gluings") {
            if (tok.size() != 4) throw ParseError("gluing row needs: tet face target_tet permutation", line_no);
            int t = static_cast<int>(to_int(tok[0], line_no, "tet"));
            int f = static_cast<int>(to_int(tok[1], line_no, "face"));
            int t2 = static_cast<int>(to_int(tok[2], line_no, "target tet"));
            auto p = parse_perm(tok[3], line_no);
            if (f < 0 || f > 3) throw ParseError("face index out of range", line_no);
            auto key = std::make_pair(t, f);
            if (glued_at.count(key))
                throw ValidationError("face " + std::to_string(t) + ":" + std::to_string(f) +
                                      " glued twice (lines " + std::to_string(glued_at[key]) + " and " +
                                      std::to_string(line_no) + ")");
            glued_at[key] = line_no;
            gl_rows.emplace_back(t, f, t2, p);
        } else if (section == "shapes") {
            if (tok.size() != 2) throw ParseError("shape row needs: re im", line_no);
            M.shapes.emplace_back(to_double(tok[0], line_no, "shape re"), to_double(tok[1], line_no, "shape im"));
        } else if (section == "cusps") {
            if (tok.size() != 4) throw ParseError("cusp row needs: xi_re xi_im eta_re eta_im", line_no);
            CuspData c;
            c.xi = cplx(to_double(tok[0], line_no, "xi"), to_double(tok[1], line_no, "xi"));
            c.eta = cplx(to_double(tok[2], line_no, "eta"), to_double(tok[3], line_no, "eta"));
            M.cusps.push_back(c);
        } else if (section == "thurston_ball") {
            std::vector<double> v;
            for (auto& s : tok) v.push_back(to_double(s, line_no, "ball vertex"));
            M.thurston_ball.push_back(v);
        } else if (section == "class_norms") {
            auto colon = std::find(tok.begin(), tok.end(), ":");
            if (colon == tok.end() || colon + 2 != tok.end())
                throw ParseError("class norm row needs: c1 .. cn : value", line_no);
            ClassNorm cn;
            for (auto it = tok.begin(); it != colon; ++it) cn.coords.push_back(to_int(*it, line_no, "class coordinate"));
            cn.value = to_double(*(colon + 1), line_no, "class norm");
            M.class_norms.push_back(cn);
        } else if (section == "cover_of") {
            std::vector<long long> row;
            for (auto& s : tok) row.push_back(to_int(s, line_no, "correspondence entry"));
            M.cover_of->matrix.push_back(row);
        }
    }

    if (!have_systole) throw ParseError("systole required");
    if (M.name.empty()) throw ParseError("name required");

    if (M.kind == ManifoldKind::Ideal) {
        if (declared_tets < 0) throw ParseError("tetrahedra count required");
        int n = declared_tets;
        M.gluings.assign(n, {});
        have_face.assign(n, {false, false, false, false});
        std::map<std::pair<int, int>, std::pair<int, int>> target_of;  // target face -> source
        for (auto& [t, f, t2, p] : gl_rows) {
            if (t < 0 || t >= n || t2 < 0 || t2 >= n)
                throw ValidationError("gluing " + std::to_string(t) + ":" + std::to_string(f) + " references a missing tetrahedron");
            auto tgt = std::make_pair(t2, p[f]);
            auto src = std::make_pair(t, f);
            if (target_of.count(tgt)) {
                auto o = target_of[tgt];
                throw ValidationError("face " + std::to_string(t2) + ":" + std::to_string(p[f]) + " is the target of gluings " +
                                      std::to_string(o.first) + ":" + std::to_string(o.second) + " and " +
                                      std::to_string(t) + ":" + std::to_string(f));
            }
            target_of[tgt] = src;
            M.gluings[t][f] = Gluing{t2, p};
            have_face[t][f] = true;
        }
        for (int t = 0; t < n; ++t)
            for (int f = 0; f < 4; ++f)
                if (!have_face[t][f])
                    throw ValidationError("face " + std::to_string(t) + ":" + std::to_string(f) + " is not glued");
        for (int t = 0; t < n; ++t)
            for (int f = 0; f < 4; ++f) {
                const auto& g = M.gluings[t][f];
                const auto& back = M.gluings[g.tet][g.perm[f]];
                if (back.tet != t || back.perm != inverse(g.perm))
                    throw ValidationError("inconsistent gluing pair " + std::to_string(t) + ":" + std::to_string(f) + " <-> " +
                                          std::to_string(g.tet) + ":" + std::to_string(g.perm[f]));
                if (g.tet == t && g.perm[f] == f)
                    throw ValidationError("face " + std::to_string(t) + ":" + std::to_string(f) + " glued to itself");
            }
        if (static_cast<int>(M.shapes.size()) != n)
            throw ValidationError("expected " + std::to_string(n) + " shapes, got " + std::to_string(M.shapes.size()));
        for (int t = 0; t < n; ++t)
            if (!(M.shapes[t].imag() > 0.0))
                throw ValidationError("shape of tetrahedron " + std::to_string(t) + " has non-positive imaginary part");
        auto comb = analyze_combinatorics(M);
        if (static_cast<int>(M.cusps.size()) != comb.num_cusps)
            throw ValidationError("expected " + std::to_string(comb.num_cusps) + " cusp rows, got " +
                                  std::to_string(M.cusps.size()));
    } else {
        if (!M.gluings.empty() || !M.shapes.empty() || !M.cusps.empty())
            throw ValidationError("flat_torus input takes no tetrahedra, shapes or cusps");
        for (double s : M.box)
            if (!(s > 0)) throw ValidationError("box sides must be positive");
    }
    if (!(M.systole > 0.0)) throw ValidationError("systole must be positive");
    for (auto& c : M.cusps) c = cusp_from_translations(c.xi, c.eta);
    if (M.kind == ManifoldKind::Ideal) {
        auto V = validate_manifold(M);
        if (V.edge_residual > 1e-6)
            throw ValidationError("edge equations not satisfied by the shapes (residual " + fmt(V.edge_residual) + ")");
    }
    return M;
}

std::string serialize_manifold(const TriangulatedManifold& M) {
    std::ostringstream os;
    os << "name " << M.name << "\n";
    os << "kind " << (M.kind == ManifoldKind::Ideal ? "ideal" : "flat_torus") << "\n";
    if (M.kind == ManifoldKind::Ideal) {
        os << "tetrahedra " << M.num_tets() << "\n";
        os << "gluings\n";
        for (int t = 0; t < M.num_tets(); ++t)
            for (int f = 0; f < 4; ++f) {
                const auto& g = M.gluings[t][f];
                os << t << " " << f << " " << g.tet << " ";
                for (int v : g.perm) os << v;
                os << "\n";
            }
        os << "shapes\n";
        for (auto z : M.shapes) os << fmt(z.real()) << " " << fmt(z.imag()) << "\n";
        os << "cusps\n";
        for (auto& c : M.cusps)
            os << fmt(c.xi.real()) << " " << fmt(c.xi.imag()) << " " << fmt(c.eta.real()) << " " << fmt(c.eta.imag()) << "\n";
    } else {
        os << "box " << fmt(M.box[0]) << " " << fmt(M.box[1]) << " " << fmt(M.box[2]) << "\n";
    }
    os << "systole " << fmt(M.systole) << "\n";
    if (M.injectivity_radius) os << "injectivity_radius " << fmt(*M.injectivity_radius) << "\n";
    os << "tau0 " << fmt(M.tau0) << "\n";
    if (!M.thurston_ball.empty()) {
        os << "thurston_ball\n";
        for (auto& v : M.thurston_ball) {
            for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << fmt(v[i]);
            os << "\n";
        }
    }
    if (!M.class_norms.empty()) {
        os << "class_norms\n";
        for (auto& cn : M.class_norms) {
            for (auto c : cn.coords) os << c << " ";
            os << ": " << fmt(cn.value) << "\n";
        }
    }
    if (M.cover_of) {
        os << "cover_of " << M.cover_of->base << " " << M.cover_of->degree << "\n";
        for (auto& row : M.cover_of->matrix) {
            for (size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << row[i];
            os << "\n";
        }
    }
    return os.str();
}

void write_manifold(const TriangulatedManifold& M, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << serialize_manifold(M);
}

Combinatorics analyze_combinatorics(const TriangulatedManifold& M) {
    Combinatorics C;
    const int n = M.num_tets();
    // Vertex classes by union-find over (tet, vertex).
    std::vector<int> parent(4 * n);
    for (int i = 0; i < 4 * n; ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    C.orientable = true;
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            const auto& g = M.gluings[t][f];
            if (perm_parity(g.perm) > 0) C.orientable = false;
            for (int v = 0; v < 4; ++v) {
                if (v == f) continue;
                int a = find(4 * t + v), b = find(4 * g.tet + g.perm[v]);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
    C.vertex_class.assign(n, {});
    std::map<int, int> root_id;
    for (int t = 0; t < n; ++t)
        for (int v = 0; v < 4; ++v) {
            int r = find(4 * t + v);
            auto it = root_id.find(r);
            if (it == root_id.end()) it = root_id.emplace(r, static_cast<int>(root_id.size())).first;
            C.vertex_class[t][v] = it->second;
        }
    C.num_cusps = static_cast<int>(root_id.size());

    // Face pairs in order of first appearance.
    C.face_pair_of.assign(n, {-1, -1, -1, -1});
    C.face_side.assign(n, {0, 0, 0, 0});
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            if (C.face_pair_of[t][f] >= 0) continue;
            const auto& g = M.gluings[t][f];
            int id = static_cast<int>(C.face_pairs.size());
            C.face_pairs.push_back(FacePair{t, f, g.tet, g.perm[f], g.perm});
            C.face_pair_of[t][f] = id;
            C.face_side[t][f] = 0;
            C.face_pair_of[g.tet][g.perm[f]] = id;
            C.face_side[g.tet][g.perm[f]] = 1;
        }

    // Edge classes by walking around each edge.
    C.edge_class.assign(n, {-1, -1, -1, -1, -1, -1});
    C.edge_sign.assign(n, {0, 0, 0, 0, 0, 0});
    for (int t0 = 0; t0 < n; ++t0)
        for (int e0 = 0; e0 < 6; ++e0) {
            if (C.edge_class[t0][e0] >= 0) continue;
            int cls = static_cast<int>(C.edge_cycles.size());
            std::vector<EdgeOccurrence> cyc;
            std::vector<int> parity, crossed;
            int a = kEdgeVerts[e0][0], b = kEdgeVerts[e0][1];
            int c = -1, d = -1;
            for (int v = 0; v < 4; ++v)
                if (v != a && v != b) (c < 0 ? c : d) = v;
            int t = t0, orient = 1;
            for (int guard = 0; guard < 4 * 6 * n + 4; ++guard) {
                int e = local_edge_index(a, b);
                if (C.edge_class[t][e] >= 0 && !(t == t0 && e == e0 && cyc.empty())) break;
                C.edge_class[t][e] = cls;
                C.edge_sign[t][e] = (a < b) ? 1 : -1;
                cyc.push_back({t, a, b});
                parity.push_back(orient);
                crossed.push_back(c);
                const auto& g = M.gluings[t][c];
                int na = g.perm[a], nb = g.perm[b], nc = g.perm[d], nd = g.perm[c];
                if (perm_parity(g.perm) > 0) orient = -orient;
                t = g.tet;
                a = na;
                b = nb;
                c = nc;
                d = nd;
                if (t == t0 && local_edge_index(a, b) == e0) break;
            }
            C.edge_cycles.push_back(cyc);
            C.edge_cycle_parity.push_back(parity);
            C.edge_cycle_face.push_back(crossed);
        }
    return C;
}

ValidationResult validate_manifold(const TriangulatedManifold& M, double tolerance) {
    ValidationResult R;
    if (M.kind != ManifoldKind::Ideal) return R;
    auto C = analyze_combinatorics(M);
    for (size_t k = 0; k < C.edge_cycles.size(); ++k) {
        double angle = 0.0, logmod = 0.0;
        for (size_t i = 0; i < C.edge_cycles[k].size(); ++i) {
            const auto& occ = C.edge_cycles[k][i];
            cplx w = edge_shape(M.shapes[occ.tet], local_edge_index(occ.a, occ.b));
            angle += std::arg(w);
            logmod += C.edge_cycle_parity[k][i] * std::log(std::abs(w));
        }
        double res = std::abs(angle - 2.0 * std::numbers::pi) + std::abs(logmod);
        R.edge_residual = std::max(R.edge_residual, res);
    }
    if (R.edge_residual > tolerance)
        R.warnings.push_back("edge equation residual " + fmt(R.edge_residual) + " exceeds tolerance");
    for (size_t i = 0; i < M.cusps.size(); ++i)
        if (M.cusps[i].waist < 1.0 - 1e-9)
            R.warnings.push_back("cusp " + std::to_string(i) + " has waist " + fmt(M.cusps[i].waist) + " < 1");
    return R;
}

ModelCusp parse_model_cusp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model cusp file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_cusp_text(ss.str());
}

ModelCusp parse_model_cusp_text(const std::string& text) {
    ModelCusp mc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool have_xi = false, have_eta = false, have_base = false;
    cplx xi, eta;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto tok = split_ws(line);
        if (tok[0] == "xi" || tok[0] == "eta") {
            if (tok.size() != 3) throw ParseError(tok[0] + " takes re im", line_no);
            cplx v(to_double(tok[1], line_no, tok[0]), to_double(tok[2], line_no, tok[0]));
            if (tok[0] == "xi") xi = v, have_xi = true;
            else eta = v, have_eta = true;
        } else if (tok[0] == "base_height") {
            if (tok.size() != 2) throw ParseError("base_height takes one value", line_no);
            mc.base_height = to_double(tok[1], line_no, "base_height");
            have_base = true;
        } else if (tok[0] == "top_height") {
            if (tok.size() != 2) throw ParseError("top_height takes one value", line_no);
            mc.top_height = to_double(tok[1], line_no, "top_height");
        } else if (tok[0] == "grid") {
            if (tok.size() != 2) throw ParseError("grid takes one value", line_no);
            mc.grid = static_cast<int>(to_int(tok[1], line_no, "grid"));
        } else if (tok[0] == "ratio") {
            if (tok.size() != 2) throw ParseError("ratio takes one value", line_no);
            mc.ratio = to_double(tok[1], line_no, "ratio");
        } else {
            throw ParseError("unknown key '" + tok[0] + "'", line_no);
        }
    }
    if (!have_xi || !have_eta || !have_base) throw ParseError("model cusp requires xi, eta and base_height");
    if (!(mc.base_height > 0)) throw ValidationError("base_height must be positive");
    if (!(mc.top_height > mc.base_height)) throw ValidationError("top_height must exceed base_height");
    if (mc.grid < 1) throw ValidationError("grid must be positive");
    mc.cusp = cusp_from_translations(xi, eta);
    return mc;
}

}  // namespace hnorm
