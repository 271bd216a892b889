#include "setreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "setreg/numeric.hpp"

namespace setreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw input_error(msg);
}

void check_dim(const SetExpr& s, const Vec& x) {
    if (s.dim() != x.size())
        throw input_error("dimension mismatch: set dim " + std::to_string(s.dim()) +
                          ", point dim " + std::to_string(x.size()));
}

// Least-squares projection of x onto {z : a_i^T z = b_i, i in rows[idx]}.
// Returns false when the selected normals are (nearly) dependent.
bool project_onto_active(const std::vector<Halfspace>& rows, const std::vector<int>& idx,
                         const Vec& x, Vec& out) {
    const int k = static_cast<int>(idx.size());
    std::vector<std::vector<double>> G(k, std::vector<double>(k));
    std::vector<double> r(k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) G[i][j] = dot(rows[idx[i]].a, rows[idx[j]].a);
        r[i] = dot(rows[idx[i]].a, x) - rows[idx[i]].b;
    }
    std::vector<double> lam;
    if (!solve_linear(G, r, lam)) return false;
    out = x;
    for (int i = 0; i < k; ++i) out -= lam[i] * rows[idx[i]].a;
    return true;
}

bool poly_feasible_point(const Vec& x, const std::vector<Halfspace>& rows, double tol) {
    for (const auto& h : rows)
        if (dot(h.a, x) > h.b + tol) return false;
    return true;
}

// Exact projection onto a polyhedron in dim <= 3 by active-set enumeration
// over faces, edges and vertices.
bool poly_project(const std::vector<Halfspace>& rows, const Vec& x, Vec& best) {
    if (poly_feasible_point(x, rows, 1e-12)) {
        best = x;
        return true;
    }
    const int n = static_cast<int>(rows.size());
    const int dim = x.size();
    double bestd = kInf;
    bool ok = false;
    std::vector<int> idx;
    auto consider = [&](const Vec& z) {
        if (!poly_feasible_point(z, rows, 1e-9)) return;
        double d = dist2(x, z);
        if (d < bestd) {
            bestd = d;
            best = z;
            ok = true;
        }
    };
    for (int i = 0; i < n; ++i) {
        Vec z;
        if (project_onto_active(rows, {i}, x, z)) consider(z);
        if (dim >= 2)
            for (int j = i + 1; j < n; ++j) {
                if (project_onto_active(rows, {i, j}, x, z)) consider(z);
                if (dim >= 3)
                    for (int k = j + 1; k < n; ++k)
                        if (project_onto_active(rows, {i, j, k}, x, z)) consider(z);
            }
    }
    return ok;
}

Vec box_clamp(const Box& b, const Vec& x) {
    Vec z = x;
    for (int i = 0; i < x.size(); ++i) z[i] = std::clamp(x[i], b.lo[i], b.hi[i]);
    return z;
}

// Nearest parabola-boundary candidates via the cubic normal equation
// 2c^2 u^3 + (1 - 2cq) u - p = 0 for x = (p, q).
std::vector<Vec> parabola_boundary_candidates(double c, const Vec& x) {
    std::vector<Vec> pts;
    for (double u : cubic_real_roots(2.0 * c * c, 0.0, 1.0 - 2.0 * c * x[1], -x[0]))
        pts.push_back(Vec{u, c * u * u});
    return pts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Constructors

SetPtr make_halfspace(Vec a, double b) {
    require(norm2(a) > 0, "halfspace: zero normal");
    require(std::isfinite(b), "halfspace: offset must be finite");
    int dim = a.size();
    return std::make_shared<SetExpr>(dim, Halfspace{std::move(a), b});
}

SetPtr make_ball(Vec c, double r) {
    require(r >= 0 && std::isfinite(r), "ball: radius must be >= 0");
    int dim = c.size();
    return std::make_shared<SetExpr>(dim, Ball{std::move(c), r});
}

SetPtr make_box(Vec lo, Vec hi) {
    require(lo.size() == hi.size(), "box: lo/hi dimension mismatch");
    for (int i = 0; i < lo.size(); ++i) {
        require(!std::isnan(lo[i]) && !std::isnan(hi[i]), "box: NaN bound");
        require(lo[i] <= hi[i], "box: lo > hi");
    }
    int dim = lo.size();
    return std::make_shared<SetExpr>(dim, Box{std::move(lo), std::move(hi)});
}

SetPtr make_affine(Vec p, std::vector<Vec> basis) {
    int dim = p.size();
    std::vector<Vec> ortho;
    for (Vec v : basis) {
        require(v.size() == dim, "affine: basis dimension mismatch");
        for (const Vec& u : ortho) v -= dot(v, u) * u;
        double n = norm2(v);
        require(n > 1e-10, "affine: dependent basis");
        ortho.push_back((1.0 / n) * v);
    }
    return std::make_shared<SetExpr>(dim, AffineSet{std::move(p), std::move(ortho)});
}

SetPtr make_polyhedron(std::vector<Halfspace> rows) {
    require(!rows.empty(), "polyhedron: no rows");
    int dim = rows.front().a.size();
    require(dim <= 3, "polyhedron: only dim <= 3 supported");
    for (const auto& h : rows) {
        require(h.a.size() == dim, "polyhedron: row dimension mismatch");
        require(norm2(h.a) > 0, "polyhedron: zero row normal");
    }
    Vec probe;
    require(poly_project(rows, Vec::zeros(dim), probe), "polyhedron: infeasible");
    return std::make_shared<SetExpr>(dim, Polyhedron{std::move(rows)});
}

SetPtr make_parabola_epi(double c) {
    require(c > 0, "parabola_epi: c must be > 0");
    return std::make_shared<SetExpr>(2, ParabolaEpi{c});
}

SetPtr make_union(std::vector<SetPtr> children) {
    require(children.size() >= 2, "union: needs >= 2 children");
    int dim = children.front()->dim();
    for (const auto& ch : children)
        require(ch->dim() == dim, "union: child dimension mismatch");
    return std::make_shared<SetExpr>(dim, UnionSet{std::move(children)});
}

SetPtr make_translate(SetPtr child, Vec offset) {
    require(child != nullptr, "translate: null child");
    require(offset.size() == child->dim(), "translate: offset dimension mismatch");
    if (const auto* t = child->as<Translate>()) {
        Vec total = t->offset + offset;
        return std::make_shared<SetExpr>(child->dim(), Translate{t->child, total});
    }
    int dim = child->dim();
    return std::make_shared<SetExpr>(dim, Translate{std::move(child), std::move(offset)});
}

SetPtr make_product_graph(std::vector<SetPtr> sets, int base_dim) {
    require(sets.size() >= 1, "product_graph: no sets");
    for (const auto& s : sets)
        require(s->dim() == base_dim, "product_graph: set dimension mismatch");
    int dim = base_dim * (1 + static_cast<int>(sets.size()));
    return std::make_shared<SetExpr>(dim, ProductGraph{std::move(sets), base_dim});
}

// ---------------------------------------------------------------------------
// Euclidean distance / projection

namespace {

// Minimize the product-graph residual over the base coordinate x'.
// combine(base_gap, per-set distances) is the norm-specific aggregation.
double product_graph_opt(const ProductGraph& g, const Vec& x,
                         const std::function<double(double, const std::vector<double>&)>& combine,
                         Vec* arg_base) {
    const int nb = g.base_dim;
    const int m = static_cast<int>(g.sets.size());
    Vec base = slice(x, 0, nb);
    std::vector<double> ds(m);
    auto f = [&](const Vec& xp) {
        std::vector<double> dd(m);
        for (int i = 0; i < m; ++i) {
            Vec z = xp + slice(x, nb * (1 + i), nb);
            dd[i] = distance(*g.sets[i], z);
        }
        return combine(dist2(base, xp), dd);
    };
    PatternOptions opt;
    opt.initial_step = std::max(0.05, 0.25 * f(base));
    opt.min_step = 1e-12;
    Vec arg;
    double v = pattern_min(f, base, opt, &arg);
    if (arg_base) *arg_base = arg;
    return v;
}

}  // namespace

double distance(const SetExpr& s, const Vec& x) {
    check_dim(s, x);
    if (const auto* h = s.as<Halfspace>()) {
        return positive_part(dot(h->a, x) - h->b) / norm2(h->a);
    }
    if (const auto* b = s.as<Ball>()) {
        return positive_part(dist2(x, b->c) - b->r);
    }
    if (const auto* b = s.as<Box>()) {
        return dist2(x, box_clamp(*b, x));
    }
    if (const auto* a = s.as<AffineSet>()) {
        Vec d = x - a->p;
        for (const Vec& u : a->basis) d -= dot(d, u) * u;
        return norm2(d);
    }
    if (const auto* p = s.as<Polyhedron>()) {
        Vec z;
        if (!poly_project(p->rows, x, z))
            throw numeric_error("polyhedron projection failed");
        return dist2(x, z);
    }
    if (const auto* pe = s.as<ParabolaEpi>()) {
        if (x[1] >= pe->c * x[0] * x[0]) return 0.0;
        double best = kInf;
        for (const Vec& cand : parabola_boundary_candidates(pe->c, x))
            best = std::min(best, dist2(x, cand));
        return best;
    }
    if (const auto* u = s.as<UnionSet>()) {
        double best = kInf;
        for (const auto& ch : u->children) best = std::min(best, distance(*ch, x));
        return best;
    }
    if (const auto* t = s.as<Translate>()) {
        return distance(*t->child, x - t->offset);
    }
    const auto* g = s.as<ProductGraph>();
    return product_graph_opt(*g, x,
                             [](double gap, const std::vector<double>& ds) {
                                 double s2 = gap * gap;
                                 for (double d : ds) s2 += d * d;
                                 return std::sqrt(s2);
                             },
                             nullptr);
}

Vec project(const SetExpr& s, const Vec& x) {
    check_dim(s, x);
    if (const auto* h = s.as<Halfspace>()) {
        double viol = positive_part(dot(h->a, x) - h->b);
        if (viol == 0) return x;
        return x - (viol / dot(h->a, h->a)) * h->a;
    }
    if (const auto* b = s.as<Ball>()) {
        double d = dist2(x, b->c);
        if (d <= b->r) return x;
        return b->c + (b->r / d) * (x - b->c);
    }
    if (const auto* b = s.as<Box>()) {
        return box_clamp(*b, x);
    }
    if (const auto* a = s.as<AffineSet>()) {
        Vec z = a->p;
        for (const Vec& u : a->basis) z += dot(x - a->p, u) * u;
        return z;
    }
    if (const auto* p = s.as<Polyhedron>()) {
        Vec z;
        if (!poly_project(p->rows, x, z))
            throw numeric_error("polyhedron projection failed");
        return z;
    }
    if (const auto* pe = s.as<ParabolaEpi>()) {
        if (x[1] >= pe->c * x[0] * x[0]) return x;
        Vec best;
        double bestd = kInf;
        for (const Vec& cand : parabola_boundary_candidates(pe->c, x)) {
            double d = dist2(x, cand);
            if (d < bestd - 1e-12 ||
                (std::abs(d - bestd) <= 1e-12 && cand[0] >= 0 && best[0] < 0)) {
                bestd = d;
                best = cand;
            }
        }
        return best;
    }
    if (const auto* u = s.as<UnionSet>()) {
        int arg = 0;
        double best = kInf;
        for (size_t i = 0; i < u->children.size(); ++i) {
            double d = distance(*u->children[i], x);
            if (d < best) {  // strict: lowest index wins ties
                best = d;
                arg = static_cast<int>(i);
            }
        }
        return project(*u->children[arg], x);
    }
    if (const auto* t = s.as<Translate>()) {
        return project(*t->child, x - t->offset) + t->offset;
    }
    const auto* g = s.as<ProductGraph>();
    Vec base;
    product_graph_opt(*g, x,
                      [](double gap, const std::vector<double>& ds) {
                          double s2 = gap * gap;
                          for (double d : ds) s2 += d * d;
                          return std::sqrt(s2);
                      },
                      &base);
    Vec out = x;
    for (int i = 0; i < g->base_dim; ++i) out[i] = base[i];
    const int nb = g->base_dim;
    for (size_t i = 0; i < g->sets.size(); ++i) {
        Vec z = base + slice(x, nb * (1 + i), nb);
        Vec pz = project(*g->sets[i], z);
        for (int j = 0; j < nb; ++j) out[nb * (1 + i) + j] = pz[j] - base[j];
    }
    return out;
}

bool membership(const SetExpr& s, const Vec& x, double tol) {
    if (tol < 0) throw input_error("membership: tol must be >= 0");
    return distance(s, x) <= tol;
}

// ---------------------------------------------------------------------------
// Distance under max-of-blocks norms

namespace {

// Convex local search over the set, staying feasible via the exact Euclidean
// projection; valid for convex primitives.
double projected_norm_search(const SetExpr& s, const Vec& x, const Norm& n) {
    Vec z0 = project(s, x);
    auto f = [&](const Vec& z) { return n.dist(x, project(s, z)); };
    PatternOptions opt;
    opt.initial_step = std::max(0.1, 0.5 * n.dist(x, z0));
    opt.min_step = 1e-12;
    Vec arg;
    double v = pattern_min(f, z0, opt, &arg);
    return std::min(v, n.dist(x, z0));
}

// Affine sets whose basis vectors each live inside a single block decouple
// across blocks.
bool affine_block_aligned(const AffineSet& a, const Norm& n) {
    for (const Vec& u : a.basis) {
        int hit = -1;
        for (int b = 0; b < n.blocks(); ++b) {
            bool support = false;
            for (int i = n.block_offset(b); i < n.block_offset(b) + n.block_len(b); ++i)
                if (u[i] != 0) support = true;
            if (support) {
                if (hit >= 0) return false;
                hit = b;
            }
        }
    }
    return true;
}

}  // namespace

double norm_distance(const SetExpr& s, const Vec& x, const Norm& n) {
    if (n.is_euclidean() || n.dim() == 0) return distance(s, x);
    check_dim(s, x);
    if (const auto* h = s.as<Halfspace>()) {
        return positive_part(dot(h->a, x) - h->b) / n.dual(h->a);
    }
    if (const auto* b = s.as<Box>()) {
        return n.dist(x, box_clamp(*b, x));
    }
    if (const auto* a = s.as<AffineSet>()) {
        if (a->basis.empty()) return n.dist(x, a->p);
        if (affine_block_aligned(*a, n)) {
            Vec d = x - a->p;
            for (const Vec& u : a->basis) d -= dot(d, u) * u;
            return n(d);
        }
        if (a->basis.size() == 1) {
            const Vec& u = a->basis[0];
            Vec d0 = x - a->p;
            double span = 2.0 * n(d0) / n(u) + 1.0;
            double t0 = dot(d0, u);
            auto f = [&](double t) { return n(d0 - t * u); };
            return golden_min(f, std::min(-span, t0 - 1.0), std::max(span, t0 + 1.0));
        }
        return projected_norm_search(s, x, n);
    }
    if (const auto* pe = s.as<ParabolaEpi>()) {
        // blocks on R^2 can only be {1,1}; the sectionwise objective is convex
        double p = x[0], q = x[1];
        if (q >= pe->c * p * p) return 0.0;
        double d0 = distance(s, x);
        double span = 2.0 * d0 / std::min(1.0, 1.0 / n.dual(Vec{1, 0})) + 1.0;
        auto f = [&](double u) {
            Vec diff{p - u, q - std::max(q, pe->c * u * u)};
            return n(diff);
        };
        return golden_min(f, p - span, p + span);
    }
    if (const auto* u = s.as<UnionSet>()) {
        double best = kInf;
        for (const auto& ch : u->children) best = std::min(best, norm_distance(*ch, x, n));
        return best;
    }
    if (const auto* t = s.as<Translate>()) {
        return norm_distance(*t->child, x - t->offset, n);
    }
    if (const auto* g = s.as<ProductGraph>()) {
        return product_graph_opt(*g, x,
                                 [](double gap, const std::vector<double>& ds) {
                                     double m = gap;
                                     for (double d : ds) m = std::max(m, d);
                                     return m;
                                 },
                                 nullptr);
    }
    // Ball, Polyhedron: convex, use the projected search.
    return projected_norm_search(s, x, n);
}

// ---------------------------------------------------------------------------
// Brute-force grid oracle

BruteResult brute_distance(const SetExpr& s, const Vec& x, const GridSpec& g,
                           const Norm& n) {
    if (g.radius <= 0) throw input_error("grid: radius must be > 0");
    if (g.points_per_axis < 3) throw input_error("grid: points_per_axis must be >= 3");
    Norm nn = (n.dim() == x.size() && !n.is_euclidean()) ? n : Norm::euclidean(x.size());
    const int dim = x.size();
    BruteResult res;
    Vec center = x;
    double radius = g.radius;
    double best = kInf;
    Vec bestp;
    for (int level = 0; level <= g.refinement_levels; ++level) {
        double cell = 2.0 * radius / (g.points_per_axis - 1);
        double tol = cell * std::sqrt(static_cast<double>(dim));
        std::vector<int> idx(dim, 0);
        bool done = false;
        while (!done) {
            Vec p = center;
            for (int i = 0; i < dim; ++i)
                p[i] += -radius + cell * idx[i];
            ++res.samples;
            if (distance(s, p) <= tol) {
                double d = nn.dist(x, p);
                if (d < best) {
                    best = d;
                    bestp = p;
                }
            }
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < g.points_per_axis) break;
                idx[i] = 0;
            }
            if (i == dim) done = true;
        }
        if (best == kInf) break;  // nothing found: refining will not help
        center = bestp;
        radius *= 0.5;
    }
    if (best == kInf) {
        res.found = false;
        res.value = 0;
        return res;
    }
    res.found = true;
    res.value = best;
    return res;
}

// ---------------------------------------------------------------------------
// Scene

void validate_scene(const Scene& scene) {
    require(scene.dim >= 1, "scene: dim must be >= 1");
    require(scene.m() >= 2, "scene: needs at least two sets");
    require(scene.xbar.size() == scene.dim, "scene: xbar dimension mismatch");
    for (int i = 0; i < scene.m(); ++i) {
        require(scene.sets[i]->dim() == scene.dim, "scene: set dimension mismatch");
        if (distance(*scene.sets[i], scene.xbar) > 1e-12)
            throw input_error("scene: xbar not in intersection (set " +
                              std::to_string(i) + ")");
    }
    if (scene.intersection) {
        require(scene.intersection->dim() == scene.dim,
                "scene: intersection dimension mismatch");
        if (distance(*scene.intersection, scene.xbar) > 1e-12)
            throw input_error("scene: xbar not in declared intersection");
        // Members of the declared intersection must belong to every set.
        GridSpec g{1.0, 7, 0};
        const int dim = scene.dim;
        double cell = 2.0 * g.radius / (g.points_per_axis - 1);
        std::vector<int> idx(dim, 0);
        bool done = false;
        while (!done) {
            Vec p = scene.xbar;
            for (int i = 0; i < dim; ++i) p[i] += -g.radius + cell * idx[i];
            Vec q = project(*scene.intersection, p);
            for (int i = 0; i < scene.m(); ++i)
                if (distance(*scene.sets[i], q) > 1e-7)
                    throw input_error(
                        "scene: declared intersection contains a point outside set " +
                        std::to_string(i));
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < g.points_per_axis) break;
                idx[i] = 0;
            }
            if (i == dim) done = true;
        }
    }
    if (!scene.labels.empty())
        require(static_cast<int>(scene.labels.size()) == scene.m(),
                "scene: labels count mismatch");
}

namespace {

using nlohmann::json;

double parse_bound(const json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw input_error("scene: bad " + what + " (number or \"inf\"/\"-inf\")");
}

Vec parse_vec(const json& j, const std::string& what, bool allow_inf = false) {
    if (!j.is_array()) throw input_error("scene: " + what + " must be an array");
    if (j.size() > Vec::kMaxDim) throw input_error("scene: dimension too large");
    Vec v(static_cast<int>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        v[static_cast<int>(i)] =
            allow_inf ? parse_bound(j[i], what) : [&]() -> double {
                if (!j[i].is_number()) throw input_error("scene: " + what + " must be numeric");
                return j[i].get<double>();
            }();
    }
    return v;
}

SetPtr parse_set(const json& j, int dim);

SetPtr parse_set_tagged(const json& j, int dim) {
    if (!j.is_object() || !j.contains("type"))
        throw input_error("scene: set must be an object with a \"type\" tag");
    const std::string type = j.at("type").get<std::string>();
    if (type == "halfspace")
        return make_halfspace(parse_vec(j.at("a"), "halfspace.a"), j.at("b").get<double>());
    if (type == "ball")
        return make_ball(parse_vec(j.at("c"), "ball.c"), j.at("r").get<double>());
    if (type == "box")
        return make_box(parse_vec(j.at("lo"), "box.lo", true),
                        parse_vec(j.at("hi"), "box.hi", true));
    if (type == "affine") {
        std::vector<Vec> basis;
        if (j.contains("basis"))
            for (const auto& b : j.at("basis")) basis.push_back(parse_vec(b, "affine.basis"));
        return make_affine(parse_vec(j.at("p"), "affine.p"), std::move(basis));
    }
    if (type == "polyhedron") {
        std::vector<Halfspace> rows;
        for (const auto& r : j.at("rows"))
            rows.push_back({parse_vec(r.at("a"), "polyhedron.a"), r.at("b").get<double>()});
        return make_polyhedron(std::move(rows));
    }
    if (type == "parabola_epi") {
        if (dim != 2) throw input_error("scene: parabola_epi is 2D only");
        return make_parabola_epi(j.at("c").get<double>());
    }
    if (type == "union") {
        std::vector<SetPtr> children;
        for (const auto& c : j.at("children")) children.push_back(parse_set(c, dim));
        return make_union(std::move(children));
    }
    if (type == "translate")
        return make_translate(parse_set(j.at("child"), dim),
                              parse_vec(j.at("offset"), "translate.offset"));
    throw input_error("scene: unknown set type \"" + type + "\"");
}

SetPtr parse_set(const json& j, int dim) {
    SetPtr s = parse_set_tagged(j, dim);
    if (s->dim() != dim)
        throw input_error("scene: set dimension " + std::to_string(s->dim()) +
                          " does not match scene dim " + std::to_string(dim));
    return s;
}

}  // namespace

Scene parse_scene_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw input_error(std::string("scene: invalid JSON: ") + e.what());
    }
    try {
        Scene scene;
        scene.dim = j.at("dim").get<int>();
        if (scene.dim < 1 || scene.dim > Vec::kMaxDim)
            throw input_error("scene: dim out of range");
        scene.xbar = parse_vec(j.at("xbar"), "xbar");
        if (!j.contains("sets") || !j.at("sets").is_array())
            throw input_error("scene: missing sets array");
        for (const auto& js : j.at("sets")) scene.sets.push_back(parse_set(js, scene.dim));
        if (scene.sets.size() < 2) throw input_error("scene: needs at least two sets");
        if (j.contains("intersection"))
            scene.intersection = parse_set(j.at("intersection"), scene.dim);
        if (j.contains("labels"))
            for (const auto& l : j.at("labels")) scene.labels.push_back(l.get<std::string>());
        scene.norm = Norm::euclidean(scene.dim);
        validate_scene(scene);
        return scene;
    } catch (const json::exception& e) {
        throw input_error(std::string("scene: schema violation: ") + e.what());
    }
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene_text(ss.str());
}

// ---------------------------------------------------------------------------

NearestResult constrained_nearest(const std::function<double(const Vec&)>& infeas,
                                  const Vec& x, const Vec& center, double radius,
                                  double radius_max, const Norm& norm, int ppa,
                                  const std::vector<Vec>& known_members,
                                  const std::function<double(const Vec&)>& descend_in) {
    const int dim = x.size();
    const std::function<double(const Vec&)>& descend = descend_in ? descend_in : infeas;
    NearestResult res;
    struct Cand {
        double score;
        Vec pt;
    };
    std::vector<Cand> cands;
    double best = kInf;  // distances of verified members only
    Vec bestp;
    for (const Vec& p : known_members)
        if (infeas(p) <= 1e-9) {
            cands.push_back({norm.dist(x, p), p});
            if (cands.back().score < best) {
                best = cands.back().score;
                bestp = p;
            }
        }

    double r = radius;
    double cell = 0;
    while (true) {
        cell = 2.0 * r / (ppa - 1);
        double tol = cell * std::sqrt(static_cast<double>(dim));
        std::vector<int> idx(dim, 0);
        bool done = false;
        while (!done) {
            Vec p = center;
            for (int i = 0; i < dim; ++i) p[i] += -r + cell * idx[i];
            ++res.evals;
            if (infeas(p) <= tol) cands.push_back({norm.dist(x, p), p});
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < ppa) break;
                idx[i] = 0;
            }
            if (i == dim) done = true;
        }
        if (!cands.empty() || r >= radius_max) break;
        r *= 2.0;
    }
    if (cands.empty()) {
        res.found = false;
        return res;
    }
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.score < b.score; });

    auto restore = [&](Vec z, double step) -> std::optional<Vec> {
        if (infeas(z) <= 1e-10) return z;
        PatternOptions opt;
        opt.initial_step = std::max(step, 1e-6);
        opt.min_step = 1e-13;
        Vec arg;
        pattern_min(descend, z, opt, &arg);
        if (infeas(arg) <= 1e-9) return arg;
        return std::nullopt;
    };

    const double lambda = 8.0;
    int starts = std::min<size_t>(3, cands.size());
    std::vector<Vec> seeds;
    for (int k = 0; k < starts; ++k) seeds.push_back(cands[k].pt);
    seeds.push_back(x);
    for (const Vec& seed : seeds) {
        auto penalty = [&](const Vec& z) { return norm.dist(x, z) + lambda * infeas(z); };
        PatternOptions opt;
        opt.initial_step = cell > 0 ? cell : 0.1;
        opt.min_step = 1e-12;
        Vec zstar;
        pattern_min(penalty, seed, opt, &zstar);
        auto feas = restore(zstar, cell);
        if (!feas) continue;
        Vec z = *feas;
        double d = norm.dist(x, z);
        // Pull toward x while staying feasible.
        for (int round = 0; round < 40; ++round) {
            bool moved = false;
            for (double frac : {0.5, 0.25, 0.1}) {
                Vec trial = z + frac * (x - z);
                auto tf = restore(trial, 0.25 * frac * d);
                if (!tf) continue;
                double td = norm.dist(x, *tf);
                if (td < d - 1e-13) {
                    z = *tf;
                    d = td;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        if (d < best) {
            best = d;
            bestp = z;
        }
    }
    if (best == kInf) {
        // No verified member: report the best approximate grid candidate.
        best = cands.front().score;
        bestp = cands.front().pt;
    }
    res.found = true;
    res.dist = best;
    res.point = bestp;
    return res;
}

}  // namespace setreg
