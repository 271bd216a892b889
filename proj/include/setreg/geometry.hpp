#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "setreg/errors.hpp"
#include "setreg/norm.hpp"
#include "setreg/vec.hpp"

namespace setreg {

class SetExpr;
using SetPtr = std::shared_ptr<const SetExpr>;

// {x : <a,x> <= b}, a != 0
struct Halfspace {
    Vec a;
    double b;
};

// {x : ||x - c|| <= r}
struct Ball {
    Vec c;
    double r;
};

// Componentwise interval; entries may be +-inf.
struct Box {
    Vec lo, hi;
};

// p + span(basis); basis orthonormal after construction. Empty basis is the
// single point {p}.
struct AffineSet {
    Vec p;
    std::vector<Vec> basis;
};

// Finite intersection of halfspaces, nonempty, dim <= 3.
struct Polyhedron {
    std::vector<Halfspace> rows;
};

// 2D only: {(u,v) : v >= c*u^2}, c > 0.
struct ParabolaEpi {
    double c;
};

struct UnionSet {
    std::vector<SetPtr> children;
};

struct Translate {
    SetPtr child;
    Vec offset;
};

// {(x, u_1, ..., u_m) : x + u_i in sets[i]}; the graph of the mapping
// x |-> (Omega_1 - x) x ... x (Omega_m - x). Membership is exact; distances
// are computed by minimizing over the base coordinate.
struct ProductGraph {
    std::vector<SetPtr> sets;
    int base_dim;
};

class SetExpr {
  public:
    using Node = std::variant<Halfspace, Ball, Box, AffineSet, Polyhedron,
                              ParabolaEpi, UnionSet, Translate, ProductGraph>;

    SetExpr(int dim, Node node) : dim_(dim), node_(std::move(node)) {}

    int dim() const { return dim_; }
    const Node& node() const { return node_; }

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&node_);
    }

  private:
    int dim_;
    Node node_;
};

// Validating constructors.
SetPtr make_halfspace(Vec a, double b);
SetPtr make_ball(Vec c, double r);
SetPtr make_box(Vec lo, Vec hi);
SetPtr make_affine(Vec p, std::vector<Vec> basis);
SetPtr make_polyhedron(std::vector<Halfspace> rows);
SetPtr make_parabola_epi(double c);
SetPtr make_union(std::vector<SetPtr> children);
SetPtr make_translate(SetPtr child, Vec offset);
SetPtr make_product_graph(std::vector<SetPtr> sets, int base_dim);

// Euclidean distance, exact for every primitive.
double distance(const SetExpr& s, const Vec& x);
inline double distance(const SetPtr& s, const Vec& x) { return distance(*s, x); }

// A nearest point of s (Euclidean); deterministic tie-breaking.
Vec project(const SetExpr& s, const Vec& x);
inline Vec project(const SetPtr& s, const Vec& x) { return project(*s, x); }

// Distance under a max-of-Euclidean-blocks norm. Exact for halfspaces,
// boxes, block-aligned affine sets and (in 2D) parabola epigraphs; other
// primitives fall back to convex local search seeded at the Euclidean
// projection.
double norm_distance(const SetExpr& s, const Vec& x, const Norm& n);
inline double norm_distance(const SetPtr& s, const Vec& x, const Norm& n) {
    return norm_distance(*s, x, n);
}

bool membership(const SetExpr& s, const Vec& x, double tol = 1e-9);
inline bool membership(const SetPtr& s, const Vec& x, double tol = 1e-9) {
    return membership(*s, x, tol);
}

struct GridSpec {
    double radius = 1.0;
    int points_per_axis = 15;
    int refinement_levels = 8;
};

struct BruteResult {
    double value = 0;      // estimated distance
    bool found = false;    // false: no member inside the grid ("unbounded-below estimate")
    long samples = 0;
};

// Independent grid oracle: min over samples of ||x - p|| over p in the grid
// with membership(s, p, cell diagonal). Within one cell diagonal of the true
// distance whenever the nearest point lies inside the grid radius.
BruteResult brute_distance(const SetExpr& s, const Vec& x, const GridSpec& g,
                           const Norm& n = Norm());
inline BruteResult brute_distance(const SetPtr& s, const Vec& x, const GridSpec& g,
                                  const Norm& n = Norm()) {
    return brute_distance(*s, x, g, n);
}

// ---------------------------------------------------------------------------

struct Scene {
    int dim = 0;
    std::vector<SetPtr> sets;
    Vec xbar;
    SetPtr intersection;  // optional exact intersection
    std::vector<std::string> labels;
    Norm norm;  // defaults to Euclidean; graph scenes carry block structure

    int m() const { return static_cast<int>(sets.size()); }
    double set_distance(int i, const Vec& x) const {
        return norm_distance(*sets[i], x, norm);
    }
    double max_distance(const Vec& x) const {
        double v = 0;
        for (const auto& s : sets) v = std::max(v, norm_distance(*s, x, norm));
        return v;
    }
};

// Throws input_error on violated invariants (xbar off a set, inconsistent
// declared intersection).
void validate_scene(const Scene& scene);

// Parse the JSON scene format; see README for the schema.
Scene parse_scene_text(const std::string& text);
Scene load_scene(const std::string& path);

// ---------------------------------------------------------------------------
// Nearest point of an implicitly given closed set {z : infeas(z) = 0}.
// Coarse grid scan around `center` (growing the radius up to radius_max when
// no member is found), then penalty descent plus feasibility restoration.
// Returned distances are measured from x under `norm` and come from feasible
// witnesses (infeas <= 1e-9), so they upper-bound the true distance up to the
// restoration tolerance.

struct NearestResult {
    bool found = false;
    double dist = 0;
    Vec point;
    long evals = 0;
};

// `descend`, when given, is an equivalent smooth(er) infeasibility measure
// (same zero set) used for the local descent; max-of-distances fields stall
// pattern search inside thin slivers, a sum of squares does not.
NearestResult constrained_nearest(const std::function<double(const Vec&)>& infeas,
                                  const Vec& x, const Vec& center, double radius,
                                  double radius_max, const Norm& norm, int ppa,
                                  const std::vector<Vec>& known_members = {},
                                  const std::function<double(const Vec&)>& descend = {});

}  // namespace setreg
