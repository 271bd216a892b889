#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

#include "setreg/norm.hpp"
#include "setreg/vec.hpp"

namespace setreg {

// ---------------------------------------------------------------------------
// 1D minimization

// Golden-section search on [lo, hi]; exact (to tolerance) for unimodal f.
template <typename F>
double golden_min(F&& f, double lo, double hi, double* argmin = nullptr,
                  int iters = 120) {
    constexpr double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int k = 0; k < iters && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++k) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    double xm = 0.5 * (a + b), fm = f(xm);
    if (f1 < fm) { fm = f1; xm = x1; }
    if (f2 < fm) { fm = f2; xm = x2; }
    if (argmin) *argmin = xm;
    return fm;
}

// Real roots of a*x^3 + b*x^2 + c*x + d = 0 (a != 0), Newton-polished.
std::vector<double> cubic_real_roots(double a, double b, double c, double d);

// ---------------------------------------------------------------------------
// Pattern (compass) search

struct PatternOptions {
    double initial_step = 0.1;
    double min_step = 1e-11;
    int max_iters = 4000;
    // Optional ball constraint: candidate points are clamped into
    // B_radius(center) under `norm`.
    bool constrained = false;
    Vec center;
    double radius = 0;
    Norm norm;
};

// Derivative-free local minimization of f from `start`. Moves along +-axes
// plus all sign-pattern diagonals (dim <= 3), halving the step on failure.
// Deterministic; returns the best value and writes the argmin.
double pattern_min(const std::function<double(const Vec&)>& f, const Vec& start,
                   const PatternOptions& opt, Vec* argmin);

// Grid scan + multistart pattern refinement over a norm ball B_radius(center).
// `extra_starts` are always evaluated and used as refinement seeds.
struct ScanResult {
    double value = 0;
    Vec argmin;
    long evals = 0;
};
ScanResult scan_min(const std::function<double(const Vec&)>& f, const Vec& center,
                    double radius, const Norm& norm, int points_per_axis,
                    const std::vector<Vec>& extra_starts, int refine_starts = 4,
                    double min_step = 1e-11);

// ---------------------------------------------------------------------------
// Small nonnegative least squares: min ||A w - y|| s.t. w >= 0.
// Lawson-Hanson active set; A is column-major list of generator columns.
std::vector<double> nnls(const std::vector<Vec>& columns, const Vec& y);

// Solve the square system M x = y by Gaussian elimination (tiny dims).
// Returns false if singular.
bool solve_linear(std::vector<std::vector<double>> M, std::vector<double> y,
                  std::vector<double>& out);

// ---------------------------------------------------------------------------
// Direction sets

// Deterministic unit directions in R^dim: +-axes, normalized sign-pattern
// corners, and (in 2D) equally spaced angles. `count` is a target, the result
// may have a few more.
std::vector<Vec> unit_directions(int dim, int count);

// Seeded uniform jitter in [-1,1]^dim.
Vec jitter_vec(int dim, std::mt19937_64& rng);

// Derive an independent deterministic stream from (seed, tag).
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint64_t>(0x9e3779b97f4a7c15ull), seed, tag};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Deterministic parallel map: results[i] = fn(i). Thread count does not
// affect results (each index writes its own slot; reductions happen on the
// caller side in index order).
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

inline double positive_part(double x) { return x > 0 ? x : 0.0; }

inline double round_sig(double x, int digits = 12) {
    if (x == 0 || !std::isfinite(x)) return x;
    double mag = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
    return std::round(x * mag) / mag;
}

}  // namespace setreg
