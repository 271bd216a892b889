#include "setreg/numeric.hpp"

#include <cassert>

namespace setreg {

std::vector<double> cubic_real_roots(double a, double b, double c, double d) {
    assert(a != 0);
    // Depressed form t^3 + p t + q with x = t - b/(3a).
    double B = b / a, C = c / a, D = d / a;
    double p = C - B * B / 3.0;
    double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;
    double shift = -B / 3.0;
    std::vector<double> roots;
    double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0) {
        double s = std::sqrt(disc);
        double u = std::cbrt(-q / 2.0 + s);
        double v = std::cbrt(-q / 2.0 - s);
        roots.push_back(u + v + shift);
    } else if (disc == 0) {
        if (q == 0 && p == 0) {
            roots.push_back(shift);
        } else {
            double u = std::cbrt(-q / 2.0);
            roots.push_back(2 * u + shift);
            roots.push_back(-u + shift);
        }
    } else {
        double r = std::sqrt(-p * p * p / 27.0);
        double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
        double m = 2.0 * std::sqrt(-p / 3.0);
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos((phi + 2.0 * M_PI * k) / 3.0) + shift);
    }
    // Newton polish.
    for (double& x : roots) {
        for (int it = 0; it < 8; ++it) {
            double f = ((a * x + b) * x + c) * x + d;
            double fp = (3 * a * x + 2 * b) * x + c;
            if (fp == 0) break;
            double step = f / fp;
            x -= step;
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) break;
        }
    }
    return roots;
}

namespace {

std::vector<Vec> move_directions(int dim) {
    std::vector<Vec> dirs;
    if (dim <= 3) {
        // All sign patterns.
        int total = 1;
        for (int i = 0; i < dim; ++i) total *= 3;
        for (int code = 0; code < total; ++code) {
            Vec d(dim);
            int c = code;
            bool zero = true;
            for (int i = 0; i < dim; ++i) {
                int s = c % 3;
                c /= 3;
                d[i] = (s == 0) ? 0.0 : (s == 1 ? 1.0 : -1.0);
                if (s != 0) zero = false;
            }
            if (!zero) dirs.push_back(normalized(d));
        }
    } else {
        for (int i = 0; i < dim; ++i) {
            Vec d(dim);
            d[i] = 1;
            dirs.push_back(d);
            d[i] = -1;
            dirs.push_back(d);
        }
        Vec diag(dim), adiag(dim);
        for (int i = 0; i < dim; ++i) {
            diag[i] = 1;
            adiag[i] = (i % 2 == 0) ? 1 : -1;
        }
        dirs.push_back(normalized(diag));
        dirs.push_back(-normalized(diag));
        dirs.push_back(normalized(adiag));
        dirs.push_back(-normalized(adiag));
    }
    return dirs;
}

}  // namespace

double pattern_min(const std::function<double(const Vec&)>& f, const Vec& start,
                   const PatternOptions& opt, Vec* argmin) {
    const int dim = start.size();
    std::vector<Vec> dirs = move_directions(dim);
    Vec x = start;
    if (opt.constrained) x = opt.norm.clamp_to_ball(x, opt.center, opt.radius);
    double fx = f(x);
    double step = opt.initial_step;
    int iters = 0;
    while (step > opt.min_step && iters < opt.max_iters) {
        bool improved = false;
        for (const Vec& d : dirs) {
            Vec y = x + step * d;
            if (opt.constrained) y = opt.norm.clamp_to_ball(y, opt.center, opt.radius);
            double fy = f(y);
            ++iters;
            if (fy < fx - 1e-300) {
                x = y;
                fx = fy;
                improved = true;
                break;
            }
        }
        if (!improved) step *= 0.5;
    }
    if (argmin) *argmin = x;
    return fx;
}

ScanResult scan_min(const std::function<double(const Vec&)>& f, const Vec& center,
                    double radius, const Norm& norm, int points_per_axis,
                    const std::vector<Vec>& extra_starts, int refine_starts,
                    double min_step) {
    const int dim = center.size();
    struct Cand {
        double val;
        Vec pt;
    };
    std::vector<Cand> cands;
    long evals = 0;

    auto consider = [&](const Vec& p) {
        double v = f(p);
        ++evals;
        cands.push_back({v, p});
    };

    consider(center);
    for (const Vec& s : extra_starts)
        consider(norm.clamp_to_ball(s, center, radius));

    // Regular grid over the bounding box, filtered to the ball.
    int ppa = std::max(points_per_axis, 2);
    long total = 1;
    for (int i = 0; i < dim; ++i) {
        total *= ppa;
        if (total > 4000000) break;
    }
    std::vector<int> idx(dim, 0);
    bool done = false;
    while (!done) {
        Vec p = center;
        for (int i = 0; i < dim; ++i)
            p[i] += -radius + 2.0 * radius * idx[i] / (ppa - 1);
        Vec q = norm.clamp_to_ball(p, center, radius);
        consider(q);
        int i = 0;
        for (; i < dim; ++i) {
            if (++idx[i] < ppa) break;
            idx[i] = 0;
        }
        if (i == dim) done = true;
    }

    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.val < b.val; });

    double cell = 2.0 * radius / (ppa - 1);
    ScanResult best;
    best.value = cands.front().val;
    best.argmin = cands.front().pt;

    PatternOptions popt;
    popt.initial_step = cell;
    popt.min_step = min_step;
    popt.constrained = true;
    popt.center = center;
    popt.radius = radius;
    popt.norm = norm;
    int nref = std::min<int>(refine_starts, static_cast<int>(cands.size()));
    for (int k = 0; k < nref; ++k) {
        Vec arg;
        double v = pattern_min(f, cands[k].pt, popt, &arg);
        if (v < best.value) {
            best.value = v;
            best.argmin = arg;
        }
    }
    best.evals = evals;
    return best;
}

std::vector<double> nnls(const std::vector<Vec>& columns, const Vec& y) {
    const int n = static_cast<int>(columns.size());
    std::vector<double> w(n, 0.0);
    std::vector<bool> active(n, false);
    Vec resid = y;

    auto recompute = [&](const std::vector<int>& P, std::vector<double>& z) -> bool {
        // Least squares on the passive set via normal equations.
        int k = static_cast<int>(P.size());
        std::vector<std::vector<double>> M(k, std::vector<double>(k, 0.0));
        std::vector<double> rhs(k, 0.0);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) M[i][j] = dot(columns[P[i]], columns[P[j]]);
            rhs[i] = dot(columns[P[i]], y);
            M[i][i] += 1e-12;
        }
        return solve_linear(M, rhs, z);
    };

    std::vector<int> P;
    for (int outer = 0; outer < 6 * n + 12; ++outer) {
        // Most-violated KKT multiplier.
        int best = -1;
        double bestg = 1e-10;
        for (int j = 0; j < n; ++j) {
            if (active[j]) continue;
            double g = dot(columns[j], resid);
            if (g > bestg) {
                bestg = g;
                best = j;
            }
        }
        if (best < 0) break;
        active[best] = true;
        P.push_back(best);
        std::vector<double> z;
        if (!recompute(P, z)) {
            active[best] = false;
            P.pop_back();
            break;
        }
        // Inner loop: keep the passive solution nonnegative.
        for (int inner = 0; inner < 4 * n + 8; ++inner) {
            bool neg = false;
            double alpha = 1.0;
            for (size_t i = 0; i < P.size(); ++i) {
                if (z[i] <= 0) {
                    double wi = w[P[i]];
                    double a = wi / (wi - z[i] + 1e-300);
                    alpha = std::min(alpha, a);
                    neg = true;
                }
            }
            if (!neg) break;
            for (size_t i = 0; i < P.size(); ++i)
                w[P[i]] += alpha * (z[i] - w[P[i]]);
            std::vector<int> keep;
            for (int j : P) {
                if (w[j] <= 1e-12) {
                    active[j] = false;
                    w[j] = 0;
                } else {
                    keep.push_back(j);
                }
            }
            P = keep;
            if (P.empty()) break;
            if (!recompute(P, z)) break;
        }
        for (size_t i = 0; i < P.size(); ++i) w[P[i]] = std::max(0.0, z[i]);
        // Residual update.
        resid = y;
        for (int j = 0; j < n; ++j)
            if (w[j] > 0) resid -= w[j] * columns[j];
    }
    return w;
}

bool solve_linear(std::vector<std::vector<double>> M, std::vector<double> y,
                  std::vector<double>& out) {
    const int n = static_cast<int>(y.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        if (std::abs(M[piv][col]) < 1e-14) return false;
        std::swap(M[piv], M[col]);
        std::swap(y[piv], y[col]);
        for (int r = col + 1; r < n; ++r) {
            double t = M[r][col] / M[col][col];
            for (int c = col; c < n; ++c) M[r][c] -= t * M[col][c];
            y[r] -= t * y[col];
        }
    }
    out.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = y[r];
        for (int c = r + 1; c < n; ++c) s -= M[r][c] * out[c];
        out[r] = s / M[r][r];
    }
    return true;
}

std::vector<Vec> unit_directions(int dim, int count) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back(Vec{1.0});
        dirs.push_back(Vec{-1.0});
        return dirs;
    }
    if (dim == 2) {
        int k = std::max(count, 4);
        k = ((k + 3) / 4) * 4;  // keep the axes in the set
        for (int i = 0; i < k; ++i) {
            double a = 2.0 * M_PI * i / k;
            dirs.push_back(Vec{std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    for (int i = 0; i < dim; ++i) {
        Vec d(dim);
        d[i] = 1;
        dirs.push_back(d);
        d[i] = -1;
        dirs.push_back(d);
    }
    int total = 1 << dim;
    for (int code = 0; code < total && static_cast<int>(dirs.size()) < count + 2 * dim; ++code) {
        Vec d(dim);
        for (int i = 0; i < dim; ++i) d[i] = (code >> i) & 1 ? 1.0 : -1.0;
        dirs.push_back(normalized(d));
    }
    return dirs;
}

Vec jitter_vec(int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = u(rng);
    return v;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace setreg
