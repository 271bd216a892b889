#include "setreg/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "setreg/numeric.hpp"

namespace setreg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> RhoSchedule::values() const {
    if (!(rho_min > 0) || !(factor > 0) || factor >= 1.0 || rho_max < rho_min)
        throw input_error("rho schedule: need rho_max >= rho_min > 0, factor in (0,1)");
    std::vector<double> v;
    for (double r = rho_max; r > rho_min * (1.0 + 1e-9); r *= factor) v.push_back(r);
    v.push_back(rho_min);
    return v;
}

void EstimatorParams::validate() const {
    rho_schedule.values();
    if (!(bisection_tol > 0) || bisection_tol >= rho_schedule.rho_min)
        throw input_error("params: bisection_tol must lie in (0, rho_min)");
    if (perturbation_samples < 2)
        throw input_error("params: perturbation_samples must be >= 2");
    if (ball_samples.points_per_axis < 3)
        throw input_error("params: points_per_axis must be >= 3");
    if (workers < 1) throw input_error("params: workers must be >= 1");
}

std::string to_string(ModulusKind k) {
    switch (k) {
        case ModulusKind::theta: return "theta";
        case ModulusKind::zeta: return "zeta";
        case ModulusKind::theta_hat: return "theta_hat";
        case ModulusKind::zeta_hat_slope: return "zeta_hat_slope";
    }
    return "?";
}

std::string to_string(BiasDirection d) {
    switch (d) {
        case BiasDirection::upper_biased: return "upper-biased";
        case BiasDirection::lower_biased: return "lower-biased";
        case BiasDirection::point_estimate: return "point-estimate";
    }
    return "?";
}

bool ModulusEstimate::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

// ---------------------------------------------------------------------------

namespace detail {

namespace {

// A unit vector orthogonal to d (d nonzero, dim >= 2).
Vec transverse_dir(const Vec& d) {
    const int dim = d.size();
    if (dim == 2) return Vec{-d[1], d[0]};
    int k = 0;
    for (int i = 1; i < dim; ++i)
        if (std::abs(d[i]) < std::abs(d[k])) k = i;
    Vec t(dim);
    t[k] = 1.0;
    t -= dot(t, d) * d;
    return normalized(t);
}

std::vector<Vec> jitter_starts(const Vec& center, double scale, std::uint64_t seed,
                               std::uint64_t tag, int count = 4) {
    auto rng = seeded_rng(seed, tag);
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i)
        out.push_back(center + scale * jitter_vec(center.size(), rng));
    return out;
}

std::uint64_t rho_tag(double rho) {
    return static_cast<std::uint64_t>(std::llround(rho * 1e12));
}

}  // namespace

std::vector<std::vector<Vec>> perturbation_profiles(const Scene& scene,
                                                    const EstimatorParams& p,
                                                    bool independent_full) {
    const int dim = scene.dim;
    const int m = scene.m();
    std::vector<Vec> dirs;
    for (const Vec& d : unit_directions(dim, p.perturbation_samples))
        dirs.push_back((1.0 / scene.norm(d)) * d);

    std::vector<std::vector<Vec>> profiles;
    std::set<std::vector<long long>> seen;
    auto add = [&](const std::vector<Vec>& prof) {
        std::vector<long long> key;
        for (const Vec& v : prof)
            for (int i = 0; i < dim; ++i)
                key.push_back(static_cast<long long>(std::llround(v[i] * 1e10)));
        if (seen.insert(key).second) profiles.push_back(prof);
    };

    for (const Vec& d : dirs) add(std::vector<Vec>(m, d));
    for (int i = 0; i < m; ++i)
        for (const Vec& d : dirs) {
            std::vector<Vec> prof(m, Vec::zeros(dim));
            prof[i] = d;
            add(prof);
        }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            for (const Vec& d : dirs) {
                std::vector<Vec> prof(m, Vec::zeros(dim));
                prof[i] = d;
                prof[j] = -d;
                add(prof);
            }
    if (dim >= 2) {
        const double kappa = 0.05;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                for (const Vec& d : dirs) {
                    Vec t = transverse_dir(d);
                    std::vector<Vec> prof(m, d);
                    Vec a = d + kappa * t, b = d - kappa * t;
                    prof[i] = (1.0 / scene.norm(a)) * a;
                    prof[j] = (1.0 / scene.norm(b)) * b;
                    add(prof);
                }
    }
    const int nd = static_cast<int>(dirs.size());
    if (m == 2 && independent_full) {
        for (int a = 0; a < nd; ++a)
            for (int b = 0; b < nd; ++b) add({dirs[a], dirs[b]});
    } else {
        int want = independent_full ? 64 : 16;
        for (int k = 0; k < want; ++k) {
            std::vector<Vec> prof;
            for (int i = 0; i < m; ++i) prof.push_back(dirs[(k * (2 * i + 1) + i + k / nd) % nd]);
            add(prof);
        }
    }
    return profiles;
}

IntersectionDistance translated_intersection_distance(const Scene& scene,
                                                      const std::vector<Vec>& offsets,
                                                      const Vec& x,
                                                      const EstimatorParams& p,
                                                      double radius,
                                                      double search_cap) {
    const Norm& N = scene.norm;
    bool all_equal = true;
    Vec e = offsets.empty() ? Vec::zeros(scene.dim) : offsets[0];
    for (const Vec& o : offsets)
        if (!(o == e)) all_equal = false;

    if (scene.intersection && all_equal) {
        // The common translation factors out of the intersection.
        IntersectionDistance out;
        out.found = true;
        out.dist = norm_distance(*scene.intersection, x + e, N);
        out.point = project(*scene.intersection, x + e) - e;
        return out;
    }

    auto infeas = [&](const Vec& z) {
        double v = 0;
        for (int i = 0; i < scene.m(); ++i) {
            const Vec& o = offsets.empty() ? e : offsets[i];
            v = std::max(v, norm_distance(*scene.sets[i], z + o, N));
        }
        return v;
    };
    auto descend = [&](const Vec& z) {
        double v = 0;
        for (int i = 0; i < scene.m(); ++i) {
            const Vec& o = offsets.empty() ? e : offsets[i];
            double d = norm_distance(*scene.sets[i], z + o, N);
            v += d * d;
        }
        return v;
    };
    std::vector<Vec> anchors;
    if (all_equal) anchors.push_back(scene.xbar - e);
    double r0 = std::max(radius, 2.0 * N.dist(x, scene.xbar) + 1e-9);
    NearestResult nr = constrained_nearest(infeas, x, scene.xbar, r0, search_cap, N,
                                           p.ball_samples.points_per_axis, anchors,
                                           descend);
    IntersectionDistance out;
    out.found = nr.found;
    out.dist = nr.dist;
    out.point = nr.point;
    return out;
}

RatioScan zeta_ratio_scan(const Scene& scene, double rho, const EstimatorParams& p) {
    const Norm& N = scene.norm;
    const int dim = scene.dim;
    const double tol = p.bisection_tol;
    const int ppa = p.ball_samples.points_per_axis;
    const bool exact = static_cast<bool>(scene.intersection);
    RatioScan out;

    std::vector<Vec> cloud;
    double cloud_floor = 0;
    if (!exact) {
        double r = 2.5 * rho;
        double cell = 2.0 * r / (ppa - 1);
        double tolm = cell * std::sqrt(static_cast<double>(dim));
        cloud_floor = 0.25 * cell;
        std::vector<int> idx(dim, 0);
        bool done = false;
        while (!done) {
            Vec q = scene.xbar;
            for (int i = 0; i < dim; ++i) q[i] += -r + cell * idx[i];
            if (scene.max_distance(q) <= tolm) cloud.push_back(q);
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < ppa) break;
                idx[i] = 0;
            }
            if (i == dim) done = true;
        }
        cloud.push_back(scene.xbar);
    }
    // Exclusion is exact: x belongs to the intersection iff every set
    // distance vanishes. The cloud only ranks candidates (its members carry
    // one-cell noise, hence the floor).
    auto field = [&](const Vec& z) -> double {
        double md = scene.max_distance(z);
        if (md <= tol) return 2.0;  // excluded marker; true ratios never exceed 1
        double b;
        if (exact) {
            b = norm_distance(*scene.intersection, z, N);
            if (b <= tol) return 2.0;
        } else {
            b = kInf;
            for (const Vec& q : cloud) b = std::min(b, N.dist(z, q));
            b = std::max(b, cloud_floor);
        }
        return md / b;
    };

    struct Cand {
        double val;
        Vec pt;
    };
    std::vector<Cand> cands;
    double cell = 2.0 * rho / (ppa - 1);
    std::vector<int> idx(dim, 0);
    bool done = false;
    while (!done) {
        Vec z = scene.xbar;
        for (int i = 0; i < dim; ++i) z[i] += -rho + cell * idx[i];
        z = N.clamp_to_ball(z, scene.xbar, rho);
        ++out.samples;
        double v = field(z);
        if (v >= 2.0) {
            ++out.excluded;
        } else {
            cands.push_back({v, z});
        }
        int i = 0;
        for (; i < dim; ++i) {
            if (++idx[i] < ppa) break;
            idx[i] = 0;
        }
        if (i == dim) done = true;
    }
    for (const Vec& z0 : jitter_starts(scene.xbar, 0.7 * rho, p.seed, rho_tag(rho))) {
        Vec z = N.clamp_to_ball(z0, scene.xbar, rho);
        ++out.samples;
        double v = field(z);
        if (v >= 2.0)
            ++out.excluded;
        else
            cands.push_back({v, z});
    }
    if (cands.empty()) {
        out.vacuous = true;
        out.ratio = 1.0;
        return out;
    }
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.val < b.val; });

    PatternOptions popt;
    popt.initial_step = cell;
    popt.min_step = 1e-12;
    popt.constrained = true;
    popt.center = scene.xbar;
    popt.radius = rho;
    popt.norm = N;

    double best = kInf;
    int starts = std::min<size_t>(3, cands.size());
    for (int k = 0; k < starts; ++k) {
        Vec arg;
        double v = pattern_min(field, cands[k].pt, popt, &arg);
        if (exact) {
            best = std::min(best, v);
            continue;
        }
        // Re-measure the denominator with the full oracle before reporting.
        IntersectionDistance id = translated_intersection_distance(
            scene, {}, arg, p, 2.5 * rho, std::max(4.0, 8.0 * rho));
        if (id.found && id.dist > tol)
            best = std::min(best, scene.max_distance(arg) / id.dist);
    }
    if (best == kInf) best = cands.front().val;
    out.ratio = best;
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// theta

namespace {

// Feasibility core of the theta_rho bisection: can the perturbed sets still
// meet inside B_rho(xbar)? The search descends on the sum of squared
// distances (the max form stalls pattern search in narrow slivers) and the
// verdict uses the max form.
bool tuple_feasible(const Scene& scene, const std::vector<Vec>& profile, double r,
                    double rho, const EstimatorParams& p,
                    const std::vector<Vec>& starts) {
    auto maxd = [&](const Vec& x) {
        double v = 0;
        for (int i = 0; i < scene.m(); ++i)
            v = std::max(v, norm_distance(*scene.sets[i], x + r * profile[i], scene.norm));
        return v;
    };
    if (maxd(scene.xbar) <= p.bisection_tol) return true;
    auto sumsq = [&](const Vec& x) {
        double v = 0;
        for (int i = 0; i < scene.m(); ++i) {
            double d = norm_distance(*scene.sets[i], x + r * profile[i], scene.norm);
            v += d * d;
        }
        return v;
    };
    ScanResult res = scan_min(sumsq, scene.xbar, rho, scene.norm,
                              p.ball_samples.points_per_axis, starts, 4);
    return maxd(res.argmin) <= p.bisection_tol;
}

}  // namespace

double theta_rho(const Scene& scene, double rho, const EstimatorParams& p) {
    p.validate();
    if (!(rho > 0)) throw input_error("theta_rho: rho must be > 0");
    const double r_max = 10.0 * rho;
    auto profiles = detail::perturbation_profiles(scene, p);
    std::vector<Vec> starts =
        detail::jitter_starts(scene.xbar, 0.7 * rho, p.seed, detail::rho_tag(rho));

    double cur = r_max;
    for (const auto& prof : profiles) {
        if (cur <= 1e-12) break;
        if (tuple_feasible(scene, prof, cur, rho, p, starts)) continue;
        double lo = 0, hi = cur;
        for (int it = 0; it < 60 && hi - lo > std::max(1e-12, 1e-4 * rho); ++it) {
            double mid = 0.5 * (lo + hi);
            if (tuple_feasible(scene, prof, mid, rho, p, starts))
                lo = mid;
            else
                hi = mid;
        }
        cur = lo;
    }
    return cur;
}

ModulusEstimate theta(const Scene& scene, const EstimatorParams& p) {
    p.validate();
    ModulusEstimate est;
    est.kind = ModulusKind::theta;
    est.rho_schedule = p.rho_schedule;
    est.grid = p.ball_samples;
    est.direction = BiasDirection::upper_biased;
    std::vector<double> rhos = p.rho_schedule.values();
    est.per_rho.resize(rhos.size());
    parallel_for(static_cast<int>(rhos.size()), p.workers, [&](int i) {
        double rho = rhos[i];
        double tr = theta_rho(scene, rho, p);
        est.per_rho[i] = {rho, tr / rho, 0, 0};
    });
    double value = kInf;
    bool capped = false;
    for (auto& e : est.per_rho) {
        value = std::min(value, e.ratio);
        if (e.ratio >= 10.0 - 1e-6) capped = true;
    }
    est.value = value;
    if (capped) est.flags.push_back("capped-at-10rho");

    // Metric-form cross-check: max ||x_i|| / d(xbar, translated intersection).
    auto profiles = detail::perturbation_profiles(scene, p, false);
    std::vector<double> cross_per_rho(rhos.size(), kInf);
    parallel_for(static_cast<int>(rhos.size()), p.workers, [&](int i) {
        double rho = rhos[i];
        double best = kInf;
        for (const auto& prof : profiles) {
            std::vector<Vec> offsets;
            for (const Vec& d : prof) offsets.push_back(rho * d);
            auto id = detail::translated_intersection_distance(
                scene, offsets, scene.xbar, p, 3.0 * rho, std::max(4.0, 8.0 * rho));
            if (!id.found) {
                best = 0.0;  // empty translated intersection: ratio vanishes
                break;
            }
            if (id.dist > p.bisection_tol) best = std::min(best, rho / id.dist);
        }
        cross_per_rho[i] = best;
    });
    double cross = kInf;
    for (double c : cross_per_rho) cross = std::min(cross, c);
    if (cross < kInf) {
        est.cross_check = cross;
        double scale = std::max({est.value, cross, 0.05});
        if (std::abs(cross - est.value) > 0.2 * scale)
            est.flags.push_back("metric-form-disagreement");
    }
    return est;
}

// ---------------------------------------------------------------------------
// zeta

double zeta_rho_delta(const Scene& scene, double rho, double delta,
                      const EstimatorParams& p) {
    p.validate();
    if (!(rho > 0 && rho < delta))
        throw input_error("zeta_rho_delta: need 0 < rho < delta");
    const Norm& N = scene.norm;
    const int dim = scene.dim;
    const int ppa = p.ball_samples.points_per_axis;
    const double tol = p.bisection_tol;
    const bool exact = static_cast<bool>(scene.intersection);

    std::vector<Vec> cloud;
    if (!exact) {
        double r = 2.0 * delta;
        double cell = 2.0 * r / (ppa - 1);
        double tolm = cell * std::sqrt(static_cast<double>(dim));
        std::vector<int> idx(dim, 0);
        bool done = false;
        while (!done) {
            Vec q = scene.xbar;
            for (int i = 0; i < dim; ++i) q[i] += -r + cell * idx[i];
            if (scene.max_distance(q) <= tolm) cloud.push_back(q);
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < ppa) break;
                idx[i] = 0;
            }
            if (i == dim) done = true;
        }
        cloud.push_back(scene.xbar);
    }
    auto din_coarse = [&](const Vec& z) -> double {
        if (exact) return norm_distance(*scene.intersection, z, N);
        double best = kInf;
        for (const Vec& q : cloud) best = std::min(best, N.dist(z, q));
        return best;
    };

    struct Violator {
        double a;
        Vec pt;
    };
    std::vector<Violator> violators;
    double cell = 2.0 * delta / (ppa - 1);
    std::vector<int> idx(dim, 0);
    bool done = false;
    while (!done) {
        Vec z = scene.xbar;
        for (int i = 0; i < dim; ++i) z[i] += -delta + cell * idx[i];
        z = N.clamp_to_ball(z, scene.xbar, delta);
        if (din_coarse(z) > rho + tol) violators.push_back({scene.max_distance(z), z});
        int i = 0;
        for (; i < dim; ++i) {
            if (++idx[i] < ppa) break;
            idx[i] = 0;
        }
        if (i == dim) done = true;
    }
    for (const Vec& z0 :
         detail::jitter_starts(scene.xbar, 0.7 * delta, p.seed, detail::rho_tag(delta))) {
        Vec z = N.clamp_to_ball(z0, scene.xbar, delta);
        if (din_coarse(z) > rho + tol) violators.push_back({scene.max_distance(z), z});
    }
    if (violators.empty()) return kInf;
    std::sort(violators.begin(), violators.end(),
              [](const Violator& a, const Violator& b) { return a.a < b.a; });
    if (exact) return violators.front().a;
    // Confirm the smallest violators against the full oracle.
    int checked = 0;
    for (const auto& v : violators) {
        if (++checked > 8) break;
        auto id = detail::translated_intersection_distance(scene, {}, v.pt, p, 2.0 * delta,
                                                           std::max(4.0, 8.0 * delta));
        if (!id.found || id.dist > rho + tol) return v.a;
    }
    return violators.front().a;
}

ModulusEstimate zeta(const Scene& scene, const EstimatorParams& p) {
    p.validate();
    ModulusEstimate est;
    est.kind = ModulusKind::zeta;
    est.rho_schedule = p.rho_schedule;
    est.grid = p.ball_samples;
    est.direction = BiasDirection::upper_biased;
    std::vector<double> rhos = p.rho_schedule.values();
    est.per_rho.resize(rhos.size());
    std::vector<detail::RatioScan> scans(rhos.size());
    parallel_for(static_cast<int>(rhos.size()), p.workers, [&](int i) {
        scans[i] = detail::zeta_ratio_scan(scene, rhos[i], p);
        est.per_rho[i] = {rhos[i], scans[i].ratio, scans[i].samples, scans[i].excluded};
    });
    double value = kInf;
    bool all_vacuous = true;
    for (size_t i = 0; i < scans.size(); ++i) {
        value = std::min(value, scans[i].ratio);
        if (!scans[i].vacuous) all_vacuous = false;
    }
    if (all_vacuous) {
        est.value = 1.0;
        est.flags.push_back("vacuous-near-xbar");
        return est;
    }
    if (value > 1.0) {
        value = 1.0;
        est.flags.push_back("clamped");
    }
    est.value = std::max(value, 0.0);
    return est;
}

// ---------------------------------------------------------------------------
// theta_hat

ModulusEstimate theta_hat(const Scene& scene, const EstimatorParams& p) {
    p.validate();
    const Norm& N = scene.norm;
    const int dim = scene.dim;
    ModulusEstimate est;
    est.kind = ModulusKind::theta_hat;
    est.rho_schedule = p.rho_schedule;
    est.grid = p.ball_samples;
    est.direction = BiasDirection::upper_biased;

    auto profiles = detail::perturbation_profiles(scene, p, false);
    const std::vector<double> ladder = {1.0, 0.25, 0.0625, 0.015625};
    std::vector<double> rhos = p.rho_schedule.values();
    est.per_rho.resize(rhos.size());
    std::vector<long> empty_counts(rhos.size(), 0);
    std::vector<bool> vac(rhos.size(), false);

    const int ppa = std::max(9, p.ball_samples.points_per_axis - 4);

    parallel_for(static_cast<int>(rhos.size()), p.workers, [&](int ri) {
        const double rho = rhos[ri];
        const double tol = p.bisection_tol;
        long samples = 0, excluded = 0, empties = 0;

        detail::RatioScan zero = detail::zeta_ratio_scan(scene, rho, p);
        double best = zero.vacuous ? kInf : zero.ratio;
        samples += zero.samples;
        excluded += zero.excluded;

        // x-grid over B_rho(xbar), reused for all tuples.
        std::vector<Vec> xs;
        {
            double cell = 2.0 * rho / (ppa - 1);
            std::vector<int> idx(dim, 0);
            bool done = false;
            while (!done) {
                Vec z = scene.xbar;
                for (int i = 0; i < dim; ++i) z[i] += -rho + cell * idx[i];
                xs.push_back(N.clamp_to_ball(z, scene.xbar, rho));
                int i = 0;
                for (; i < dim; ++i) {
                    if (++idx[i] < ppa) break;
                    idx[i] = 0;
                }
                if (i == dim) done = true;
            }
            for (const Vec& z : detail::jitter_starts(scene.xbar, 0.7 * rho, p.seed,
                                                      detail::rho_tag(rho) ^ 0x7ea))
                xs.push_back(N.clamp_to_ball(z, scene.xbar, rho));
            xs.push_back(scene.xbar);
        }

        const double r_cap = std::max(4.0, 8.0 * rho);
        for (const auto& prof : profiles) {
            for (double lad : ladder) {
                const double s = lad * rho;
                std::vector<Vec> offsets;
                for (const Vec& d : prof) offsets.push_back(s * d);
                auto num = [&](const Vec& z) {
                    double v = 0;
                    for (int i = 0; i < scene.m(); ++i)
                        v = std::max(v, norm_distance(*scene.sets[i], z + offsets[i], N));
                    return v;
                };
                // Member cloud of the translated intersection, growing the
                // radius until something is found or the cap is reached.
                std::vector<Vec> cloud;
                double r = 2.5 * rho;
                double cloud_floor = 0;
                while (true) {
                    double cell = 2.0 * r / (ppa - 1);
                    double tolm = cell * std::sqrt(static_cast<double>(dim));
                    cloud_floor = 0.25 * cell;
                    std::vector<int> idx(dim, 0);
                    bool done = false;
                    while (!done) {
                        Vec q = scene.xbar;
                        for (int i = 0; i < dim; ++i) q[i] += -r + cell * idx[i];
                        if (num(q) <= tolm) cloud.push_back(q);
                        int i = 0;
                        for (; i < dim; ++i) {
                            if (++idx[i] < ppa) break;
                            idx[i] = 0;
                        }
                        if (i == dim) done = true;
                    }
                    if (!cloud.empty() || r >= r_cap) break;
                    r *= 2.0;
                }
                if (cloud.empty()) {
                    // Empty within the cap: the denominator is at least
                    // r_cap - rho for every sampled x, so bound the ratio.
                    ++empties;
                    double num_min = kInf;
                    for (const Vec& z : xs) num_min = std::min(num_min, num(z));
                    best = std::min(best, num_min / (r_cap - rho));
                    samples += static_cast<long>(xs.size());
                    continue;
                }
                // Coarse ratios against the cloud; keep the best candidates.
                double c1 = kInf, c2 = kInf;
                Vec p1, p2;
                for (const Vec& z : xs) {
                    ++samples;
                    double b = kInf;
                    for (const Vec& q : cloud) b = std::min(b, N.dist(z, q));
                    if (b <= tol) {
                        ++excluded;
                        continue;
                    }
                    double v = num(z) / b;
                    if (v < c1) {
                        c2 = c1;
                        p2 = p1;
                        c1 = v;
                        p1 = z;
                    } else if (v < c2) {
                        c2 = v;
                        p2 = z;
                    }
                }
                for (int k = 0; k < 2; ++k) {
                    double cv = (k == 0) ? c1 : c2;
                    const Vec& cp = (k == 0) ? p1 : p2;
                    if (cv == kInf) break;
                    if (cv > std::min(2.0 * best, best + 0.5)) continue;
                    auto id = detail::translated_intersection_distance(
                        scene, offsets, cp, p, 2.5 * rho, r_cap);
                    if (!id.found) {
                        double nv = num(cp);
                        best = std::min(best, nv / (r_cap - rho));
                    } else if (id.dist > tol) {
                        best = std::min(best, num(cp) / id.dist);
                    }
                }
            }
        }
        if (best == kInf) {
            vac[ri] = true;
            best = 1.0;
        }
        est.per_rho[ri] = {rho, best, samples, excluded};
        empty_counts[ri] = empties;
    });

    double value = kInf;
    long empties = 0;
    bool all_vac = true;
    for (size_t i = 0; i < rhos.size(); ++i) {
        value = std::min(value, est.per_rho[i].ratio);
        empties += empty_counts[i];
        if (!vac[i]) all_vac = false;
    }
    if (all_vac) {
        est.value = 1.0;
        est.flags.push_back("vacuous-near-xbar");
        return est;
    }
    if (value > 1.0) {
        value = 1.0;
        est.flags.push_back("clamped");
    }
    est.value = std::max(value, 0.0);
    if (empties > 0)
        est.flags.push_back("empty-translated-intersections:" + std::to_string(empties));
    return est;
}

// ---------------------------------------------------------------------------
// slope zeta-hat

ModulusEstimate slope_zeta_hat(const Scene& scene, const EstimatorParams& p) {
    p.validate();
    const Norm& N = scene.norm;
    const int dim = scene.dim;
    const int m = scene.m();
    ModulusEstimate est;
    est.kind = ModulusKind::zeta_hat_slope;
    est.rho_schedule = p.rho_schedule;
    est.grid = p.ball_samples;
    est.direction = BiasDirection::point_estimate;

    std::vector<double> rhos = p.rho_schedule.values();
    est.per_rho.resize(rhos.size());
    std::vector<bool> vac(rhos.size(), false);

    parallel_for(static_cast<int>(rhos.size()), p.workers, [&](int ri) {
        const double rho = rhos[ri];
        long samples = 0, excluded = 0;

        // Sample points: a coarse grid plus midpoints between boundary points
        // of different sets (these witness thin slivers between the sets).
        std::vector<Vec> xs;
        const int ppa = 9;
        double cell = 2.0 * rho / (ppa - 1);
        std::vector<int> idx(dim, 0);
        bool done = false;
        while (!done) {
            Vec z = scene.xbar;
            for (int i = 0; i < dim; ++i) z[i] += -rho + cell * idx[i];
            xs.push_back(N.clamp_to_ball(z, scene.xbar, rho));
            int i = 0;
            for (; i < dim; ++i) {
                if (++idx[i] < ppa) break;
                idx[i] = 0;
            }
            if (i == dim) done = true;
        }
        std::vector<Vec> ring;
        for (double scale : {1.0, 0.25, 0.0625}) {
            for (const Vec& d : unit_directions(dim, 8)) {
                Vec q = scene.xbar + (scale * rho / N(d)) * d;
                ring.push_back(q);
                xs.push_back(q);
            }
        }
        for (const Vec& q : ring) {
            for (int i = 0; i < m; ++i) {
                Vec w = project(*scene.sets[i], q);
                for (int j = 0; j < m; ++j) {
                    if (j == i) continue;
                    Vec mid = 0.5 * (w + project(*scene.sets[j], w));
                    xs.push_back(N.clamp_to_ball(mid, scene.xbar, rho));
                }
            }
        }
        for (const Vec& z : detail::jitter_starts(scene.xbar, 0.7 * rho, p.seed,
                                                  detail::rho_tag(rho) ^ 0x51a))
            xs.push_back(N.clamp_to_ball(z, scene.xbar, rho));

        double best = kInf;
        for (const Vec& x : xs) {
            ++samples;
            std::vector<Vec> omega(m);
            double phi0 = 0;
            for (int i = 0; i < m; ++i) {
                omega[i] = project(*scene.sets[i], x);
                phi0 = std::max(phi0, N.dist(x, omega[i]));
            }
            if (!(phi0 > 1e-12) || !(phi0 < rho)) {
                ++excluded;
                continue;
            }
            // Candidate step directions: compass, toward xbar, toward each
            // omega_i.
            std::vector<Vec> dirs = unit_directions(dim, 8);
            if (N.dist(x, scene.xbar) > 1e-12)
                dirs.push_back(normalized(scene.xbar - x));
            for (int i = 0; i < m; ++i)
                if (dist2(x, omega[i]) > 1e-12) dirs.push_back(normalized(omega[i] - x));

            double slope = 0;
            for (const Vec& d : dirs) {
                for (double hf : {1e-2, 1e-3, 1e-4}) {
                    double h = hf * rho;
                    Vec u = x + h * d;
                    // (a) move the point only
                    double phi_a = 0;
                    for (int i = 0; i < m; ++i)
                        phi_a = std::max(phi_a, N.dist(u, omega[i]));
                    double den_a = N.dist(u, x);
                    if (den_a > 0)
                        slope = std::max(slope, positive_part(phi0 - phi_a) / den_a);
                    // (b) move the point and re-project the set points
                    double phi_b = 0, vmove = 0;
                    for (int i = 0; i < m; ++i) {
                        Vec vi = project(*scene.sets[i], u);
                        phi_b = std::max(phi_b, N.dist(u, vi));
                        vmove = std::max(vmove, N.dist(vi, omega[i]));
                    }
                    double den_b = std::max(N.dist(u, x), rho * vmove);
                    if (den_b > 0)
                        slope = std::max(slope, positive_part(phi0 - phi_b) / den_b);
                    // (c) slide the set points only
                    double phi_c = 0, vmove_c = 0;
                    for (int i = 0; i < m; ++i) {
                        Vec vi = project(*scene.sets[i], omega[i] + h * d);
                        phi_c = std::max(phi_c, N.dist(x, vi));
                        vmove_c = std::max(vmove_c, N.dist(vi, omega[i]));
                    }
                    if (vmove_c > 0)
                        slope = std::max(slope,
                                         positive_part(phi0 - phi_c) / (rho * vmove_c));
                }
            }
            best = std::min(best, slope);
        }
        if (best == kInf) {
            vac[ri] = true;
            best = 1.0;
        }
        est.per_rho[ri] = {rho, best, samples, excluded};
    });

    double value = kInf;
    bool all_vac = true;
    for (size_t i = 0; i < rhos.size(); ++i) {
        value = std::min(value, est.per_rho[i].ratio);
        if (!vac[i]) all_vac = false;
    }
    if (all_vac) {
        est.value = 1.0;
        est.flags.push_back("no-valid-samples");
        return est;
    }
    est.value = value;
    return est;
}

Classification classify(const Scene& scene, const EstimatorParams& p, double threshold) {
    if (!(threshold > 0)) throw input_error("classify: threshold must be > 0");
    Classification c;
    c.threshold = threshold;
    c.theta = theta(scene, p);
    c.zeta = zeta(scene, p);
    c.theta_hat = theta_hat(scene, p);
    c.semiregular = c.theta.value > threshold;
    c.subregular = c.zeta.value > threshold;
    c.uniformly_regular = c.theta_hat.value > threshold;
    return c;
}

}  // namespace setreg
