#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "setreg/geometry.hpp"

namespace setreg {

struct RhoSchedule {
    double rho_max = 0.5;
    double factor = 0.5;
    double rho_min = 1e-3;

    // Geometric sequence rho_max, rho_max*factor, ... with rho_min appended;
    // strictly decreasing.
    std::vector<double> values() const;
};

struct EstimatorParams {
    RhoSchedule rho_schedule;
    int perturbation_samples = 8;  // sphere directions per set
    GridSpec ball_samples{1.0, 13, 8};
    double bisection_tol = 1e-6;
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const;
};

enum class ModulusKind { theta, zeta, theta_hat, zeta_hat_slope };
std::string to_string(ModulusKind k);

enum class BiasDirection { upper_biased, lower_biased, point_estimate };
std::string to_string(BiasDirection d);

struct PerRhoEntry {
    double rho = 0;
    double ratio = 0;
    long samples = 0;
    long excluded = 0;
};

struct ModulusEstimate {
    ModulusKind kind = ModulusKind::theta;
    double value = 0;
    RhoSchedule rho_schedule;
    GridSpec grid;
    std::vector<PerRhoEntry> per_rho;
    BiasDirection direction = BiasDirection::upper_biased;
    std::vector<std::string> flags;
    std::optional<double> cross_check;  // metric-form estimate, where computed

    bool has_flag(const std::string& f) const;
};

// Finite-rho constant of the perturbation test: the largest r (capped at
// 10*rho) such that every sampled perturbation tuple with ||x_i|| = r leaves
// a common point of the translated sets inside B_rho(xbar). Upper-biased.
double theta_rho(const Scene& scene, double rho, const EstimatorParams& p);

// Largest r such that every sampled x in B_delta(xbar) with
// max_i d(x, Omega_i) <= r lies within rho (+tol) of the intersection.
// +inf when no sample violates. Upper-biased.
double zeta_rho_delta(const Scene& scene, double rho, double delta,
                      const EstimatorParams& p);

// Semiregularity modulus: min over the schedule of theta_rho/rho, with the
// metric-form cross-check attached.
ModulusEstimate theta(const Scene& scene, const EstimatorParams& p);

// Subregularity modulus: min over the schedule of the sampled ratio
// max_i d(x, Omega_i) / d(x, intersection), clamped to [0,1].
ModulusEstimate zeta(const Scene& scene, const EstimatorParams& p);

// Uniform-regularity modulus: like zeta but with perturbation tuples applied
// per set and the intersection translated accordingly; clamped to [0,1].
ModulusEstimate theta_hat(const Scene& scene, const EstimatorParams& p);

// Slope constant: min over samples (x, omega-hat) of the maximal local
// decrease rate of max_i ||x - omega_i|| under the rho-weighted product norm.
ModulusEstimate slope_zeta_hat(const Scene& scene, const EstimatorParams& p);

struct Classification {
    bool semiregular = false;
    bool subregular = false;
    bool uniformly_regular = false;
    double threshold = 0.05;
    ModulusEstimate theta, zeta, theta_hat;
};

Classification classify(const Scene& scene, const EstimatorParams& p,
                        double threshold = 0.05);

// ---------------------------------------------------------------------------
// Shared internals, exposed for the mapping estimators and tests.
namespace detail {

struct IntersectionDistance {
    bool found = false;   // false: no member inside the search region
    double dist = 0;
    Vec point;
};

// Distance from x to the intersection of the scene's sets translated by
// `offsets` (empty offsets = plain intersection). Uses the declared
// intersection when available and applicable, otherwise the constrained
// grid-plus-descent oracle. search_cap bounds the region explored around
// xbar before declaring the intersection empty.
IntersectionDistance translated_intersection_distance(const Scene& scene,
                                                      const std::vector<Vec>& offsets,
                                                      const Vec& x,
                                                      const EstimatorParams& p,
                                                      double radius,
                                                      double search_cap);

struct RatioScan {
    double ratio = 0;      // min polished ratio (2.0 when nothing qualified)
    long samples = 0;
    long excluded = 0;
    bool vacuous = false;  // every sample was inside the intersection
};

// One rho level of the zeta ratio field (also the zero-perturbation tuple of
// theta_hat).
RatioScan zeta_ratio_scan(const Scene& scene, double rho, const EstimatorParams& p);

// Perturbation tuples: m directions of unit scene-norm (or zeros), scaled by
// the caller. Contains all-equal, single-set, pairwise-opposed, slightly
// split pairs and a deterministic subset of independent combinations.
std::vector<std::vector<Vec>> perturbation_profiles(const Scene& scene,
                                                    const EstimatorParams& p,
                                                    bool independent_full = true);

}  // namespace detail

}  // namespace setreg
