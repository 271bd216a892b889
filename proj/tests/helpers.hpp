#pragma once

#include <random>
#include <string>

#include "setreg/geometry.hpp"
#include "setreg/moduli.hpp"

namespace testutil {

using namespace setreg;

inline std::string data_dir() {
#ifdef SETREG_DATA_DIR
    return SETREG_DATA_DIR;
#else
    return "data";
#endif
}

inline std::string scene_path(const std::string& name) {
    return data_dir() + "/scenes/" + name + ".json";
}

// Example scenes, constructed directly (the JSON files are exercised by the
// parser tests and the CLI).

// Two copies of the horizontal axis in R^2.
inline Scene scene_two_axis_copies() {
    Scene s;
    s.dim = 2;
    SetPtr line = make_affine(Vec{0, 0}, {Vec{1, 0}});
    s.sets = {line, line};
    s.xbar = Vec{0, 0};
    s.intersection = line;
    s.norm = Norm::euclidean(2);
    validate_scene(s);
    return s;
}

// Omega_1 = {u<=0 or v>=u^2}, Omega_2 = {u<=0 or v<=0}.
inline Scene scene_parabola_vs_lower() {
    Scene s;
    s.dim = 2;
    SetPtr left = make_halfspace(Vec{1, 0}, 0);
    s.sets = {make_union({left, make_parabola_epi(1.0)}),
              make_union({left, make_halfspace(Vec{0, 1}, 0)})};
    s.xbar = Vec{0, 0};
    s.intersection = left;
    s.norm = Norm::euclidean(2);
    validate_scene(s);
    return s;
}

// Two copies of {u<=0 or v=0}.
inline Scene scene_halfplane_line_copies() {
    Scene s;
    s.dim = 2;
    SetPtr omega = make_union({make_halfspace(Vec{1, 0}, 0),
                               make_affine(Vec{0, 0}, {Vec{1, 0}})});
    s.sets = {omega, omega};
    s.xbar = Vec{0, 0};
    s.intersection = omega;
    s.norm = Norm::euclidean(2);
    validate_scene(s);
    return s;
}

// Omega_1 = R^2, Omega_2 = {u - sqrt(3) v >= 0 or u + sqrt(3) v >= 0}.
inline Scene scene_plane_vs_double_wedge() {
    Scene s;
    s.dim = 2;
    const double r3 = std::sqrt(3.0);
    SetPtr wedge = make_union({make_halfspace(Vec{-1, r3}, 0),
                               make_halfspace(Vec{-1, -r3}, 0)});
    double inf = std::numeric_limits<double>::infinity();
    s.sets = {make_box(Vec{-inf, -inf}, Vec{inf, inf}), wedge};
    s.xbar = Vec{0, 0};
    s.intersection = wedge;
    s.norm = Norm::euclidean(2);
    validate_scene(s);
    return s;
}

// Horizontal and vertical axes.
inline Scene scene_orthogonal_lines() {
    Scene s;
    s.dim = 2;
    s.sets = {make_affine(Vec{0, 0}, {Vec{1, 0}}),
              make_affine(Vec{0, 0}, {Vec{0, 1}})};
    s.xbar = Vec{0, 0};
    s.intersection = make_affine(Vec{0, 0}, {});
    s.norm = Norm::euclidean(2);
    validate_scene(s);
    return s;
}

// Horizontal axis and a line at angle phi through the origin.
inline Scene scene_two_lines(double phi) {
    Scene s;
    s.dim = 2;
    s.sets = {make_affine(Vec{0, 0}, {Vec{1, 0}}),
              make_affine(Vec{0, 0}, {Vec{std::cos(phi), std::sin(phi)}})};
    s.xbar = Vec{0, 0};
    s.intersection = make_affine(Vec{0, 0}, {});
    s.norm = Norm::euclidean(2);
    validate_scene(s);
    return s;
}

// xbar interior to both sets.
inline Scene scene_interior() {
    Scene s;
    s.dim = 2;
    s.sets = {make_box(Vec{-1, -1}, Vec{1, 1}), make_ball(Vec{0, 0}, 1.5)};
    s.xbar = Vec{0, 0};
    s.norm = Norm::euclidean(2);
    validate_scene(s);
    return s;
}

inline EstimatorParams quick_params() {
    EstimatorParams p;
    p.rho_schedule = {0.5, 0.5, 1e-2};
    p.ball_samples = {1.0, 11, 8};
    return p;
}

}  // namespace testutil
