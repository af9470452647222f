// Run configuration and the key=value config-file parser.
#pragma once

#include <string>
#include <vector>

#include "mfb/base_state.hpp"
#include "mfb/grid.hpp"

namespace mfb {

struct ProblemConfig {
    double rho = 12.0 * 3.14159265358979323846264338328;
    double t = 0.10;
    std::vector<double> t_list{0.10, 0.085, 0.07, 0.06};
    int grid_n = 0; // 0: choose from the resolution target
    double R0 = 2.05;
    double r0 = 0.4;
    double p = 1.5;
    double alpha = 0.25;
    double eps = 0.25;
    Vec2 e_dir{1.0, 0.0};
    Vec2 q0{0.0, 0.0};
    WeightSpec weight = [] {
        WeightSpec w;
        w.kind = WeightSpec::Kind::ExpCos;
        w.c1 = 0.3;
        w.c2 = 0.0;
        return w;
    }();

    // tolerances / iteration limits
    double mean_tol = 1e-10;
    double solver_tol = 1e-10;
    double newton_tol = 1e-11;
    double margin_tol = 1e-2;
    double lin_tol = 1e-9;
    double fp_tol = 1e-10;
    double c_tol = 1e-10;
    int max_newton = 50;
    int max_fp_iter = 40;
    int max_outer = 30;

    // grid choice: smallest power of two >= grid_factor * Lambda
    int grid_min = 256;
    int grid_max = 4096;
    double grid_factor = 9.0;
};

// Accepts plain reals and "<number>pi" (e.g. "12pi").
double parse_rho(const std::string& text);

// key = value lines; '#' comments; unknown keys are errors.
ProblemConfig parse_config_text(const std::string& text);
ProblemConfig parse_config_file(const std::string& path);

} // namespace mfb
