// powell.hpp: Powell's direction-set minimizer

#pragma once

#include <functional>
#include <vector>

namespace sledbench {

struct PowellOptions {
    double ftol{1e-6};     // relative decrease of f per cycle
    double xtol{1e-6};     // max-norm change of x per cycle
    int max_iter{200};     // cycles through the direction set
    double initial_step{0.1};
};

struct PowellResult {
    std::vector<double> x;
    double f{0.0};
    std::vector<double> x0;
    double f0{0.0};
    int iterations{0};
    int evaluations{0};
    bool converged{false};
};

using Objective = std::function<double(const std::vector<double>&)>;

// Line searches bracket the minimum and refine it with Brent's method; a move
// is only accepted when it strictly lowers f, so f <= f(x0) always holds.
// Throws NonFiniteObjective if f returns NaN or Inf.
PowellResult powell_minimize(const Objective& f, const std::vector<double>& x0,
                             const PowellOptions& opt = {});

} // namespace sledbench
