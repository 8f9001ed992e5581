#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ctsynth/autodiff.hpp"

namespace ctsynth {

// Builds a scalar loss on a fresh tape from the current parameter values.
// Inputs under test are wrapped as Parameters so one code path perturbs
// both weights and inputs.
using LossBuilder = std::function<Node<double>*(Tape<double>&)>;

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::int64_t worst_index = -1;
};

// Central finite differences against the backward pass, element by element.
// Relative error uses max(|analytic|, |numeric|, floor) as denominator.
GradCheckReport grad_check(const LossBuilder& build, std::vector<Parameter<double>*> params,
                           double h = 1e-4, double denom_floor = 1e-8);

} // namespace ctsynth
