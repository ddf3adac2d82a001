#pragma once

#include <functional>

#include "mtplab/model.hpp"

namespace mtplab {

using LossFn = std::function<double(const DisentangledModel&)>;

inline constexpr double kDefaultFdEpsilon = 1e-5;

// Central differences (f(w+eps) - f(w-eps)) / (2 eps) over every entry of the
// four weight matrices. Independent of the closed-form gradients; used as
// their oracle. Throws Errc::evaluation if the loss is ever non-finite.
GradSet finite_diff_grad(const LossFn& loss, const DisentangledModel& model,
                         double epsilon = kDefaultFdEpsilon);

}  // namespace mtplab
