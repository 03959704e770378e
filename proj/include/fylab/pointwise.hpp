#pragma once

#include "fylab/kernel.hpp"
#include "fylab/profile.hpp"

namespace fylab {

/// P v(t) = -integral_0^inf (v(t+xi) + v(t-xi) - 2 v(t)) K(xi) dxi.
///
/// The far field is truncated where the exponential tail of K drops below
/// 1e-12; grid profiles use their far-field value beyond the last node, which
/// is integrated exactly against the tail of K.
double apply_P_pointwise(const KernelModel& model, const Profile& profile, double t);

/// P v(t) + v(t) - v(t)^p.
double equation_residual(const KernelModel& model, const Profile& profile, double t);

}  // namespace fylab
