#include "lgp/kernels.hpp"

namespace lgp {

bool kernel_params_valid(const KernelParams& p, KernelType type) {
  if (!(p.jitter > 0.0)) return false;
  if (!std::isfinite(p.theta1) || !std::isfinite(p.r)) return false;
  if (type == KernelType::Periodic) {
    if (!std::isfinite(p.theta2) || std::fabs(p.theta2) < kTheta2Floor)
      return false;
  }
  return true;
}

double kernel_periodic(double tu, double tv, const KernelParams& p) {
  return periodic_value(periodic_parts(tu, tv, p), p, tu == tv);
}

double kernel_sqexp(double tu, double tv, const KernelParams& p) {
  return sqexp_value(sqexp_parts(tu, tv, p), p, tu == tv);
}

KernelGrad kernel_grad_periodic(double tu, double tv, const KernelParams& p) {
  return periodic_grad(periodic_parts(tu, tv, p), p, tu, tv);
}

KernelGrad kernel_grad_sqexp(double tu, double tv, const KernelParams& p) {
  return sqexp_grad(sqexp_parts(tu, tv, p), p);
}

double kernel_value(KernelType type, double tu, double tv, const KernelParams& p) {
  return type == KernelType::Periodic ? kernel_periodic(tu, tv, p)
                                      : kernel_sqexp(tu, tv, p);
}

}  // namespace lgp
