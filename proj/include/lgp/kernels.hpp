#pragma once

#include <cmath>

namespace lgp {

/// Covariance hyperparameters Theta = (theta1, theta2, r) plus the fixed
/// diagonal jitter J. theta1 and r enter the kernels only squared, so both
/// live on the whole real line; theta2 is the wavelength of the periodic
/// kernel and is kept away from zero by kTheta2Floor.
struct KernelParams {
  double theta1 = 1.0;
  double theta2 = 1.0;
  double r = 1.0;
  double jitter = 0.1;
};

enum class KernelType { Periodic, SquaredExp };

inline constexpr double kTheta2Floor = 1e-3;

bool kernel_params_valid(const KernelParams& p, KernelType type);

struct KernelGrad {
  double d_theta1 = 0.0;
  double d_r = 0.0;
  double d_theta2 = 0.0;
};

// Shared pieces of the periodic kernel and its partials, evaluated once per
// (t_u, t_v) pair so the covariance matrix and its three derivative matrices
// agree bit-for-bit with the scalar entry points below.
struct PeriodicParts {
  double s;  // sin(pi (t_u - t_v) / theta2)
  double c;  // cos(pi (t_u - t_v) / theta2)
  double e;  // exp(-r^2 s^2)
  double x;  // pi (t_u - t_v) / theta2
};

inline PeriodicParts periodic_parts(double tu, double tv, const KernelParams& p) {
  PeriodicParts parts;
  parts.x = M_PI * (tu - tv) / p.theta2;
  parts.s = std::sin(parts.x);
  parts.c = std::cos(parts.x);
  parts.e = std::exp(-p.r * p.r * parts.s * parts.s);
  return parts;
}

inline double periodic_value(const PeriodicParts& parts, const KernelParams& p,
                             bool diagonal) {
  double v = p.theta1 * p.theta1 * parts.e;
  if (diagonal) v += p.jitter * p.jitter;
  return v;
}

inline KernelGrad periodic_grad(const PeriodicParts& parts, const KernelParams& p,
                                double tu, double tv) {
  KernelGrad g;
  g.d_theta1 = 2.0 * p.theta1 * parts.e;
  g.d_r = -2.0 * p.r * parts.s * parts.s * p.theta1 * p.theta1 * parts.e;
  g.d_theta2 = 2.0 * p.r * p.r * p.theta1 * p.theta1 * parts.e * parts.s *
               parts.c * (M_PI * (tu - tv) / (p.theta2 * p.theta2));
  return g;
}

struct SqExpParts {
  double e;  // exp(-r^2 (t_u - t_v)^2)
  double d;  // t_u - t_v
};

inline SqExpParts sqexp_parts(double tu, double tv, const KernelParams& p) {
  SqExpParts parts;
  parts.d = tu - tv;
  parts.e = std::exp(-p.r * p.r * parts.d * parts.d);
  return parts;
}

inline double sqexp_value(const SqExpParts& parts, const KernelParams& p,
                          bool diagonal) {
  double v = p.theta1 * p.theta1 * parts.e;
  if (diagonal) v += p.jitter * p.jitter;
  return v;
}

inline KernelGrad sqexp_grad(const SqExpParts& parts, const KernelParams& p) {
  KernelGrad g;
  g.d_theta1 = 2.0 * p.theta1 * parts.e;
  g.d_r = -2.0 * p.r * parts.d * parts.d * p.theta1 * p.theta1 * parts.e;
  g.d_theta2 = 0.0;
  return g;
}

/// theta1^2 exp{-r^2 sin^2(pi (t_u - t_v) / theta2)} + 1[t_u = t_v] J^2.
double kernel_periodic(double tu, double tv, const KernelParams& p);

/// theta1^2 exp{-r^2 (t_u - t_v)^2} + 1[t_u = t_v] J^2.
double kernel_sqexp(double tu, double tv, const KernelParams& p);

/// Partials of the periodic kernel w.r.t. (theta1, r, theta2).
KernelGrad kernel_grad_periodic(double tu, double tv, const KernelParams& p);

/// Partials of the squared-exponential kernel (d_theta2 is identically 0).
KernelGrad kernel_grad_sqexp(double tu, double tv, const KernelParams& p);

double kernel_value(KernelType type, double tu, double tv, const KernelParams& p);

}  // namespace lgp
