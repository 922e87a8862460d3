#include "lgp/hmc.hpp"

#include <cmath>

#include "lgp/errors.hpp"

namespace lgp {

void leapfrog(Eigen::VectorXd& position, Eigen::VectorXd& momentum,
              const GradFn& grad, double eps, int steps) {
  Eigen::VectorXd g = grad(position);
  for (int s = 0; s < steps; ++s) {
    momentum -= 0.5 * eps * g;
    position += eps * momentum;
    g = grad(position);
    momentum -= 0.5 * eps * g;
  }
}

HmcStepResult hmc_step(const Eigen::VectorXd& position, const EnergyFn& energy,
                       const GradFn& grad, int leapfrog_steps, double step_size,
                       Rng& rng,
                       const std::function<bool(const Eigen::VectorXd&)>& proposal_ok) {
  HmcStepResult out;
  out.position = position;

  Eigen::VectorXd momentum(position.size());
  for (int i = 0; i < momentum.size(); ++i) momentum[i] = rng.normal();
  const double lambda = rng.bernoulli(0.5) ? 1.0 : -1.0;
  const double eps = lambda * step_size;

  try {
    const double e0 = energy(position);
    if (!std::isfinite(e0)) return out;
    const double h0 = e0 + 0.5 * momentum.squaredNorm();

    Eigen::VectorXd q = position;
    Eigen::VectorXd p = momentum;
    leapfrog(q, p, grad, eps, leapfrog_steps);
    if (!q.allFinite() || !p.allFinite()) return out;
    if (proposal_ok && !proposal_ok(q)) return out;

    const double e1 = energy(q);
    if (!std::isfinite(e1)) return out;
    const double h1 = e1 + 0.5 * p.squaredNorm();

    if (std::log(rng.uniform()) < -(h1 - h0)) {
      out.position = std::move(q);
      out.accepted = true;
    }
  } catch (const NumericalError&) {
    // Divergent trajectory; keep the current state.
  }
  return out;
}

}  // namespace lgp
