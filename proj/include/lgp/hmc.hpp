#pragma once

#include <Eigen/Dense>
#include <functional>

#include "lgp/rng.hpp"

namespace lgp {

using EnergyFn = std::function<double(const Eigen::VectorXd&)>;
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// `steps` leapfrog iterations with stepsize eps, updating position and
/// momentum in place. Each iteration is the half-kick / drift / half-kick
/// update, so a single step can be checked by hand and the map is
/// time-reversible under eps -> -eps with negated momentum.
void leapfrog(Eigen::VectorXd& position, Eigen::VectorXd& momentum,
              const GradFn& grad, double eps, int steps);

struct HmcStepResult {
  Eigen::VectorXd position;
  bool accepted = false;
};

/// One hybrid Monte Carlo transition: momentum ~ N(0, I), random direction
/// lambda = +-1, `leapfrog_steps` steps of size lambda*step_size, Metropolis
/// accept on the Hamiltonian difference. Non-finite energies or gradients and
/// proposals rejected by `proposal_ok` leave the position unchanged.
HmcStepResult hmc_step(const Eigen::VectorXd& position, const EnergyFn& energy,
                       const GradFn& grad, int leapfrog_steps, double step_size,
                       Rng& rng,
                       const std::function<bool(const Eigen::VectorXd&)>&
                           proposal_ok = nullptr);

}  // namespace lgp
