#pragma once
// Laplacian flow of closed G2-structures on a radial grid. The state is the
// nodal phi; every evaluation takes stencil jets of phi and assembles
// Delta phi = i_phi(h) nodewise.
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2lab/build.hpp"

namespace g2lab {

struct NotClosed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StabilityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Direction { forward, backward };

// fixed: end nodes frozen; exact: end nodes follow a supplied solution; free:
// every node evolves with one-sided stencils at the ends.
enum class BoundaryPolicy { fixed, exact, free };

struct FlowConfig {
  int accuracy = 4;
  BoundaryPolicy boundary = BoundaryPolicy::fixed;
  std::function<Dense<double>(double t, double x)> exact;
  double closed_tol = 1e-8;
  bool check_closed = true;
  double cfl = 0.2;
};

struct FlowState {
  TensorField phi;
  const LinkSpec* link = nullptr;
  double t = 0.0;
};

double closedness_residual(const TensorField& phi, const LinkSpec& link, int accuracy);

TensorField torsion_from_phi(const TensorField& phi, const LinkSpec& link, const FlowConfig& cfg = {});
TensorField laplacian_flow_rhs(const TensorField& phi, const LinkSpec& link, const FlowConfig& cfg = {});

// dt <= cfl * (min spacing)^2 / max g^00 over the nodes.
double stability_bound(const FlowState& s, const FlowConfig& cfg);

// One classical RK4 step. Backward stepping integrates d phi / d tau = -Delta phi.
FlowState step_flow(const FlowState& s, double dt, Direction dir, const FlowConfig& cfg);

std::vector<FlowState> integrate_flow(const FlowState& s0, double dt, int steps, Direction dir,
                                      const FlowConfig& cfg);

struct EvolutionReport {
  double metric_residual = 0.0;  // max |d_t g + 2 Ric + 2/3 |T|^2 g + 4 T o T|
  double min_volume_increment = 0.0;
  bool volume_increasing = false;
  bool volume_constant = false;
  double closedness_drift = 0.0;
  int checked_states = 0;
};

// Equal time steps are assumed; d_t g uses five-point central differences.
EvolutionReport evolution_cross_check(const std::vector<FlowState>& traj, const FlowConfig& cfg);

// One snapshot file per state (dir/prefix_NNNN.field) plus an index listing the
// step, hex time and file name of every saved state.
std::vector<std::string> save_trajectory(const std::vector<FlowState>& traj, const std::string& dir,
                                         const std::string& prefix);

// Forward self-similar Fowdar flow: phi(t) = (1 - t/3)^(3/2) phi_F(x + sigma(t)),
// sigma(t) = -(15/2) log(1 - t/3).
Dense<double> fowdar_forward_exact(double t, double x);

}  // namespace g2lab
