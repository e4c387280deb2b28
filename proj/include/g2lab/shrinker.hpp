#pragma once
// Gradient shrinker identities, dilation normalization and the self-similar
// backward flow generated by the potential.
//
// A shrinker is (phi, f, lambda) with Delta phi = lambda phi + L_X phi and
// X = grad f. Every model here has a radial potential, so X = g^{m0} f' E_m.
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "g2lab/build.hpp"

namespace g2lab {

struct CriticalPoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// analytic: jets of the model at each node (exact radial derivatives).
// nodal: stencil jets of the tabulated phi and f.
enum class EvalMode { analytic, nodal };

struct ShrinkerEval {
  EvalMode mode = EvalMode::analytic;
  int accuracy = 4;
};

// c such that c phi has dilation constant -3/2: c = (2|lambda|/3)^(3/2).
double dilation_factor(double lambda);

// phi -> c phi, f unchanged, lambda -> -3/2. Metric scales by c^(2/3) and the
// soliton vector by c^(-2/3).
ShrinkerData normalize_dilation(const ShrinkerData& s);

// Radius of the asymptotic cone, r = c^(1/3) x for cone-type models; empty for
// the Fowdar model, which has no cone.
std::optional<double> cone_radius(const ModelSpec& m, double x);

struct SolitonResiduals {
  std::vector<double> x;
  std::vector<double> phi_eq;     // |Delta phi - lambda phi - L_X phi|
  std::vector<double> metric_eq;  // |h - lambda/3 g - nabla^2 f|
  std::vector<double> trace_eq;   // |Delta f + 2/3 R + 7 lambda / 3|
  std::vector<double> laplacian_f;
  std::vector<double> gradient_gap;  // |X - g^-1 df|, X from the radial slope of f
  double phi_sup = 0.0, metric_sup = 0.0, trace_sup = 0.0;
  double max() const;
};

SolitonResiduals soliton_residuals(const ShrinkerData& s, const ShrinkerEval& ev = {});

// f + eps exp(-((x - x_c) / w)^2) with x_c, w a quarter of the grid span.
ShrinkerData perturb_potential(const ShrinkerData& s, double eps);

// Log-log slope of the largest soliton residual against the perturbation amplitude.
double linear_response_slope(const ShrinkerData& s, const std::vector<double>& eps, const ShrinkerEval& ev);

struct EReport {
  std::vector<double> x;
  std::vector<double> E;             // R + |grad f|^2 - f
  std::vector<double> grad_E_eq;     // |nabla E + 2/3 |T|^2 df - 4 div(T o T)|
  std::vector<double> grad_f_T;      // |grad f _| T|
  double grad_E_sup = 0.0, grad_f_T_sup = 0.0;
  // sup |E| / log r over the outer half of the grid, when r is defined.
  std::optional<double> log_ratio;
};

// Needs lambda = -3/2.
EReport E_identities(const ShrinkerData& s, const ShrinkerEval& ev = {});

struct BackwardFlowState {
  double tau = 1.0;
  std::vector<J<3>> psi;  // Psi_tau and its first x-derivatives, per node
  TensorField phi, f, h;
};

struct BackwardFlow {
  ModelSpec model;
  RadialGrid grid;
  std::vector<BackwardFlowState> states;  // in the order of the requested taus
};

// Psi solves dPsi/ds = X^0(Psi), s = -log tau, by RK4 in s with jets in x, so
// Psi' and Psi'' come with the map. phi(tau) = tau^(3/2) Psi^* phi takes the
// model at the composed jet and multiplies radial components by Psi'.
// Only the radial component X^0 = g^00 f' drives the map.
BackwardFlow self_similar_flow(const ShrinkerData& s, const std::vector<double>& taus, double ds_max = 0.005);

// Jets of phi(tau) and f(tau) at one node of a state.
template <int N>
ModelJets<N> backward_jets(const ModelSpec& m, double tau, const J<3>& psi) {
  static_assert(N <= 2);
  const J<N> y = truncate<N>(psi);
  const J<N> dy = truncate<N>(derivative(psi));
  ModelJets<N> mj = model_at<N>(m, y);
  const double s = tau * std::sqrt(tau);
  for (int a = 0; a < 343; ++a) {
    if (is_zero(mj.phi[a])) continue;
    const bool radial = a / 49 == 0 || (a / 7) % 7 == 0 || a % 7 == 0;
    mj.phi[a] = (radial ? mj.phi[a] * dy : mj.phi[a]) * s;
  }
  return mj;
}

struct EnvelopeReport {
  double min_margin = 0.0;  // min over nodes and states of the distance to either bound
  int violations = 0;
};
// (r - 1) e^(s/2) + 1 <= r(Psi_s) <= (r + 1) e^(s/2) - 1 at every node. Cone-type models only.
EnvelopeReport radial_envelope(const BackwardFlow& flow);

struct FlowIdentityResiduals {
  double heat_eq = 0.0;      // |d_tau phi + Delta phi|
  double f_evolution = 0.0;  // |d_tau f + |grad f|^2|
  double hessian = 0.0;      // |nabla^2 f - g / (2 tau) - h|
  int checked_states = 0;
};
// Time derivatives by the three-point formula on neighbouring states, so only
// interior states are checked.
FlowIdentityResiduals backward_flow_residuals(const BackwardFlow& flow);

struct HReport {
  double grad_h = 0.0;   // |grad h|^2 - 1 - 4 tau^2 / h^2 (E - R)
  double lap_h = 0.0;    // h Delta h - 7 + 4/3 tau R + |grad h|^2
  double dtau_h = 0.0;   // d_tau h - 2 tau / h (R - E)
  double min_h_over_r = 0.0, max_h_over_r = 0.0;
  bool comparable = false;             // 1/2 r <= h <= 2 r everywhere
  std::optional<double> comparability;  // sup |h - r| r / (tau^2 log r) over r > e
  int checked_states = 0;
};
// E here is the time-dependent R + |grad f|^2 - f / tau.
HReport h_identities(const BackwardFlow& flow);

// max over consecutive states of sup_{r_lo <= r <= r_hi} |phi(t1) - phi(t2)| / |t1 - t2|.
double cauchy_constant(const BackwardFlow& flow, double r_lo, double r_hi);

struct DecayProfile {
  std::vector<double> b;
  std::vector<std::array<double, 4>> scaled;  // b^l sup_{r >= b} |nabla^l (phi - phi_C)|_{g_C}
  std::array<double, 4> exponent{};           // fitted slope of log sup|nabla^l d| against log b
};

// Sampled on r in [b, r_max] with ratio 1.04 between samples.
DecayProfile conical_decay_profile(const ModelSpec& m, const ModelSpec& cone, const std::vector<double>& bs,
                                   double r_max);

// max over b of |sup_{r >= b} |lambda^-3 rho^* phi - phi_C| - sup_{r >= lambda b} |phi - phi_C||.
double dilation_identity_gap(const ModelSpec& m, const ModelSpec& cone, double lambda, const std::vector<double>& bs,
                             double r_max);

}  // namespace g2lab
