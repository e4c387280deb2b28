#pragma once
// Carleman weights, the scalar divergence identity and weighted-norm
// experiments for backward uniqueness of parabolic subsolutions.
//
// Appendix-type fields are radial on R^n: Delta u = u'' + (n-1) u' / r and
// norms carry the measure r^(n-1) dr dt (the sphere area is dropped; it cancels
// in every ratio).
#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2lab/shrinker.hpp"

namespace g2lab {

struct SupportViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct HypothesisViolation : std::runtime_error {
  HypothesisViolation(const std::string& what, double r, double t) : std::runtime_error(what), r(r), t(t) {}
  double r, t;
};

// Ranges are checked by the constructor and by validate().
// kernel_denominator is the exponent denominator d of the Gaussian multiplier
// exp(-(r - rho)^2 / (d (t + a))) inside the weighted norms: 8 is the square root
// of the kernel with denominator 4.
struct CarlemanParams {
  double alpha = 4.0;
  double a = 0.05;
  double rho = 20.0;
  double delta = 0.5;
  double eta = 0.5;
  double tau0 = 1.0;
  double gamma = 1.0 / 12.0;
  int n = 3;
  int kernel_denominator = 8;

  CarlemanParams() = default;
  CarlemanParams(double alpha, double a, double rho, double delta = 0.5, double eta = 0.5, double tau0 = 1.0,
                 double gamma = 1.0 / 12.0, int n = 3, int kernel_denominator = 8);
  void validate() const;
};

double sigma_a(double t, double a);
double sigma_a_dot(double t, double a);
// -(sigma / sigma') (log sigma)''
double sigma_a_log_ratio(double t, double a);

double weight_H1(double h, double tau, const CarlemanParams& p);
double weight_H2(double h, double tau, double a, double rho);
double weight_H2hat(double r, double tau, double a, double rho, int denom = 4);

// Pointwise data of h at one node: value, tau derivative, gradient, Hessian,
// metric and scalar curvature.
struct HNode {
  double h = 0.0, dtau_h = 0.0, R = 0.0;
  std::array<double, 7> grad{};
  std::array<double, 49> hess{}, g{}, ginv{};
};

struct H1Terms {
  double phi = 0.0;  // log H1
  std::array<double, 7> grad{};
  std::array<double, 49> hess{};
  double dtau = 0.0, laplacian = 0.0, grad_norm2 = 0.0;
  double F1 = 0.0;            // d_tau phi - Delta phi - |grad phi|^2 + 2/3 R
  double min_hess_eig = 0.0;  // smallest eigenvalue of hess relative to g
};
H1Terms h1_terms(const HNode& node, double tau, const CarlemanParams& p);

// h-data of a self-similar backward flow at state k. d_tau h uses the identity
// d_tau h = 2 tau (R - E) / h with E = R + |grad f|^2 - f / tau.
std::vector<HNode> h_nodes(const BackwardFlow& flow, std::size_t k);

// Which sign multiplies tau (h - rho) / (h (tau + a)) in the (R - E) coefficient.
// derived: minus, as a direct expansion gives; stated: plus.
enum class H2Sign { derived, stated };
// Closed form of H2^-1 (d_tau H2 - Delta H2) in terms of h, R and E.
double h2_heat_formula(double h, double tau, double a, double rho, double R, double E, H2Sign sign = H2Sign::derived);

struct H2HeatCheck {
  double derived_gap = 0.0;  // sup |direct - formula(derived)|
  double stated_gap = 0.0;   // sup |direct - formula(stated)|
  double scale = 0.0;        // sup |direct|
  int checked_states = 0;
};
// Direct evaluation: d_tau by the five-point formula over equally spaced
// states, Delta from the Hessian of the H2 jet. States 2..K-3 are checked.
H2HeatCheck h2_conjugate_heat_check(const BackwardFlow& flow, double a, double rho);

// sup over checked states of |d_tau H - Delta H + 2/3 R H| for H = tau^(-7/2) e^(-f).
double heat_kernel_residual(const BackwardFlow& flow);

struct KernelComparison {
  double min_ratio = 0.0, max_ratio = 0.0;  // (tau + a)^(7/2) H2 / exp(-(r - rho)^2 / (4 (tau + a)))
  int nodes = 0;
};
// Cone-type models only; nodes with r < r_min are skipped.
KernelComparison compare_H2_kernels(const BackwardFlow& flow, double a, double rho, double r_min = 0.0);

// C^2 radial cutoff: 1 on [rho/3, 2 xi], 0 outside [rho/6, 3 xi], quintic
// smoothstep ramps in between.
struct CutoffPsi {
  double rho = 0.0, xi = 0.0;
  double operator()(double r) const { return eval(r)[0]; }
  // value, first and second derivative
  std::array<double, 3> eval(double r) const;
  std::vector<double> junctions() const;
};
CutoffPsi cutoff_psi(double rho, double xi, double inner_radius = 1.0);
// rho * sup (|psi'| + |psi''| + (n - 1) |psi'| / r), scanned on a fine grid.
double cutoff_constant(const CutoffPsi& psi, int n = 3, int samples = 20000);

struct StirlingResult {
  double exact_max = 0.0;
  double s_star = 0.0;  // infinity for k = 0
  double bound = 0.0;   // rho^-2k C^k k! with C = c
};
StirlingResult stirling_bound(int k, double rho, double c);
// Smallest C with (ck)^k e^-k <= C^k k! for k = 1..k_max.
double stirling_min_constant(double c, int k_max);

// Uniform radial x time grid for tabulated fields.
struct SpaceTimeGrid {
  double r_lo = 1.0, r_hi = 3.0;
  int nr = 41;
  double t_lo = 0.0, t_hi = 0.5;
  int nt = 41;
  int n = 3;
  double r(int i) const { return r_lo + (r_hi - r_lo) * i / (nr - 1); }
  double t(int j) const { return t_lo + (t_hi - t_lo) * j / (nt - 1); }
};

struct ScalarSpaceTimeField {
  SpaceTimeGrid grid;
  std::vector<double> values;  // [i * nt + j]
  bool initial_vanishing = true;
  bool compact_support = true;
  double at(int i, int j) const { return values[std::size_t(i) * grid.nt + j]; }
  static ScalarSpaceTimeField sample(const SpaceTimeGrid& g, const std::function<double(double, double)>& f);
};

enum class WeightKind { H1, H2, H2hat, sigma_power };
struct WeightField {
  WeightKind kind = WeightKind::H2;
  ScalarSpaceTimeField field;
  // Throws std::invalid_argument unless strictly positive.
  WeightField(WeightKind kind, ScalarSpaceTimeField f);
};
// Tabulations on the flat static background, h = r.
WeightField tabulate_H1(const SpaceTimeGrid& g, const CarlemanParams& p);
WeightField tabulate_H2(const SpaceTimeGrid& g, double a, double rho);
WeightField tabulate_H2hat(const SpaceTimeGrid& g, double a, double rho, int denom = 4);
WeightField tabulate_sigma_power(const SpaceTimeGrid& g, double a, double power);

// H^-1 (d_tau H - Delta H) by finite differences of the given accuracy.
ScalarSpaceTimeField canonical_F(const WeightField& H, int accuracy = 2);

struct DivergenceIdentity {
  double lhs = 0.0, rhs = 0.0, residual = 0.0;
};
// Flat static scalar case. LHS is the integrated divergence form, which the
// support of Z reduces to -int (|Z_r|^2 + F/2 Z^2) H at the final time; RHS the
// space-time integral of the expanded side. Finite differences of the given
// accuracy; trapezoid weights for accuracy 2, Simpson weights (odd node
// counts) above.
DivergenceIdentity divergence_identity_residual(const ScalarSpaceTimeField& Z, const WeightField& H,
                                                const ScalarSpaceTimeField& F, int accuracy = 2);

// Radial space-time function with analytic first derivatives and u_rr.
struct PointValues {
  double u = 0.0, ur = 0.0, urr = 0.0, ut = 0.0;
};
using SpaceTimeFunction = std::function<PointValues(double r, double t)>;

struct TestFunction {
  std::string name;
  SpaceTimeFunction f;
  double r_lo = 0.0, r_hi = 0.0;  // radial support
};

enum class CarlemanVariant { gaussian, gaussian_log, H1_pde, H1_ode, ode_sup };
const char* variant_name(CarlemanVariant v);

enum class RatioOutcome { ok, degenerate_denominator };

struct RatioResult {
  RatioOutcome outcome = RatioOutcome::ok;
  double log_lhs = 0.0, log_rhs = 0.0;
  double lhs() const;
  double rhs() const;
  std::optional<double> ratio() const;
};

struct QuadratureOptions {
  int r_nodes = 241;
  double t_nodes_per_efold = 6.0;  // per unit of log(t + shift), scaled by 2 alpha + 1 for sigma weights
  int min_t_nodes = 200;
  int refine = 1;                  // multiplies both node counts
};

// LHS / RHS of the selected inequality by trapezoid quadrature in log space.
// gaussian and gaussian_log: sqrt(alpha) |sigma^(-alpha-1/2) w u| + |sigma^-alpha w grad u|
//   against |sigma^-alpha w (d_t + Delta) u|, plus |sigma^(-alpha-1/2) (log r)^(1/2) w u|
//   for gaussian_log, with w the Gaussian multiplier of kernel_denominator.
// H1_pde: (alpha |u e^(W/2)|^2 + |grad u e^(W/2)|^2) against
//   1/2 |(d_t + Delta) u e^(W/2)|^2 + |grad u e^(W/2)|^2 at t = tau0,
//   W = alpha (tau0 - t) r^(2 - eta) + r^2.
// H1_ode: alpha |u e^(W/2)|^2 against 2 |d_t u e^(W/2)|^2.
// ode_sup: |sigma^(-alpha-1/2) w u| against alpha^-1 |sigma^-alpha w d_t u|
//   + a^(-1/2) (rho + sqrt a)^(n/2) (a e^(1/8))^-alpha sup |u|, with N = 1.
// Time runs over [0, 1] (gaussian, gaussian_log, ode_sup) or [0, tau0] (H1 variants).
// Throws SupportViolation if u reaches below gamma rho (gaussian, gaussian_log) or r < 1
// where log r is needed.
RatioResult carleman_ratio(const TestFunction& u, const CarlemanParams& p, CarlemanVariant v,
                           const QuadratureOptions& q = {});

struct SweepRow {
  CarlemanVariant variant = CarlemanVariant::gaussian;
  CarlemanParams params;
  RatioResult result;
};
struct SweepRanges {
  std::vector<double> alphas{1, 2, 4, 8, 16, 32, 64};
  std::vector<double> as{0.01, 0.05, 0.1};
  std::vector<double> rhos{20.0};
};
// One row per (alpha, a, rho), alpha slowest.
std::vector<SweepRow> carleman_sweep(const TestFunction& u, const CarlemanParams& base, CarlemanVariant v,
                                     const SweepRanges& ranges, const QuadratureOptions& q = {});
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// t (1 - t)^3 times a smooth bump on (c - w, c + w), raised to t^p for p > 1.
TestFunction bump_test_function(std::string name, double center, double width, int t_power = 1,
                                double oscillation = 0.0);

// u with |Delta u + d_t u| <= M |grad u| + (N r^delta + M) |u| and |u| <= M e^(M r^2).
struct Subsolution {
  std::string name;
  SpaceTimeFunction f;
  double M = 1.0, N = 1.0, delta = 0.25;
};

struct DecayFit {
  double s = 0.0;
  std::vector<double> rho, rho2, log_norm;
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
struct DecayOptions {
  int r_nodes = 161, t_nodes = 161;
};
// log || |u| + |grad u| ||_{L^2(A((1 - sqrt s) rho, (1 + sqrt s) rho) x [0, s])}
// against rho^2. Every quadrature node is certified against the hypotheses
// first; HypothesisViolation names the first failing node.
DecayFit exp_decay_experiment(const Subsolution& u, const std::vector<double>& rhos, double s, int n = 3,
                              const DecayOptions& opt = {});

// Exact backward heat solution (T - t)^(-n/2) exp(-r^2 / (4 (T - t))).
Subsolution backward_heat_kernel(double T, int n = 3);

}  // namespace g2lab
