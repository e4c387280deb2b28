#pragma once
// Differences of two G2 flows on a common chart and the ODE-PDE system they
// satisfy. X = (V, S, Q, W) carries the torsion and curvature differences that
// obey a heat-type equation; Y = (gamma, mu, A, B, F) is controlled by X through
// time integration.
//
// Tensors are stored fully covariant. A is the Christoffel difference with its
// upper index lowered by g, S and Q are the (1,3) and (1,4) curvature
// differences lowered the same way. Norms and derivatives use flow A.
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "g2lab/flow.hpp"

namespace g2lab {

enum Block { kGamma, kMu, kA, kB, kF, kV, kS, kQ, kW, kBlocks };
const char* block_name(int b);

struct DiffBundle {
  double tau = 0.0;
  RadialGrid grid;
  std::vector<double> r;  // cone radius at each node
  std::array<TensorField, kBlocks> blocks;
  TensorField metric;     // g of flow A
  // |nabla V|, |nabla S|, |nabla Q|, |nabla W| per node.
  std::vector<std::array<double, 4>> grad_norms;
  // Rough Laplacians of V, S, Q, W; present when built with laplacians.
  std::optional<std::array<TensorField, 4>> laplacians;

  const TensorField& operator[](int b) const { return blocks[b]; }
  std::array<double, kBlocks> norms(int node) const;
};

struct SectionNorms {
  double X = 0.0, Y = 0.0, grad_X = 0.0;
};
SectionNorms section_norms(const DiffBundle& d, int node);

struct DiffOptions {
  int accuracy = 4;         // stencil accuracy for nodal inputs
  bool laplacians = false;  // also form Delta X (one more radial derivative)
  double radius_scale = 1.0;  // r = radius_scale * x
  double tau_sign = -1.0;     // tau = tau_sign * t; backward flows run toward negative t
};

// Nodal: stencil jets of two tabulated structures at the same tau.
DiffBundle build_differences(const FlowState& a, const FlowState& b, const DiffOptions& opt = {});
// Analytic: exact radial jets of two models on a common grid.
DiffBundle build_differences(const ModelSpec& a, const ModelSpec& b, const RadialGrid& grid,
                             const DiffOptions& opt = {});

struct FittedConstants {
  double C = 0.0;
  double C_Y = 0.0;  // from |d_tau Y| <= C (|X| + |nabla X|) + C/r |Y|
  double C_X = 0.0;  // from |d_tau X + Delta X| <= C/r (|X| + |nabla X| + |Y|)
  int arg_node = -1, arg_slice = -1;
  std::string arg_inequality;
  double arg_r = 0.0;
  int checked = 0, excluded = 0;
};

struct FitOptions {
  double r_min = 0.0;  // only nodes with r >= r_min
  int margin = 0;      // skip this many nodes at each end
};

// Slices must share the grid and be equally spaced in tau. Time derivatives use
// the five-point formula, so slices 2..K-3 are checked and need laplacians.
FittedConstants system_residual_constants(const std::vector<DiffBundle>& seq, const FitOptions& fit = {});

// Two flows sampled at common times, difference bundles with laplacians on the
// slices that system_residual_constants checks.
std::vector<DiffBundle> difference_sequence(const std::vector<FlowState>& a, const std::vector<FlowState>& b,
                                            const DiffOptions& opt = {});

struct BlockDecay {
  std::vector<std::pair<double, double>> annuli;     // [r_lo, r_hi)
  std::vector<std::array<double, kBlocks>> sup;      // sup of each block over the annulus
  std::vector<std::array<double, kBlocks>> scaled;   // sup times r_lo^2
  std::vector<double> total_scaled;  // sup r^2 (sum of blocks + gradient norms of X)
  std::array<double, kBlocks> exponent{};  // slope of log sup against log r_lo
};

// Dyadic annuli [r0 2^k, r0 2^(k+1)) covering the grid, r0 the smallest radius.
BlockDecay decay_profile(const DiffBundle& d);

}  // namespace g2lab
