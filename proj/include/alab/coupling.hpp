#pragma once
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "alab/operators.hpp"
#include "alab/spectral.hpp"

namespace alab {

class FSpec;

// Lift E: R^n -> grid functions and average M: grid functions -> R^n.
struct CouplingPair {
  ProblemTag tag = ProblemTag::homogenization;
  std::size_t n_dim = 1;
  std::size_t size = 0;  // length of grid functions
  // E is linear: E u = sum_k u_k lift_basis[k].
  std::vector<Vec> lift_basis;
  // M is linear: (M u)_k = sum_i avg_weights[k][i] u_i.
  std::vector<Vec> avg_weights;

  Vec lift(std::span<const double> u0) const;
  Vec average(std::span<const double> u) const;
};

CouplingPair make_coupling(const OperatorDisc& op, const ProblemParams& prm);

struct GapReport {
  double epsilon = 0.0;
  double tau_hat = 0.0;
  double rho_hat = 0.0;
  double proj_gap = 0.0;
  double norm_ratio = 0.0;
};

struct ResolventGapResult {
  double tau_hat = 0.0;
  std::size_t probes = 0;
  // Estimate using only the first half of the probe set (convergence check).
  double tau_half = 0.0;
  std::size_t power_steps = 0;
};

// max over probes g with ||g||_{L2} = 1 of ||A^{-1} g - E A0^{-1} M g||_{X^{1/2}}.
// The best probe is refined by a few power steps; the result stays a lower bound.
ResolventGapResult resolvent_gap(const OperatorDisc& op, const SpectralData& sd,
                                 const LimitOperator& limit, const CouplingPair& cp,
                                 std::size_t spectral_probes, std::size_t random_probes,
                                 unsigned seed, std::size_t power_steps = 8);
// Normalized indicators (even and odd) of the localized transition zone.
std::vector<Vec> zone_probes(const OperatorDisc& op, const CouplingPair& cp);
// Exact operator norm of the same difference, through the full eigenbasis.
double resolvent_gap_exact(const SpectralData& sd, const LimitOperator& limit,
                           const CouplingPair& cp);

// max over samples u0 in the box of ||f(E u0) - E f(u0)||_{L2}.
double nonlinearity_gap(const OperatorDisc& op, const FSpec& f, const CouplingPair& cp,
                        std::span<const double> box_lo, std::span<const double> box_hi,
                        std::size_t samples_per_dim);

// ||Q E - E|| from (R^n, limit inner product) to X^{1/2}.
double projection_gap(const SpectralSplit& sp, const LimitOperator& limit, const CouplingPair& cp);

// max over mean-zero probes of ||u||^2_{X^{1/2}} / ||u||^2_{H^1}.
double norm_nonequivalence(const OperatorDisc& op, std::size_t cosine_probes,
                           std::size_t random_probes, unsigned seed);

// Largest generalized eigenvalue of (G, W0), n <= 2, for Gram reductions.
double max_generalized_eig(const std::vector<double>& G, const std::vector<double>& w0,
                           std::size_t n);

}  // namespace alab
