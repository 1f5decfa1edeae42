#pragma once
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "alab/dynamics.hpp"

namespace alab {

struct AttractorParams {
  double offset = 1e-4;       // initial displacement along unstable directions
  double dt = 0.005;          // RK4 step
  double t_max = 400.0;       // give up settling after this time
  double settle = 1e-6;       // arrival radius around a stable equilibrium
  double escape = 1e3;        // |z| beyond this means the orbit escaped
  std::size_t samples_1d = 512;
  std::size_t max_points = 8192;
  std::size_t source_orbits = 64;
};

// Attractor of a Morse-Smale flow on R^n (n <= 2) built from unstable manifolds.
// A two-dimensional attractor (a source ringed by saddle connections) is stored as a
// filled region: `boundary` is the closed loop, `points` holds boundary and interior samples.
struct AttractorCloud {
  std::size_t n = 1;
  std::vector<Vec> points;
  std::vector<std::vector<Vec>> arcs;  // orbits, each starting at an equilibrium
  std::vector<Vec> boundary;           // closed loop (last point == first) when filled
  bool filled = false;
  EquilibriumSet equilibria;
  double saturation_time = 0.0;
  std::size_t unsettled_orbits = 0;

  // Polylines that make up the set (arcs for curves, the loop for a region; a single
  // sorted polyline for n = 1).
  std::vector<std::vector<Vec>> curves() const;
  bool contains(std::span<const double> z) const;  // region membership (filled only)
  double diameter() const;
};

AttractorCloud attractor_approximate(const VectorField& F, const EquilibriumSet& eq,
                                     const AttractorParams& prm = {});

struct HausdorffResult {
  double ab = 0.0;  // sup_{a in A} dist(a, B)
  double ba = 0.0;  // sup_{b in B} dist(b, A)
  double d() const { return ab > ba ? ab : ba; }
};

// Exact max-min over two finite clouds in the weighted Euclidean norm.
HausdorffResult hausdorff(const std::vector<Vec>& A, const std::vector<Vec>& B,
                          std::span<const double> weights);
// Distance from p to a polyline in the weighted norm.
double polyline_distance(std::span<const double> p, const std::vector<Vec>& line,
                         std::span<const double> weights);
// Sampled Hausdorff distance between attractor sets: samples of one against the
// curves (and region) of the other.
HausdorffResult set_distance(const AttractorCloud& A, const AttractorCloud& B,
                             std::span<const double> weights);
// max of sup_p dist(T p, A) and sup_p dist(p, T A) over the cloud samples.
double invariance_residual(const AttractorCloud& A, const Map& T, std::span<const double> weights);

// Hausdorff distance in X^{1/2} between the manifold attractor {v + s(v)} built from a
// reduced cloud (j_eps coordinates) and the lift E of a limit cloud (limit coordinates).
HausdorffResult attractor_distance(const ManifoldSetup& ms, const GraphSection& s,
                                   const AttractorCloud& reduced, const AttractorCloud& limit);

std::string cloud_csv(const AttractorCloud& A);

}  // namespace alab
