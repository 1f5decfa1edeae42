#pragma once
#include <span>
#include <string>

#include "alab/operators.hpp"

namespace alab {

// Scalar C^1 reaction term f applied pointwise (Nemytskii map).
class FSpec {
 public:
  enum class Kind { zero, constant, linear, cubic_cutoff };

  static FSpec zero();
  static FSpec constant(double c);
  // f(u) = c u; unbounded, used only by linear test problems.
  static FSpec linear(double c);
  // f(u) = u - u^3 for |u| <= R_cut, continued past R_cut with a slope that
  // decays linearly to zero over `width`, then constant.
  static FSpec cubic_cutoff(double R_cut = 4.0, double width = 1.0);

  double operator()(double u) const;
  double derivative(double u) const;
  double bound() const;      // sup |f|
  double lipschitz() const;  // sup |f'|
  double r_cut() const { return r_cut_; }
  Kind kind() const { return kind_; }
  std::string describe() const;
  // max(sup |f|, sup |f'|) over [-U, U].
  double local_bound(double U) const;
  // sup f(u) u over |u| >= R_cut is negative (dissipative sign condition).
  bool dissipative() const;

  Vec apply(std::span<const double> u) const;
  Vec apply_derivative(std::span<const double> u) const;

 private:
  Kind kind_ = Kind::zero;
  double c_ = 0.0;
  double r_cut_ = 0.0;
  double width_ = 1.0;
};

}  // namespace alab
