#include "alab/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "alab/error.hpp"

namespace alab {

FSpec FSpec::zero() { return FSpec{}; }

FSpec FSpec::constant(double c) {
  FSpec f;
  f.kind_ = Kind::constant;
  f.c_ = c;
  return f;
}

FSpec FSpec::linear(double c) {
  FSpec f;
  f.kind_ = Kind::linear;
  f.c_ = c;
  return f;
}

FSpec FSpec::cubic_cutoff(double R_cut, double width) {
  if (!(R_cut > 1.0) || !(width > 0)) throw InvalidInput("cubic cutoff needs R_cut > 1, width > 0");
  FSpec f;
  f.kind_ = Kind::cubic_cutoff;
  f.r_cut_ = R_cut;
  f.width_ = width;
  return f;
}

double FSpec::operator()(double u) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::constant: return c_;
    case Kind::linear: return c_ * u;
    case Kind::cubic_cutoff: {
      const double a = std::abs(u);
      if (a <= r_cut_) return u - u * u * u;
      const double R = r_cut_;
      const double fR = R - R * R * R, dR = 1.0 - 3.0 * R * R;
      const double s = std::min(a - R, width_);
      const double v = fR + dR * (s - s * s / (2.0 * width_));
      return u > 0 ? v : -v;
    }
  }
  return 0.0;
}

double FSpec::derivative(double u) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::constant: return 0.0;
    case Kind::linear: return c_;
    case Kind::cubic_cutoff: {
      const double a = std::abs(u);
      if (a <= r_cut_) return 1.0 - 3.0 * u * u;
      const double s = a - r_cut_;
      if (s >= width_) return 0.0;
      return (1.0 - 3.0 * r_cut_ * r_cut_) * (1.0 - s / width_);
    }
  }
  return 0.0;
}

double FSpec::bound() const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::constant: return std::abs(c_);
    case Kind::linear: return c_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    case Kind::cubic_cutoff: {
      const double R = r_cut_;
      return std::abs(R - R * R * R + (1.0 - 3.0 * R * R) * width_ / 2.0);
    }
  }
  return 0.0;
}

double FSpec::lipschitz() const {
  switch (kind_) {
    case Kind::zero:
    case Kind::constant: return 0.0;
    case Kind::linear: return std::abs(c_);
    case Kind::cubic_cutoff: return 3.0 * r_cut_ * r_cut_ - 1.0;
  }
  return 0.0;
}

double FSpec::local_bound(double U) const {
  if (kind_ != Kind::cubic_cutoff) {
    if (kind_ == Kind::linear) return std::abs(c_) * std::max(1.0, U);
    return std::max(bound(), lipschitz());
  }
  double m = 0.0;
  constexpr int kSamples = 4001;
  for (int i = 0; i < kSamples; ++i) {
    const double u = -U + 2.0 * U * i / (kSamples - 1);
    m = std::max({m, std::abs((*this)(u)), std::abs(derivative(u))});
  }
  return m;
}

bool FSpec::dissipative() const {
  switch (kind_) {
    case Kind::zero: return true;
    case Kind::constant: return c_ == 0.0;
    case Kind::linear: return c_ < 0.0;
    case Kind::cubic_cutoff: {
      for (int i = 0; i <= 200; ++i) {
        const double u = r_cut_ + i * (2.0 * width_) / 200.0;
        if (!((*this)(u)*u < 0.0) || !((*this)(-u) * -u < 0.0)) return false;
      }
      return true;
    }
  }
  return false;
}

std::string FSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::zero: os << "zero"; break;
    case Kind::constant: os << "constant(" << c_ << ")"; break;
    case Kind::linear: os << "linear(" << c_ << ")"; break;
    case Kind::cubic_cutoff: os << "cubic_cutoff(R=" << r_cut_ << ",w=" << width_ << ")"; break;
  }
  return os.str();
}

Vec FSpec::apply(std::span<const double> u) const {
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = (*this)(u[i]);
  return out;
}

Vec FSpec::apply_derivative(std::span<const double> u) const {
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = derivative(u[i]);
  return out;
}

}  // namespace alab
