#include "alab/attractor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "alab/error.hpp"

namespace alab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOnLoop = 1e-7;

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

bool point_in_polygon(const std::vector<Vec>& poly, double x, double y) {
  bool in = false;
  const std::size_t m = poly.size();
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const double xi = poly[i][0], yi = poly[i][1], xj = poly[j][0], yj = poly[j][1];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

double polygon_area(const std::vector<Vec>& poly) {
  double a = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    a += poly[j][0] * poly[i][1] - poly[i][0] * poly[j][1];
  return std::abs(a) / 2;
}

// Resample a polyline at `count` points uniformly in arc length.
std::vector<Vec> resample(const std::vector<Vec>& line, std::size_t count) {
  if (line.size() < 2 || count < 2) return line;
  std::vector<double> s(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) s[i] = s[i - 1] + euclid(line[i - 1], line[i]);
  const double L = s.back();
  if (L == 0.0) return {line.front()};
  std::vector<Vec> out;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = L * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 2 < line.size() && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double t = len > 0 ? std::clamp((target - s[seg]) / len, 0.0, 1.0) : 0.0;
    Vec p(line[seg].size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = line[seg][i] + t * (line[seg + 1][i] - line[seg][i]);
    out.push_back(std::move(p));
  }
  return out;
}

double arc_length(const std::vector<Vec>& line) {
  double L = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) L += euclid(line[i - 1], line[i]);
  return L;
}

struct Orbit {
  std::vector<Vec> pts;
  bool settled = false;
  int target = -1;
  double time = 0.0;
};

Orbit run_orbit(const VectorField& F, const Vec& start, const std::vector<const Equilibrium*>& sinks,
                const std::vector<int>& sink_ids, const AttractorParams& prm, double spacing) {
  Orbit o;
  Vec z = start;
  o.pts.push_back(z);
  const std::size_t max_steps = static_cast<std::size_t>(prm.t_max / prm.dt);
  for (std::size_t step = 1; step <= max_steps; ++step) {
    z = flow(F, z, prm.dt, prm.dt);
    double zn = 0.0;
    for (double v : z) zn = std::max(zn, std::abs(v));
    if (!std::isfinite(zn) || zn > prm.escape)
      throw RegimeError("attractor orbit escaped the box; the cutoff is not dissipative enough");
    if (euclid(z, o.pts.back()) >= spacing) o.pts.push_back(z);
    for (std::size_t k = 0; k < sinks.size(); ++k) {
      if (euclid(z, sinks[k]->z) < prm.settle) {
        o.settled = true;
        o.target = sink_ids[k];
        o.time = step * prm.dt;
        if (o.pts.back() != z) o.pts.push_back(z);
        o.pts.push_back(sinks[k]->z);
        return o;
      }
    }
  }
  o.time = prm.t_max;
  return o;
}

}  // namespace

std::vector<std::vector<Vec>> AttractorCloud::curves() const {
  if (filled) return {boundary};
  if (n == 1) {
    std::vector<Vec> line = points;
    std::sort(line.begin(), line.end());
    return {line};
  }
  std::vector<std::vector<Vec>> out = arcs;
  for (const auto& e : equilibria.points) out.push_back({e.z});
  return out;
}

bool AttractorCloud::contains(std::span<const double> z) const {
  return filled && point_in_polygon(boundary, z[0], z[1]);
}

double AttractorCloud::diameter() const {
  double d = 0.0;
  const std::vector<Vec>& src = filled ? boundary : points;
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = i + 1; j < src.size(); ++j) d = std::max(d, euclid(src[i], src[j]));
  return d;
}

AttractorCloud attractor_approximate(const VectorField& F, const EquilibriumSet& eq,
                                     const AttractorParams& prm) {
  if (!eq.all_hyperbolic()) throw RegimeError("attractor: non-hyperbolic equilibrium present");
  if (eq.points.empty()) throw InvalidInput("attractor: no equilibria");
  AttractorCloud A;
  A.n = F.n;
  A.equilibria = eq;
  if (A.n > 2) throw InvalidInput("attractor: only n <= 2 is supported");

  std::vector<const Equilibrium*> sinks;
  std::vector<int> sink_ids;
  double scale = 1.0;
  for (std::size_t i = 0; i < eq.points.size(); ++i) {
    if (eq.points[i].unstable_dim == 0) {
      sinks.push_back(&eq.points[i]);
      sink_ids.push_back(static_cast<int>(i));
    }
    for (double v : eq.points[i].z) scale = std::max(scale, std::abs(v));
  }
  if (sinks.empty()) throw RegimeError("attractor: no stable equilibrium");
  const double spacing = 2e-4 * scale;

  // Saddle arcs keyed by equilibrium, for the boundary loop.
  struct SaddlePath {
    int from = -1, to = -1;
    std::vector<Vec> line;
  };
  std::vector<SaddlePath> paths;
  bool has_source = false;
  bool saddles_settled = true;

  for (std::size_t i = 0; i < eq.points.size(); ++i) {
    const Equilibrium& e = eq.points[i];
    if (e.unstable_dim == 0) continue;
    if (e.unstable_dim == 1 && !e.unstable_dirs.empty()) {
      Orbit ends[2];
      for (int sgn = 0; sgn < 2; ++sgn) {
        Vec start = e.z;
        for (std::size_t k = 0; k < A.n; ++k)
          start[k] += (sgn ? -1.0 : 1.0) * prm.offset * e.unstable_dirs[0][k];
        ends[sgn] = run_orbit(F, start, sinks, sink_ids, prm, spacing);
        ends[sgn].pts.insert(ends[sgn].pts.begin(), e.z);
        A.saturation_time = std::max(A.saturation_time, ends[sgn].time);
        if (!ends[sgn].settled) {
          ++A.unsettled_orbits;
          saddles_settled = false;
        }
        A.arcs.push_back(ends[sgn].pts);
      }
      if (A.n == 2 && ends[0].settled && ends[1].settled) {
        SaddlePath p;
        p.from = ends[0].target;
        p.to = ends[1].target;
        p.line.assign(ends[0].pts.rbegin(), ends[0].pts.rend());
        p.line.insert(p.line.end(), ends[1].pts.begin() + 1, ends[1].pts.end());
        paths.push_back(std::move(p));
      }
    } else if (e.unstable_dim == 2 && A.n == 2) {
      has_source = true;
      if (e.unstable_dirs.size() < 2) continue;  // spiral source: the region loop still applies
      const std::size_t per_side = std::max<std::size_t>(1, prm.source_orbits / 4);
      for (std::size_t k = 0; k < 4 * per_side; ++k) {
        const double t = -1.0 + 2.0 * static_cast<double>(k % per_side) / per_side;
        double a = 0, b = 0;
        switch (k / per_side) {
          case 0: a = t, b = -1; break;
          case 1: a = 1, b = t; break;
          case 2: a = -t, b = 1; break;
          default: a = -1, b = -t; break;
        }
        Vec start = e.z;
        for (std::size_t d = 0; d < 2; ++d)
          start[d] += prm.offset * (a * e.unstable_dirs[0][d] + b * e.unstable_dirs[1][d]);
        Orbit o = run_orbit(F, start, sinks, sink_ids, prm, spacing);
        o.pts.insert(o.pts.begin(), e.z);
        if (!o.settled) ++A.unsettled_orbits;
        A.saturation_time = std::max(A.saturation_time, o.time);
        A.arcs.push_back(std::move(o.pts));
      }
    }
  }

  if (A.n == 1) {
    double lo = kInf, hi = -kInf;
    for (const auto& e : eq.points) lo = std::min(lo, e.z[0]), hi = std::max(hi, e.z[0]);
    for (const auto& arc : A.arcs)
      for (const auto& p : arc) lo = std::min(lo, p[0]), hi = std::max(hi, p[0]);
    if (hi - lo <= 0.0) {
      A.points = {Vec{lo}};
    } else {
      for (std::size_t k = 0; k < prm.samples_1d; ++k)
        A.points.push_back({lo + (hi - lo) * static_cast<double>(k) / (prm.samples_1d - 1)});
    }
    return A;
  }

  // Two dimensions: try to close the saddle paths into a loop around a source.
  if (has_source && saddles_settled && !paths.empty()) {
    std::vector<bool> used(paths.size(), false);
    std::vector<Vec> loop = paths[0].line;
    used[0] = true;
    const int start = paths[0].from;
    int cur = paths[0].to;
    bool ok = true;
    while (cur != start) {
      std::size_t pick = paths.size();
      for (std::size_t q = 0; q < paths.size(); ++q)
        if (!used[q] && (paths[q].from == cur || paths[q].to == cur)) {
          pick = q;
          break;
        }
      if (pick == paths.size()) {
        ok = false;
        break;
      }
      used[pick] = true;
      std::vector<Vec> seg = paths[pick].line;
      if (paths[pick].to == cur) std::reverse(seg.begin(), seg.end());
      cur = paths[pick].from == cur ? paths[pick].to : paths[pick].from;
      loop.insert(loop.end(), seg.begin() + 1, seg.end());
    }
    ok = ok && std::all_of(used.begin(), used.end(), [](bool u) { return u; });
    if (ok) {
      A.filled = true;
      // The loop keeps the orbit resolution; samples are drawn from it uniformly.
      const std::size_t nb = std::min<std::size_t>(2048, prm.max_points / 4);
      A.boundary = loop;
      if (A.boundary.back() != A.boundary.front()) A.boundary.push_back(A.boundary.front());
      const auto samples = resample(loop, nb);
      A.points.assign(samples.begin(), samples.end() - 1);
      const double area = polygon_area(A.boundary);
      const std::size_t n_fill = prm.max_points - A.points.size();
      double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
      for (const auto& p : A.boundary) {
        xlo = std::min(xlo, p[0]), xhi = std::max(xhi, p[0]);
        ylo = std::min(ylo, p[1]), yhi = std::max(yhi, p[1]);
      }
      double h = std::sqrt(area / static_cast<double>(n_fill));
      for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<Vec> fill;
        for (double x = xlo + h / 2; x < xhi; x += h)
          for (double y = ylo + h / 2; y < yhi; y += h)
            if (point_in_polygon(A.boundary, x, y)) fill.push_back({x, y});
        if (fill.size() <= n_fill) {
          A.points.insert(A.points.end(), fill.begin(), fill.end());
          break;
        }
        h *= 1.05;
      }
      return A;
    }
  }

  // Curves only: arcs plus equilibria, resampled by arc length.
  double total = 0.0;
  for (const auto& arc : A.arcs) total += arc_length(arc);
  for (const auto& e : eq.points) A.points.push_back(e.z);
  if (total > 0.0) {
    const double budget = static_cast<double>(prm.max_points - A.points.size());
    for (const auto& arc : A.arcs) {
      const std::size_t cnt =
          std::max<std::size_t>(2, static_cast<std::size_t>(budget * arc_length(arc) / total));
      const auto r = resample(arc, cnt);
      A.points.insert(A.points.end(), r.begin(), r.end());
    }
  }
  return A;
}

// ------------------------------------------------------------- distances

HausdorffResult hausdorff(const std::vector<Vec>& A, const std::vector<Vec>& B,
                          std::span<const double> w) {
  if (A.empty() || B.empty()) throw InvalidInput("hausdorff: empty cloud");
  auto semi = [&](const std::vector<Vec>& X, const std::vector<Vec>& Y) {
    double s = 0.0;
    for (const auto& x : X) {
      double best = kInf;
      for (const auto& y : Y) {
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d += w[i] * (x[i] - y[i]) * (x[i] - y[i]);
        best = std::min(best, d);
      }
      s = std::max(s, best);
    }
    return std::sqrt(s);
  };
  return {semi(A, B), semi(B, A)};
}

double polyline_distance(std::span<const double> p, const std::vector<Vec>& line,
                         std::span<const double> w) {
  const std::size_t n = p.size();
  double best = kInf;
  if (line.size() == 1) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += w[i] * (p[i] - line[0][i]) * (p[i] - line[0][i]);
    return std::sqrt(d);
  }
  for (std::size_t s = 0; s + 1 < line.size(); ++s) {
    const Vec& a = line[s];
    const Vec& b = line[s + 1];
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += w[i] * (p[i] - a[i]) * (b[i] - a[i]);
      den += w[i] * (b[i] - a[i]) * (b[i] - a[i]);
    }
    const double t = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double q = a[i] + t * (b[i] - a[i]) - p[i];
      d += w[i] * q * q;
    }
    best = std::min(best, d);
  }
  return std::sqrt(best);
}

namespace {

double dist_to_set(std::span<const double> p, const AttractorCloud& B,
                   const std::vector<std::vector<Vec>>& curves, std::span<const double> w) {
  if (B.contains(p)) return 0.0;
  double best = kInf;
  for (const auto& c : curves) best = std::min(best, polyline_distance(p, c, w));
  return best;
}

}  // namespace

HausdorffResult set_distance(const AttractorCloud& A, const AttractorCloud& B,
                             std::span<const double> w) {
  if (A.points.empty() || B.points.empty()) throw InvalidInput("set_distance: empty cloud");
  const auto ca = A.curves(), cb = B.curves();
  HausdorffResult r;
  for (const auto& p : A.points) r.ab = std::max(r.ab, dist_to_set(p, B, cb, w));
  for (const auto& p : B.points) r.ba = std::max(r.ba, dist_to_set(p, A, ca, w));
  return r;
}

double invariance_residual(const AttractorCloud& A, const Map& T, std::span<const double> w) {
  const auto curves = A.curves();
  double r = 0.0;
  for (const auto& p : A.points) r = std::max(r, dist_to_set(T(p), A, curves, w));
  // Image of the set: map the curves (thinned) and, for a region, its boundary loop.
  AttractorCloud TA;
  TA.n = A.n;
  TA.filled = A.filled;
  std::vector<std::vector<Vec>> tcurves;
  for (const auto& c : curves) {
    const auto thin = c.size() > 16384 ? resample(c, 16384) : c;
    std::vector<Vec> img;
    for (const auto& p : thin) img.push_back(T(p));
    tcurves.push_back(std::move(img));
  }
  if (A.filled) {
    TA.boundary = tcurves.front();
    TA.boundary.back() = TA.boundary.front();
  }
  for (const auto& p : A.points) r = std::max(r, dist_to_set(p, TA, tcurves, w));
  return r;
}

// X^{1/2} distance between the manifold attractor and the lifted limit attractor.
// Every point on either side lives in span{phi_0..phi_{K-1}} + span{E e_i}, so candidate
// nearest points are located with n-dimensional quadratic forms in b(a)_i = <a, E e_i>.
// The winning distance is then recomputed from modal differences plus the exact energy of
// the part of E w beyond the first K modes, which avoids cancellation near zero.
HausdorffResult attractor_distance(const ManifoldSetup& ms, const GraphSection& s,
                                   const AttractorCloud& red, const AttractorCloud& lim) {
  const std::size_t n = ms.n(), m = ms.m(), K = n + m;
  const SpectralData& sd = ms.sd();
  const OperatorDisc& op = *sd.op;
  std::vector<Vec> lc(n), rest(n);
  for (std::size_t i = 0; i < n; ++i) {
    lc[i] = sd.coefficients(ms.cp.lift_basis[i], K);
    const Vec head = sd.reconstruct(lc[i]);
    rest[i] = ms.cp.lift_basis[i];
    for (std::size_t q = 0; q < rest[i].size(); ++q) rest[i][q] -= head[q];
  }
  Eigen::MatrixXd G(n, n), T(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      G(i, j) = energy_inner(op, ms.cp.lift_basis[i], ms.cp.lift_basis[j]);
      T(i, j) = energy_inner(op, rest[i], rest[j]);
    }
  const Eigen::MatrixXd Ginv = G.inverse();

  struct RPoint {
    Vec c;  // K eigen coefficients
    double N = 0.0;
    Vec b;
  };
  auto make_point = [&](std::span<const double> z) {
    RPoint p;
    p.c = ms.iso.to_eigen(z);
    const Vec tail = s.eval(z);
    p.c.insert(p.c.end(), tail.begin(), tail.end());
    p.b.assign(n, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const double lk = sd.eigenvalues[k] * p.c[k];
      p.N += lk * p.c[k];
      for (std::size_t i = 0; i < n; ++i) p.b[i] += lk * lc[i][k];
    }
    return p;
  };
  auto cross = [&](const RPoint& a, const RPoint& b) {
    double x = 0.0;
    for (std::size_t k = 0; k < K; ++k) x += sd.eigenvalues[k] * a.c[k] * b.c[k];
    return x;
  };
  auto wGw = [&](const Vec& u, const Vec& v) {
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) x += u[i] * G(i, j) * v[j];
    return x;
  };
  auto dotv = [](const Vec& a, const Vec& b) {
    double x = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) x += a[i] * b[i];
    return x;
  };
  // ||a - E w||^2 without cancellation; c are the K coefficients of a.
  auto precise = [&](const Vec& c, const Vec& wv) {
    double d = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double e = 0.0;
      for (std::size_t i = 0; i < n; ++i) e += wv[i] * lc[i][k];
      d += sd.eigenvalues[k] * (c[k] - e) * (c[k] - e);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d += wv[i] * T(i, j) * wv[j];
    return d;
  };
  auto lerp = [](const Vec& a, const Vec& b, double t) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  // Limit side in lifted coordinates w = u0 values.
  std::vector<std::vector<Vec>> lcurves;
  for (const auto& c : lim.curves()) {
    std::vector<Vec> wc;
    for (const auto& z : c) wc.push_back(ms.iso.to_limit(z));
    lcurves.push_back(std::move(wc));
  }
  // Region membership with a small tolerance so points on the loop count as inside.
  const Vec unit(n, 1.0);
  auto lim_contains_w = [&](const Vec& wv) {
    if (!lim.filled) return false;
    return point_in_polygon(lcurves.front(), wv[0], wv[1]) ||
           polyline_distance(wv, lcurves.front(), unit) < kOnLoop;
  };
  auto dist2_to_limit = [&](const RPoint& a) {
    double best = kInf;
    Vec wbest;
    auto consider = [&](const Vec& wv) {
      const double g = a.N - 2 * dotv(a.b, wv) + wGw(wv, wv);
      if (g < best) best = g, wbest = wv;
    };
    if (lim.filled) {
      Eigen::VectorXd bb(n);
      for (std::size_t i = 0; i < n; ++i) bb(i) = a.b[i];
      const Eigen::VectorXd ws = Ginv * bb;
      const Vec wv(ws.data(), ws.data() + n);
      if (lim_contains_w(wv)) consider(wv);
    }
    for (const auto& c : lcurves) {
      if (c.size() == 1) {
        consider(c[0]);
        continue;
      }
      for (std::size_t q = 0; q + 1 < c.size(); ++q) {
        Vec dw(n);
        for (std::size_t i = 0; i < n; ++i) dw[i] = c[q + 1][i] - c[q][i];
        const double qq = wGw(dw, dw);
        const double lin = dotv(a.b, dw) - wGw(c[q], dw);
        consider(lerp(c[q], c[q + 1], qq > 0 ? std::clamp(lin / qq, 0.0, 1.0) : 0.0));
      }
    }
    return precise(a.c, wbest);
  };

  // Reduced side: samples and curves with precomputed forms.
  std::vector<RPoint> rsamples;
  for (const auto& z : red.points) rsamples.push_back(make_point(z));
  struct RCurve {
    std::vector<RPoint> pts;
    Vec cross_next;
  };
  std::vector<RCurve> rcurves;
  for (const auto& c : red.curves()) {
    RCurve rc;
    for (const auto& z : c) rc.pts.push_back(make_point(z));
    for (std::size_t q = 0; q + 1 < rc.pts.size(); ++q) rc.cross_next.push_back(cross(rc.pts[q], rc.pts[q + 1]));
    rcurves.push_back(std::move(rc));
  }
  double zlo = kInf, zhi = -kInf;
  if (n == 1)
    for (const auto& z : red.points) zlo = std::min(zlo, z[0]), zhi = std::max(zhi, z[0]);

  auto dist2_to_reduced = [&](const Vec& wv) {
    const double wgw = wGw(wv, wv);
    double best = kInf;
    Vec cbest;
    auto consider = [&](double g, auto&& make_c) {
      if (g < best) best = g, cbest = make_c();
    };
    // Candidate directly above the Y-component of E w.
    Vec cy(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) cy[k] += wv[i] * lc[i][k];
    const Vec z0 = ms.iso.from_eigen(cy);
    const bool inside = n == 1 ? (z0[0] >= zlo - kOnLoop && z0[0] <= zhi + kOnLoop)
                               : red.filled && (red.contains(z0) ||
                                                polyline_distance(z0, red.boundary, unit) < kOnLoop);
    if (inside) {
      RPoint a = make_point(z0);
      consider(a.N - 2 * dotv(a.b, wv) + wgw, [&] { return a.c; });
    }
    for (const auto& rc : rcurves) {
      if (rc.pts.size() == 1) {
        consider(rc.pts[0].N - 2 * dotv(rc.pts[0].b, wv) + wgw, [&] { return rc.pts[0].c; });
        continue;
      }
      for (std::size_t q = 0; q + 1 < rc.pts.size(); ++q) {
        const RPoint& a = rc.pts[q];
        const RPoint& b = rc.pts[q + 1];
        const double c2 = a.N - 2 * rc.cross_next[q] + b.N;
        const double c1 = rc.cross_next[q] - a.N - (dotv(b.b, wv) - dotv(a.b, wv));
        const double t = c2 > 0 ? std::clamp(-c1 / c2, 0.0, 1.0) : 0.0;
        const double d = a.N + 2 * t * (rc.cross_next[q] - a.N) + t * t * c2 -
                         2 * ((1 - t) * dotv(a.b, wv) + t * dotv(b.b, wv)) + wgw;
        consider(d, [&] { return lerp(a.c, b.c, t); });
      }
    }
    if (red.filled) {
      // Interior samples of the graph region.
      for (const auto& a : rsamples)
        consider(a.N - 2 * dotv(a.b, wv) + wgw, [&] { return a.c; });
    }
    return precise(cbest, wv);
  };

  HausdorffResult r;
  for (const auto& a : rsamples) r.ab = std::max(r.ab, dist2_to_limit(a));
  for (const auto& z : lim.points) r.ba = std::max(r.ba, dist2_to_reduced(ms.iso.to_limit(z)));
  r.ab = std::sqrt(r.ab);
  r.ba = std::sqrt(r.ba);
  return r;
}

std::string cloud_csv(const AttractorCloud& A) {
  std::ostringstream os;
  os << "# attractor_cloud v1: kind is point or boundary\nkind";
  for (std::size_t k = 0; k < A.n; ++k) os << ",z_" << (k + 1);
  os << "\n" << std::setprecision(12);
  for (const auto& p : A.points) {
    os << "point";
    for (double v : p) os << "," << v;
    os << "\n";
  }
  for (const auto& p : A.boundary) {
    os << "boundary";
    for (double v : p) os << "," << v;
    os << "\n";
  }
  return os.str();
}

}  // namespace alab
