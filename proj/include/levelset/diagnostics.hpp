#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "levelset/error.hpp"
#include "levelset/grid.hpp"
#include "levelset/maps.hpp"
#include "levelset/norms.hpp"

namespace lsk {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Per-storage-index validity flags (1 = usable).
using CellMask = std::vector<unsigned char>;

struct IsoContour {
  double level = 0.0;
  std::vector<Point2> points;
  bool closed = false;

  bool empty() const { return points.empty(); }
  double length() const {
    double L = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) L += distance(points[i - 1], points[i]);
    if (closed && points.size() > 1) L += distance(points.back(), points.front());
    return L;
  }
};

namespace detail {

struct ContourGraph {
  std::vector<Point2> pts;
  std::vector<std::array<int, 2>> nbr;

  void link(int a, int b) {
    auto put = [&](int p, int q) {
      auto& s = nbr[p];
      if (s[0] < 0) s[0] = q;
      else s[1] = q;
    };
    put(a, b);
    put(b, a);
  }
};

}  // namespace detail

// Marching squares over the interior cell centres of a 2D field. Linear
// interpolation along edges; saddles resolved with the four-corner mean.
// With a mask, squares touching an invalid corner are skipped.
inline std::vector<IsoContour> extract_isocontours(const ScalarField& f, double level, const CellMask* mask = nullptr) {
  const Grid& g = f.grid();
  if (g.dim() != 2) throw std::invalid_argument("extract_isocontours: 2D field required");
  const int nx = g.cells(0), ny = g.cells(1);
  const int H = (nx - 1) * ny;
  std::vector<int> edge_pt(static_cast<std::size_t>(H) + static_cast<std::size_t>(nx) * (ny - 1), -1);
  detail::ContourGraph graph;

  auto above = [&](int i, int j) { return f(i, j) >= level; };
  auto crossing = [&](int edge, int i0, int j0, int i1, int j1) {
    int& slot = edge_pt[edge];
    if (slot >= 0) return slot;
    const double a = f(i0, j0) - level, b = f(i1, j1) - level;
    const double t = a / (a - b);
    const double x0 = g.center(0, i0), y0 = g.center(1, j0);
    const double x1 = g.center(0, i1), y1 = g.center(1, j1);
    graph.pts.push_back({x0 + t * (x1 - x0), y0 + t * (y1 - y0)});
    graph.nbr.push_back({-1, -1});
    slot = static_cast<int>(graph.pts.size()) - 1;
    return slot;
  };

  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      if (mask) {
        const auto& m = *mask;
        if (!m[g.index(i, j)] || !m[g.index(i + 1, j)] || !m[g.index(i + 1, j + 1)] || !m[g.index(i, j + 1)])
          continue;
      }
      const bool c[4] = {above(i, j), above(i + 1, j), above(i + 1, j + 1), above(i, j + 1)};
      const int code = c[0] | (c[1] << 1) | (c[2] << 2) | (c[3] << 3);
      if (code == 0 || code == 15) continue;
      // Edges: 0 bottom, 1 right, 2 top, 3 left.
      auto edge = [&](int e) {
        switch (e) {
          case 0: return crossing(j * (nx - 1) + i, i, j, i + 1, j);
          case 1: return crossing(H + j * nx + i + 1, i + 1, j, i + 1, j + 1);
          case 2: return crossing((j + 1) * (nx - 1) + i, i, j + 1, i + 1, j + 1);
          default: return crossing(H + j * nx + i, i, j, i, j + 1);
        }
      };
      std::array<int, 4> cut{};
      int ncut = 0;
      for (int e = 0; e < 4; ++e)
        if (c[e] != c[(e + 1) % 4]) cut[ncut++] = e;
      if (ncut == 2) {
        graph.link(edge(cut[0]), edge(cut[1]));
      } else {
        const double mean = 0.25 * (f(i, j) + f(i + 1, j) + f(i + 1, j + 1) + f(i, j + 1));
        const bool centre = mean >= level;
        // Corners on the other side of the centre get cut off on their own.
        for (int k = 0; k < 4; ++k)
          if (c[k] != centre) graph.link(edge((k + 3) % 4), edge(k));
      }
    }

  std::vector<IsoContour> out;
  std::vector<char> seen(graph.pts.size(), 0);
  auto walk = [&](int start, bool closed) {
    IsoContour c{level, {}, closed};
    int prev = -1, cur = start;
    while (cur >= 0 && !seen[cur]) {
      seen[cur] = 1;
      c.points.push_back(graph.pts[cur]);
      const auto& nb = graph.nbr[cur];
      const int next = nb[0] != prev && nb[0] >= 0 && !seen[nb[0]] ? nb[0] : (nb[1] >= 0 && !seen[nb[1]] ? nb[1] : -1);
      prev = cur;
      cur = next;
    }
    out.push_back(std::move(c));
  };
  for (std::size_t p = 0; p < graph.pts.size(); ++p)
    if (!seen[p] && (graph.nbr[p][0] < 0 || graph.nbr[p][1] < 0)) walk(static_cast<int>(p), false);
  for (std::size_t p = 0; p < graph.pts.size(); ++p)
    if (!seen[p]) walk(static_cast<int>(p), true);
  return out;
}

// Evenly spaced by arc length. Closed contours do not repeat the start.
inline IsoContour resample(const IsoContour& c, int n) {
  if (c.points.size() < 2 || n < 2) return c;
  std::vector<Point2> pts = c.points;
  if (c.closed) pts.push_back(pts.front());
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + distance(pts[i - 1], pts[i]);
  const double L = s.back();
  IsoContour out{c.level, {}, c.closed};
  out.points.reserve(n);
  std::size_t seg = 1;
  for (int k = 0; k < n; ++k) {
    const double target = c.closed ? L * k / n : L * k / (n - 1);
    while (seg + 1 < s.size() && s[seg] < target) ++seg;
    const double span = s[seg] - s[seg - 1];
    const double t = span > 0.0 ? std::clamp((target - s[seg - 1]) / span, 0.0, 1.0) : 0.0;
    out.points.push_back({pts[seg - 1].x + t * (pts[seg].x - pts[seg - 1].x),
                          pts[seg - 1].y + t * (pts[seg].y - pts[seg - 1].y)});
  }
  return out;
}

// The longest chain, resampled to n_samples points (0 keeps the raw points).
inline IsoContour extract_isocontour(const ScalarField& f, double level, int n_samples = 0,
                                     const CellMask* mask = nullptr) {
  auto all = extract_isocontours(f, level, mask);
  if (all.empty()) return IsoContour{level, {}, false};
  auto best = std::max_element(all.begin(), all.end(),
                               [](const IsoContour& a, const IsoContour& b) { return a.length() < b.length(); });
  return n_samples > 0 ? resample(*best, n_samples) : *best;
}

// Distances from c to every crossing of the ray at angle theta.
inline std::vector<double> ray_hits(const std::vector<IsoContour>& cs, Point2 c, double theta) {
  const double dx = std::cos(theta), dy = std::sin(theta);
  std::vector<double> hits;
  auto test = [&](Point2 p, Point2 q) {
    const double ex = q.x - p.x, ey = q.y - p.y;
    const double den = dx * ey - dy * ex;
    if (den == 0.0) return;
    const double wx = p.x - c.x, wy = p.y - c.y;
    const double t = (wx * ey - wy * ex) / den;
    const double s = (wx * dy - wy * dx) / den;
    if (t > 0.0 && s >= 0.0 && s <= 1.0) hits.push_back(t);
  };
  for (const auto& k : cs) {
    for (std::size_t i = 1; i < k.points.size(); ++i) test(k.points[i - 1], k.points[i]);
    if (k.closed && k.points.size() > 2) test(k.points.back(), k.points.front());
  }
  return hits;
}

inline std::optional<double> ray_radius(const std::vector<IsoContour>& cs, Point2 c, double theta, double expected) {
  const auto hits = ray_hits(cs, c, theta);
  if (hits.empty()) return std::nullopt;
  return *std::min_element(hits.begin(), hits.end(), [&](double a, double b) {
    return std::abs(a - expected) < std::abs(b - expected);
  });
}

inline CellMask band_mask(const ScalarField& alpha, double lo, double hi) {
  CellMask m(alpha.values().size(), 0);
  alpha.grid().for_each_cell([&](int, int, int, std::size_t n) { m[n] = alpha[n] >= lo && alpha[n] <= hi; });
  return m;
}

struct CircleCurvatureError {
  double value = 0.0;         // mean |r_kappa - r_gamma|
  double radius = 0.0;        // numerical interface radius R_i
  double kappa_target = 0.0;  // 1 / (R_i + r)
  int samples = 0;
  int missing = 0;            // angles where either contour was absent
};

// Core of the circle curvature measurement on a representation field
// omega: R_i is the largest radius of the omega == interface_level
// contour, the target curvature is 1/(R_i + offset), and the error is
// the mean radial gap, sampled at n equally spaced polar angles, between
// the kappa == target contour and the omega == band_value contour.
inline CircleCurvatureError circle_curvature_error(const ScalarField& kappa, const CellMask& kappa_mask,
                                                   const ScalarField& omega, double interface_level,
                                                   double band_value, double offset, Point2 center, int n_samples) {
  require_same_grid(kappa, omega, "circle_curvature_error");
  const IsoContour iface = extract_isocontour(omega, interface_level);
  if (iface.empty()) throw DataIntegrityError("circle_curvature_error: no interface contour");
  CircleCurvatureError out;
  for (const auto& p : iface.points) out.radius = std::max(out.radius, distance(p, center));
  const double expected = out.radius + offset;
  out.kappa_target = 1.0 / expected;
  const auto band = extract_isocontours(omega, band_value);
  const auto kc = extract_isocontours(kappa, out.kappa_target, &kappa_mask);
  if (band.empty() || kc.empty())
    throw DataIntegrityError("circle_curvature_error: missing contour at the requested level");
  CompensatedSum sum;
  for (int l = 0; l < n_samples; ++l) {
    const double theta = 2.0 * std::numbers::pi * (l + 0.5) / n_samples;
    const auto rg = ray_radius(band, center, theta, expected);
    const auto rk = ray_radius(kc, center, theta, expected);
    if (!rg || !rk) {
      ++out.missing;
      continue;
    }
    sum.add(std::abs(*rk - *rg));
    ++out.samples;
  }
  if (out.samples == 0) throw DataIntegrityError("circle_curvature_error: contours never cross the sample rays");
  out.value = sum.value() / out.samples;
  return out;
}

enum class Representation { Alpha, Psi0 };

// Radial offset of the alpha == level surface from the interface.
inline double band_offset(double level, const InterfaceParams& p) {
  return p.eps_h() * std::log((level + kUnderflowGuard) / (1.0 - level + kUnderflowGuard));
}

inline CircleCurvatureError circle_curvature_error(const ScalarField& kappa, const ScalarField& alpha,
                                                   const InterfaceParams& p, double band_level, Point2 center,
                                                   Representation rep = Representation::Psi0, int n_samples = 0,
                                                   const CellMask* kappa_mask = nullptr) {
  if (!(band_level > 0.0 && band_level < 1.0))
    throw std::invalid_argument("circle_curvature_error: band level must lie in (0,1)");
  const int ns = n_samples > 0 ? n_samples : 4 * alpha.grid().cells(0);
  const CellMask mask = kappa_mask ? *kappa_mask : band_mask(alpha, 0.01, 0.99);
  const double r = band_offset(band_level, p);
  if (rep == Representation::Alpha) return circle_curvature_error(kappa, mask, alpha, 0.5, band_level, r, center, ns);
  return circle_curvature_error(kappa, mask, psi0_field(alpha, p), 0.0, r, r, center, ns);
}

struct BandNorms {
  double L1 = 0.0;
  double L2 = 0.0;           // root mean square
  double L2_verbatim = 0.0;  // sqrt(sum)/N, as printed in the source formula
  double Linf = 0.0;
  std::size_t count = 0;
};

inline BandNorms band_curvature_norms(const ScalarField& kappa_num, const ScalarField& kappa_exact,
                                      const ScalarField& alpha, double lo = 0.05, double hi = 0.95) {
  require_same_grid(kappa_num, kappa_exact, "band_curvature_norms");
  require_same_grid(kappa_num, alpha, "band_curvature_norms");
  CompensatedSum s1, s2;
  BandNorms b;
  alpha.grid().for_each_cell([&](int, int, int, std::size_t n) {
    if (alpha[n] < lo || alpha[n] > hi) return;
    const double e = std::abs(kappa_num[n] - kappa_exact[n]);
    s1.add(e);
    s2.add(e * e);
    b.Linf = std::max(b.Linf, e);
    ++b.count;
  });
  if (b.count == 0) throw DataIntegrityError("band_curvature_norms: empty band");
  const double N = static_cast<double>(b.count);
  b.L1 = s1.value() / N;
  b.L2 = std::sqrt(s2.value() / N);
  b.L2_verbatim = std::sqrt(s2.value()) / N;
  return b;
}

// Largest |err| over points where omega crosses `level` along a grid
// line between neighbouring cell centres. On such a point trilinear
// sampling reduces to the linear blend of the two end cells.
inline double interface_max_error(const ScalarField& err, const ScalarField& omega, double level) {
  require_same_grid(err, omega, "interface_max_error");
  const Grid& g = omega.grid();
  double worst = 0.0;
  bool any = false;
  for (int a = 0; a < g.dim(); ++a) {
    const std::ptrdiff_t s = g.stride(a);
    g.for_each_cell([&](int i, int j, int k, std::size_t n) {
      const int c = a == 0 ? i : (a == 1 ? j : k);
      if (c + 1 >= g.cells(a)) return;
      const double u = omega[n] - level, v = omega[n + s] - level;
      if ((u >= 0.0) == (v >= 0.0)) return;
      const double t = u / (u - v);
      worst = std::max(worst, std::abs((1.0 - t) * err[n] + t * err[n + s]));
      any = true;
    });
  }
  if (!any) throw DataIntegrityError("interface_max_error: no interface crossing");
  return worst;
}

// Mean | |x_l - x0| - R | over the contour points.
inline double position_error(const IsoContour& c, Point2 center, double radius) {
  if (c.empty()) throw DataIntegrityError("position_error: empty contour");
  CompensatedSum s;
  for (const auto& p : c.points) s.add(std::abs(distance(p, center) - radius));
  return s.value() / static_cast<double>(c.points.size());
}

enum class AreaRegion { R1, R2 };
enum class AreaMetric { MassDifference, AbsDifference };

// Centroid of the inner phase; the disc carries alpha ~ 0, so the
// weights are 1 - alpha.
inline Point2 inner_centroid(const ScalarField& alpha) {
  const Grid& g = alpha.grid();
  CompensatedSum w, wx, wy;
  g.for_each_cell([&](int i, int j, int, std::size_t n) {
    const double q = 1.0 - alpha[n];
    w.add(q);
    wx.add(q * g.center(0, i));
    wy.add(q * g.center(1, j));
  });
  if (!(w.value() > 0.0)) throw DataIntegrityError("inner_centroid: no inner phase");
  return {wx.value() / w.value(), wy.value() / w.value()};
}

inline bool in_region(double alpha, AreaRegion region, const InterfaceParams& p) {
  if (region == AreaRegion::R1) return 1.0 - alpha >= 0.5;
  return psi0_from_alpha(alpha, p) <= 8.0 * p.eps_h();
}

inline ScalarField circle_alpha(const Grid& g, Point2 center, double R, const InterfaceParams& p) {
  ScalarField a(g);
  a.assign([&](double x, double y, double) { return alpha_from_psi0(std::hypot(x - center.x, y - center.y) - R, p); });
  fill_ghosts(a);
  return a;
}

// Inner-phase area over a region: integral of (1 - alpha).
inline double region_area(const ScalarField& alpha, AreaRegion region, const InterfaceParams& p) {
  CompensatedSum s;
  alpha.grid().for_each_cell([&](int, int, int, std::size_t n) {
    if (in_region(alpha[n], region, p)) s.add(1.0 - alpha[n]);
  });
  return s.value() * alpha.grid().cell_volume();
}

// Area error of a circular inner phase of radius R against the exact
// profile centred on the numerical centroid, normalised by pi R^2.
inline double area_error(const ScalarField& alpha, double R, const InterfaceParams& p, AreaRegion region,
                         AreaMetric metric = AreaMetric::MassDifference) {
  const Point2 c = inner_centroid(alpha);
  const ScalarField exact = circle_alpha(alpha.grid(), c, R, p);
  const double norm = std::numbers::pi * R * R;
  if (metric == AreaMetric::MassDifference)
    return std::abs(region_area(alpha, region, p) - region_area(exact, region, p)) / norm;
  CompensatedSum s;
  alpha.grid().for_each_cell([&](int, int, int, std::size_t n) {
    if (in_region(alpha[n], region, p)) s.add(std::abs(alpha[n] - exact[n]));
  });
  return s.value() * alpha.grid().cell_volume() / norm;
}

struct AreaSeries {
  std::vector<double> En;
  double Et = 0.0;  // mean of En
};

inline AreaSeries area_error_series(std::span<const ScalarField> alpha_steps, double R, const InterfaceParams& p,
                                    AreaRegion region, AreaMetric metric = AreaMetric::MassDifference) {
  AreaSeries s;
  CompensatedSum sum;
  for (const auto& a : alpha_steps) {
    s.En.push_back(area_error(a, R, p, region, metric));
    sum.add(s.En.back());
  }
  if (!s.En.empty()) s.Et = sum.value() / static_cast<double>(s.En.size());
  return s;
}

// log(e_coarse/e_fine)/log(ratio).
inline double observed_order(double e_coarse, double e_fine, double ratio = 2.0) {
  return std::log(e_coarse / e_fine) / std::log(ratio);
}

// Least-squares slope of log e against log h.
inline double fitted_order(std::span<const double> h, std::span<const double> e) {
  if (h.size() != e.size() || h.size() < 2) throw std::invalid_argument("fitted_order: need >= 2 matching points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    mx += std::log(h[i]) / n;
    my += std::log(e[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(e[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct ConvergenceRow {
  std::string grid;
  int cells = 0;
  double eps_h = 0.0;
  std::string mapping;
  std::string norm;
  double value = 0.0;
  std::optional<double> observed_order;
};

struct DiagnosticsReport {
  std::map<std::string, std::vector<double>> series;
  std::vector<ConvergenceRow> convergence_rows;

  void record(const std::string& name, double v) { series[name].push_back(v); }
  bool all_finite() const {
    for (const auto& [k, v] : series)
      for (double x : v)
        if (!std::isfinite(x)) return false;
    for (const auto& r : convergence_rows)
      if (!std::isfinite(r.value)) return false;
    return true;
  }
};

// Observed orders between consecutive rows sharing mapping and norm.
inline void fill_observed_orders(std::vector<ConvergenceRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i; j-- > 0;) {
      if (rows[j].mapping == rows[i].mapping && rows[j].norm == rows[i].norm) {
        if (rows[j].value > 0.0 && rows[i].value > 0.0)
          rows[i].observed_order = observed_order(rows[j].value, rows[i].value,
                                                  static_cast<double>(rows[i].cells) / rows[j].cells);
        break;
      }
    }
  }
}

}  // namespace lsk
