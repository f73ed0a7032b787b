#include "priorinfo/continuous.hpp"

#include <algorithm>
#include <cmath>

namespace priorinfo {

namespace {

// Point between `anchor` and `end` that approaches `end` as j grows.
double approach(double anchor, double end, int j, double scale) {
  if (std::isinf(end)) return anchor + std::copysign(scale * std::ldexp(1.0, j), end - anchor);
  return end + (anchor - end) * std::ldexp(1.0, -j);
}

constexpr int kMaxApproach = 1100;

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

}  // namespace

UnivariatePredictive::UnivariatePredictive(Spec spec) : spec_(std::move(spec)) {
  if (!(spec_.lo < spec_.hi)) throw DomainError("UnivariatePredictive: empty support");
  if (!spec_.cdf || !spec_.sf || !spec_.log_density)
    throw DomainError("UnivariatePredictive: cdf, sf and log_density are required");
  if (!(spec_.scale > 0.0)) throw DomainError("UnivariatePredictive: scale must be positive");
}

double UnivariatePredictive::cdf(double x) const {
  if (x <= spec_.lo) return 0.0;
  if (x >= spec_.hi) return 1.0;
  return spec_.cdf(x);
}

double UnivariatePredictive::sf(double x) const {
  if (x <= spec_.lo) return 1.0;
  if (x >= spec_.hi) return 0.0;
  return spec_.sf(x);
}

double UnivariatePredictive::partner(double x0) const {
  const double t = spec_.turning;
  if (x0 == t) return t;
  const bool left = x0 < t;
  const double far = left ? spec_.hi : spec_.lo;
  if (spec_.symmetric) {
    const double p = 2.0 * t - x0;
    return left ? std::min(p, far) : std::max(p, far);
  }
  const double target = spec_.log_density(x0);
  const bool rising_away = spec_.shape == Shape::Antimodal;
  // g changes sign between the turning point and the far end when a partner exists.
  auto g = [&](double y) { return spec_.log_density(y) - target; };
  if (std::isinf(target)) return far;
  auto crossed = [&](double v) { return rising_away ? v >= 0.0 : v <= 0.0; };
  double outer = t;
  bool found = false;
  if (std::isinf(far)) {
    for (int j = 0; j < kMaxApproach && !found; ++j) {
      outer = approach(t, far, j, spec_.scale);
      const double v = g(outer);
      if (std::isnan(v)) break;
      found = crossed(v);
    }
  } else {
    // Stay a hair inside a finite end, where the log density may be infinite.
    outer = far + (t - far) * 1e-15;
    if (outer == far) outer = std::nextafter(far, t);
    const double v = g(outer);
    found = !std::isnan(v) && crossed(v);
  }
  if (!found) return far;
  const double lo = left ? t : outer;
  const double hi = left ? outer : t;
  return find_root(g, lo, hi, 0.0, "density partner");
}

Region UnivariatePredictive::level_region(double x0) const {
  const double lo = spec_.lo, hi = spec_.hi, t = spec_.turning;
  x0 = std::min(std::max(x0, lo), hi);
  switch (spec_.shape) {
    case Shape::Flat:
      return {{lo, hi}};
    case Shape::Decreasing:
      return {{x0, hi}};
    case Shape::Increasing:
      return {{lo, x0}};
    case Shape::Unimodal: {
      if (x0 == t) return {{lo, hi}};
      const double p = partner(x0);
      if (x0 < t) return {{lo, x0}, {p, hi}};
      return {{lo, p}, {x0, hi}};
    }
    case Shape::Antimodal: {
      if (x0 == t) return {{t, t}};
      const double p = partner(x0);
      if (x0 < t) return {{x0, p}};
      return {{p, x0}};
    }
  }
  return {};
}

double UnivariatePredictive::mass(const Region& region) const {
  double total = 0.0;
  for (const auto& iv : region) {
    if (!(iv.lo < iv.hi)) continue;
    const bool open_left = iv.lo <= spec_.lo;
    const bool open_right = iv.hi >= spec_.hi;
    double m;
    if (open_left && open_right)
      m = 1.0;
    else if (open_left)
      m = cdf(iv.hi);
    else if (open_right)
      m = sf(iv.lo);
    else {
      const double cl = cdf(iv.lo);
      m = cl < 0.5 ? cdf(iv.hi) - cl : sf(iv.lo) - sf(iv.hi);
    }
    total += clamp01(m);
  }
  return clamp01(total);
}

double UnivariatePredictive::branch_for_mass(double gamma) const {
  const double lo = spec_.lo, hi = spec_.hi;
  double a = lo, b = hi, anchor = spec_.turning;
  int sign_a = -1, sign_b = 1;
  switch (spec_.shape) {
    case Shape::Unimodal:
      b = spec_.turning;
      break;
    case Shape::Antimodal:
      b = spec_.turning;
      sign_a = 1;
      sign_b = -1;
      break;
    case Shape::Decreasing:
      sign_a = 1;
      sign_b = -1;
      [[fallthrough]];
    case Shape::Increasing:
      if (std::isfinite(lo) && std::isfinite(hi))
        anchor = 0.5 * (lo + hi);
      else if (std::isfinite(lo))
        anchor = lo + spec_.scale;
      else if (std::isfinite(hi))
        anchor = hi - spec_.scale;
      break;
    case Shape::Flat:
      throw DomainError("branch_for_mass: flat density has no conflict region");
  }
  auto h = [&](double x) { return pvalue(x) - gamma; };
  auto has_sign = [](double v, int s) { return s > 0 ? v > 0.0 : v < 0.0; };

  double xl = anchor, xr = anchor;
  bool left_ok = false, right_ok = false;
  for (int j = 0; j < kMaxApproach && !left_ok; ++j) {
    xl = approach(anchor, a, j, spec_.scale);
    const double v = h(xl);
    if (v == 0.0) return xl;
    left_ok = has_sign(v, sign_a);
  }
  if (!left_ok) return a;
  for (int j = 0; j < kMaxApproach && !right_ok; ++j) {
    xr = approach(anchor, b, j, spec_.scale);
    const double v = h(xr);
    if (v == 0.0) return xr;
    right_ok = has_sign(v, sign_b);
  }
  if (!right_ok) return b;
  return find_root(h, std::min(xl, xr), std::max(xl, xr), 0.0, "conflict region boundary");
}

Interval UnivariatePredictive::branch() const {
  switch (spec_.shape) {
    case Shape::Unimodal:
    case Shape::Antimodal:
      return {spec_.lo, spec_.turning};
    default:
      return {spec_.lo, spec_.hi};
  }
}

bool UnivariatePredictive::pvalue_increases_on_branch() const {
  return spec_.shape == Shape::Unimodal || spec_.shape == Shape::Increasing;
}

Region UnivariatePredictive::conflict_region(double gamma) const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("conflict_region: gamma must lie in (0,1)");
  if (spec_.shape == Shape::Flat) return {};
  return level_region(branch_for_mass(gamma));
}

}  // namespace priorinfo
