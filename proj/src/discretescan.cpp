#include "priorinfo/discretescan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "priorinfo/parallel.hpp"

namespace priorinfo {

namespace {

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_axis(const Axis& a) {
  if (a.steps < 1) throw RangeError("axis '" + a.name + "' needs at least one step");
  if (!std::isfinite(a.lo) || !std::isfinite(a.hi)) throw RangeError("axis '" + a.name + "' must be finite");
  if (a.steps > 1 && !(a.lo < a.hi)) throw RangeError("axis '" + a.name + "' needs lo < hi");
}

void check_positive_axis(const Axis& a) {
  check_axis(a);
  if (!(a.lo > 0.0)) throw RangeError("axis '" + a.name + "' must be positive");
}

CellClass classify(bool uniform, bool level) {
  if (uniform) return CellClass::UniformlyWi;
  return level ? CellClass::WiAtLevel : CellClass::NotWi;
}

RegionScan empty_scan(const Axis& x, const Axis& y, double gamma, std::string model, std::string base,
                      Method method) {
  RegionScan s;
  s.x = x;
  s.y = y;
  s.gamma = gamma;
  s.model = std::move(model);
  s.base = std::move(base);
  const std::size_t cells = std::size_t(x.steps) * std::size_t(y.steps);
  s.cells.assign(cells, CellClass::NotWi);
  s.evidence.assign(cells, 0.0);
  s.methods.assign(cells, method);
  return s;
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0,1)");
}

// Reduction of one logistic alternative against a prebuilt base ladder.
double logistic_cell_reduction(const Logistic& design, const PmfLadder& base, double quantile, AltFamily family,
                               double s0, double s1, const LogisticRule& rule, double t_dof) {
  const PmfLadder alt(logistic_predictive_pmf(design, logistic_alternative(family, s0, s1, t_dof), rule));
  return 1.0 - discrete_conflict_rate(base, alt, quantile) / quantile;
}

}  // namespace

double Axis::value(int i) const {
  if (steps <= 1) return lo;
  if (i == steps - 1) return hi;
  return lo + (hi - lo) * double(i) / double(steps - 1);
}

std::string cell_class_name(CellClass c) {
  switch (c) {
    case CellClass::UniformlyWi: return "uniformly-wi";
    case CellClass::WiAtLevel: return "wi-at-level";
    case CellClass::NotWi: return "not-wi";
    case CellClass::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

// -- beta-binomial ----------------------------------------------------------------

RegionScan betabinom_scan(long n, bool asymptotic, const BetaPrior& base, double gamma, const Axis& alpha,
                          const Axis& beta) {
  check_gamma(gamma);
  check_positive_axis(alpha);
  check_positive_axis(beta);
  const SamplingModel model = Binomial{n, asymptotic};
  validate(model, base);
  char desc[64];
  std::snprintf(desc, sizeof desc, "Beta(%g,%g)", base.alpha, base.beta);
  RegionScan scan = empty_scan(alpha, beta, gamma, model_name(model), desc,
                               asymptotic ? Method::ClosedForm : Method::Enumeration);
  const std::size_t ny = std::size_t(beta.steps);

  if (asymptotic) {
    parallel_for(scan.cells.size(), [&](std::size_t c) {
      const PriorSpec alt = beta_prior(alpha.value(int(c / ny)), beta.value(int(c % ny)));
      const WiVerdict lv = check_at_level(model, base, alt, gamma);
      const WiVerdict uv = is_uniformly_wi(model, base, alt);
      scan.cells[c] = classify(uv.classification == WiClass::UniformlyWi, lv.weakly_informative());
      scan.evidence[c] = lv.conflict_rate;
    });
    return scan;
  }
  const PmfLadder base_ladder(binomial_predictive_pmf(n, base));
  const double quantile = base_ladder.quantile(gamma);
  parallel_for(scan.cells.size(), [&](std::size_t c) {
    const PmfLadder alt(binomial_predictive_pmf(n, beta_prior(alpha.value(int(c / ny)), beta.value(int(c % ny)))));
    const double rate = discrete_conflict_rate(base_ladder, alt, quantile);
    scan.cells[c] = classify(discrete_uniform(base_ladder, alt).uniform, leq_tied(rate, quantile));
    scan.evidence[c] = rate;
  });
  return scan;
}

double symmetric_boundary(long n, const BetaPrior& base, double gamma, bool uniform, double a_ok, double a_bad,
                          double tol) {
  check_gamma(gamma);
  const PmfLadder base_ladder(binomial_predictive_pmf(n, base));
  const double quantile = base_ladder.quantile(gamma);
  auto passes = [&](double a) {
    const PmfLadder alt(binomial_predictive_pmf(n, beta_prior(a, a)));
    if (uniform) return discrete_uniform(base_ladder, alt).uniform;
    return leq_tied(discrete_conflict_rate(base_ladder, alt, quantile), quantile);
  };
  if (!passes(a_ok)) throw DomainError("symmetric_boundary: the starting point does not pass");
  if (passes(a_bad)) throw DomainError("symmetric_boundary: the far point passes too");
  while (std::abs(a_bad - a_ok) > tol) {
    const double mid = 0.5 * (a_ok + a_bad);
    (passes(mid) ? a_ok : a_bad) = mid;
  }
  return a_ok;
}

// -- logistic -------------------------------------------------------------------

std::string alt_family_name(AltFamily f) {
  switch (f) {
    case AltFamily::NormalNormal: return "normal-normal";
    case AltFamily::TT: return "t-t";
    case AltFamily::NormalT: return "normal-t";
    case AltFamily::TNormal: return "t-normal";
  }
  return "unknown";
}

AltFamily parse_alt_family(const std::string& name) {
  for (AltFamily f : {AltFamily::NormalNormal, AltFamily::TT, AltFamily::NormalT, AltFamily::TNormal})
    if (alt_family_name(f) == name) return f;
  throw DomainError("unknown prior family '" + name + "' (expected normal-normal, t-t, normal-t or t-normal)");
}

ProductPrior logistic_alternative(AltFamily family, double sigma0, double sigma1, double t_dof) {
  const bool t0 = family == AltFamily::TT || family == AltFamily::TNormal;
  const bool t1 = family == AltFamily::TT || family == AltFamily::NormalT;
  auto make = [&](bool t, double s) -> ScalarPrior {
    if (t) return student_t_prior(0.0, s * s, t_dof);
    return normal_prior(0.0, s * s);
  };
  return product_prior({make(t0, sigma0), make(t1, sigma1)});
}

RegionScan logistic_scan(const Logistic& design, const ProductPrior& base, AltFamily family, double gamma,
                         const Axis& sigma0, const Axis& sigma1, const LogisticRule& rule, double t_dof) {
  check_gamma(gamma);
  check_positive_axis(sigma0);
  check_positive_axis(sigma1);
  if (design.slopes() != 1) throw DomainError("logistic scans take a single-predictor design");
  validate(design, base);
  RegionScan scan = empty_scan(sigma0, sigma1, gamma, model_name(design), prior_name(base), Method::Quadrature);
  const PmfLadder base_ladder(logistic_predictive_pmf(design, base, rule));
  const double quantile = base_ladder.quantile(gamma);
  const std::size_t ny = std::size_t(sigma1.steps);
  parallel_for(scan.cells.size(), [&](std::size_t c) {
    const ProductPrior alt = logistic_alternative(family, sigma0.value(int(c / ny)), sigma1.value(int(c % ny)), t_dof);
    const PmfLadder alt_ladder(logistic_predictive_pmf(design, alt, rule));
    const double rate = discrete_conflict_rate(base_ladder, alt_ladder, quantile);
    scan.cells[c] = classify(discrete_uniform(base_ladder, alt_ladder).uniform, leq_tied(rate, quantile));
    scan.evidence[c] = rate;
  });
  return scan;
}

ReductionField logistic_reduction(const Logistic& design, const ProductPrior& base, AltFamily family,
                                  double gamma, const Axis& sigma0, const Axis& sigma1, const LogisticRule& rule,
                                  double t_dof) {
  check_gamma(gamma);
  check_positive_axis(sigma0);
  check_positive_axis(sigma1);
  if (design.slopes() != 1) throw DomainError("logistic scans take a single-predictor design");
  validate(design, base);
  ReductionField f;
  f.x = sigma0;
  f.y = sigma1;
  f.gamma = gamma;
  const PmfLadder base_ladder(logistic_predictive_pmf(design, base, rule));
  f.quantile = base_ladder.quantile(gamma);
  f.values.resize(sigma0.steps, sigma1.steps);
  const std::size_t ny = std::size_t(sigma1.steps);
  parallel_for(std::size_t(sigma0.steps) * ny, [&](std::size_t c) {
    const int i = int(c / ny), j = int(c % ny);
    f.values(i, j) = logistic_cell_reduction(design, base_ladder, f.quantile, family, sigma0.value(i),
                                             sigma1.value(j), rule, t_dof);
  });
  return f;
}

SliceMax logistic_slice_argmax(const Logistic& design, const ProductPrior& base, AltFamily family, double gamma,
                               bool vary_intercept, double fixed, const Axis& axis, const LogisticRule& rule,
                               double t_dof, double edge_tol, int local_points) {
  check_gamma(gamma);
  check_positive_axis(axis);
  if (axis.steps < 2) throw RangeError("slice axis needs at least two points");
  if (!(fixed > 0.0)) throw RangeError("fixed scale must be positive");
  validate(design, base);
  const PmfLadder base_ladder(logistic_predictive_pmf(design, base, rule));
  const double quantile = base_ladder.quantile(gamma);
  auto red = [&](double s) {
    return vary_intercept ? logistic_cell_reduction(design, base_ladder, quantile, family, s, fixed, rule, t_dof)
                          : logistic_cell_reduction(design, base_ladder, quantile, family, fixed, s, rule, t_dof);
  };
  SliceMax out;
  const std::size_t m = std::size_t(axis.steps);
  out.grid.resize(m);
  out.reductions.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.grid[i] = axis.value(int(i));
  parallel_for(m, [&](std::size_t i) { out.reductions[i] = red(out.grid[i]); });

  // The reduction is piecewise constant with narrow steps, so the coarse
  // maximum is resampled densely between its neighbouring grid points.
  auto widest_top = [](const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[best] && !tied(v[i], v[best])) best = i;
    std::size_t lo = best, hi = best;
    while (lo > 0 && tied(v[lo - 1], v[best])) --lo;
    while (hi + 1 < v.size() && tied(v[hi + 1], v[best])) ++hi;
    return std::array<std::size_t, 2>{lo, hi};
  };
  const auto coarse = widest_top(out.reductions);
  const double from = out.grid[coarse[0] > 0 ? coarse[0] - 1 : 0];
  const double to = out.grid[coarse[1] + 1 < m ? coarse[1] + 1 : m - 1];
  const std::size_t k = std::size_t(std::max(local_points, 3));
  std::vector<double> xs(k), vs(k);
  for (std::size_t i = 0; i < k; ++i) xs[i] = from + (to - from) * double(i) / double(k - 1);
  xs[0] = from;
  xs[k - 1] = to;
  parallel_for(k, [&](std::size_t i) { vs[i] = red(xs[i]); });
  const auto [lo, hi] = widest_top(vs);
  const double top = vs[lo];

  // Move each plateau edge toward its neighbouring sample while the value holds.
  auto refine = [&](double inside, double outside) {
    while (std::abs(outside - inside) > edge_tol) {
      const double mid = 0.5 * (inside + outside);
      (tied(red(mid), top) ? inside : outside) = mid;
    }
    return inside;
  };
  out.plateau_lo = lo > 0 ? refine(xs[lo], xs[lo - 1]) : xs[lo];
  out.plateau_hi = hi + 1 < k ? refine(xs[hi], xs[hi + 1]) : xs[hi];
  out.argmax = 0.5 * (out.plateau_lo + out.plateau_hi);
  out.max_reduction = top;
  return out;
}

// -- multinomial ------------------------------------------------------------------

RegionScan multinomial_ancillary_scan(long n, std::array<long, 2> u1, std::array<long, 2> u2,
                                      const BetaPrior& base, double gamma, const Axis& alpha, const Axis& beta) {
  check_gamma(gamma);
  check_positive_axis(alpha);
  check_positive_axis(beta);
  const SamplingModel model = ShiftedMultinomial{n};
  validate(model, base);
  for (const auto& u : {u1, u2})
    if (u[0] < 0 || u[1] < 0 || u[0] + u[1] != n)
      throw RangeError("ancillary values must be two nonnegative counts summing to n");
  char desc[64];
  std::snprintf(desc, sizeof desc, "Beta(%g,%g)", base.alpha, base.beta);
  RegionScan scan = empty_scan(alpha, beta, gamma, model_name(model), desc, Method::Enumeration);
  const ConditionalLattice lat1(AncillaryKind::U1, u1), lat2(AncillaryKind::U2, u2);
  const PmfLadder b1(conditional_predictive_pmf(lat1, base)), b2(conditional_predictive_pmf(lat2, base));
  const double q1 = b1.quantile(gamma), q2 = b2.quantile(gamma);
  const std::size_t ny = std::size_t(beta.steps);
  parallel_for(scan.cells.size(), [&](std::size_t c) {
    const BetaPrior alt = beta_prior(alpha.value(int(c / ny)), beta.value(int(c % ny)));
    const PmfLadder a1(conditional_predictive_pmf(lat1, alt)), a2(conditional_predictive_pmf(lat2, alt));
    const double r1 = discrete_conflict_rate(b1, a1, q1), r2 = discrete_conflict_rate(b2, a2, q2);
    const bool level = leq_tied(r1, q1) && leq_tied(r2, q2);
    const bool uniform = discrete_uniform(b1, a1).uniform && discrete_uniform(b2, a2).uniform;
    scan.cells[c] = classify(uniform, level);
    scan.evidence[c] = std::max(r1 / q1, r2 / q2);
  });
  return scan;
}

// -- output -------------------------------------------------------------------------

void write_scan_csv(std::ostream& os, const RegionScan& scan) {
  os << scan.x.name << ',' << scan.y.name << ",classification,method,pvalue_evidence\n";
  for (int i = 0; i < scan.x.steps; ++i)
    for (int j = 0; j < scan.y.steps; ++j) {
      const std::size_t c = std::size_t(i) * std::size_t(scan.y.steps) + std::size_t(j);
      os << full_precision(scan.x.value(i)) << ',' << full_precision(scan.y.value(j)) << ','
         << cell_class_name(scan.cells[c]) << ',' << method_name(scan.methods[c]) << ','
         << full_precision(scan.evidence[c]) << '\n';
    }
}

void write_reduction_csv(std::ostream& os, const ReductionField& field) {
  os << field.x.name << ',' << field.y.name << ",reduction\n";
  for (int i = 0; i < field.x.steps; ++i)
    for (int j = 0; j < field.y.steps; ++j)
      os << full_precision(field.x.value(i)) << ',' << full_precision(field.y.value(j)) << ','
         << full_precision(field.values(i, j)) << '\n';
}

std::vector<Polyline> contour_lines(const ReductionField& field, const std::vector<double>& levels) {
  const int nx = field.x.steps, ny = field.y.steps;
  std::vector<Polyline> out;
  if (nx < 2 || ny < 2) return out;
  // A crossing lies on a grid edge; edges are keyed so that neighbouring
  // squares share the same key for the same point.
  auto hkey = [&](int i, int j) { return (std::int64_t(i) * ny + j) * 2; };      // (i,j)-(i+1,j)
  auto vkey = [&](int i, int j) { return (std::int64_t(i) * ny + j) * 2 + 1; };  // (i,j)-(i,j+1)

  for (double level : levels) {
    std::map<std::int64_t, std::array<double, 2>> point;
    std::vector<std::array<std::int64_t, 2>> segments;
    auto cross = [&](std::int64_t key, double x0, double y0, double v0, double x1, double y1, double v1) {
      const double t = (level - v0) / (v1 - v0);
      point[key] = {x0 + t * (x1 - x0), y0 + t * (y1 - y0)};
      return key;
    };
    for (int i = 0; i + 1 < nx; ++i)
      for (int j = 0; j + 1 < ny; ++j) {
        const double x0 = field.x.value(i), x1 = field.x.value(i + 1);
        const double y0 = field.y.value(j), y1 = field.y.value(j + 1);
        const double v[4] = {field.values(i, j), field.values(i + 1, j), field.values(i + 1, j + 1),
                             field.values(i, j + 1)};
        const bool in[4] = {v[0] >= level, v[1] >= level, v[2] >= level, v[3] >= level};
        std::int64_t e[4] = {-1, -1, -1, -1};
        if (in[0] != in[1]) e[0] = cross(hkey(i, j), x0, y0, v[0], x1, y0, v[1]);
        if (in[1] != in[2]) e[1] = cross(vkey(i + 1, j), x1, y0, v[1], x1, y1, v[2]);
        if (in[2] != in[3]) e[2] = cross(hkey(i, j + 1), x1, y1, v[2], x0, y1, v[3]);
        if (in[3] != in[0]) e[3] = cross(vkey(i, j), x0, y1, v[3], x0, y0, v[0]);
        std::vector<std::int64_t> hit;
        for (auto k : e)
          if (k >= 0) hit.push_back(k);
        if (hit.size() == 2) {
          segments.push_back({hit[0], hit[1]});
        } else if (hit.size() == 4) {
          const bool centre = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= level;
          if (centre == in[0]) {
            segments.push_back({e[0], e[1]});
            segments.push_back({e[2], e[3]});
          } else {
            segments.push_back({e[3], e[0]});
            segments.push_back({e[1], e[2]});
          }
        }
      }

    std::map<std::int64_t, std::vector<std::size_t>> touching;
    for (std::size_t s = 0; s < segments.size(); ++s)
      for (auto k : segments[s]) touching[k].push_back(s);
    std::vector<bool> used(segments.size(), false);
    auto walk = [&](std::size_t start, std::int64_t from) {
      Polyline line;
      line.level = level;
      line.points.push_back(point[from]);
      std::int64_t at = from;
      std::size_t s = start;
      for (;;) {
        used[s] = true;
        const std::int64_t next = segments[s][0] == at ? segments[s][1] : segments[s][0];
        line.points.push_back(point[next]);
        at = next;
        std::size_t follow = segments.size();
        for (std::size_t t : touching[at])
          if (!used[t]) follow = t;
        if (follow == segments.size()) break;
        s = follow;
      }
      out.push_back(std::move(line));
    };
    // Open curves start at points with a single segment; what remains are loops.
    for (const auto& [key, segs] : touching)
      if (segs.size() == 1 && !used[segs[0]]) walk(segs[0], key);
    for (std::size_t s = 0; s < segments.size(); ++s)
      if (!used[s]) walk(s, segments[s][0]);
  }
  return out;
}

void write_contours_csv(std::ostream& os, const std::vector<Polyline>& lines) {
  os << "level,polyline,x,y\n";
  for (std::size_t k = 0; k < lines.size(); ++k)
    for (const auto& p : lines[k].points)
      os << full_precision(lines[k].level) << ',' << k << ',' << full_precision(p[0]) << ',' << full_precision(p[1])
         << '\n';
}

}  // namespace priorinfo
