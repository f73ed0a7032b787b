#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "priorinfo/weakinfo.hpp"

namespace priorinfo {

/// Evenly spaced parameter values lo, ..., hi (steps >= 2 points, or the
/// single value lo when steps == 1).
struct Axis {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int steps = 50;

  double value(int i) const;
};

enum class CellClass { UniformlyWi, WiAtLevel, NotWi, Indeterminate };
std::string cell_class_name(CellClass c);

struct RegionScan {
  Axis x;
  Axis y;
  double gamma = 0.05;
  std::string model;
  std::string base;
  std::vector<CellClass> cells;  // x index slowest: cell(i, j) = cells[i * y.steps + j]
  std::vector<double> evidence;  // conflict rate at the level, per cell
  std::vector<Method> methods;
  std::uint64_t seed = 0;

  CellClass cell(int i, int j) const { return cells[std::size_t(i) * std::size_t(y.steps) + std::size_t(j)]; }
};

struct ReductionField {
  Axis x;
  Axis y;
  double gamma = 0.05;
  double quantile = 0.0;
  Eigen::MatrixXd values;  // values(i, j) at (x.value(i), y.value(j))
};

// ---------------------------------------------------------------------------
// Beta-binomial
// ---------------------------------------------------------------------------

/// Classifies Beta(alpha, beta) alternatives against a beta base for
/// Binomial(n); `asymptotic` compares prior densities directly.
RegionScan betabinom_scan(long n, bool asymptotic, const BetaPrior& base, double gamma, const Axis& alpha,
                          const Axis& beta);

/// Largest a in [a_ok, a_bad] for which Beta(a, a) stays weakly informative
/// (uniformly, or at level gamma), found by bisection from a passing a_ok to
/// a failing a_bad.
double symmetric_boundary(long n, const BetaPrior& base, double gamma, bool uniform, double a_ok, double a_bad,
                          double tol = 1e-6);

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

/// Alternative priors N or t on each coefficient: intercept family first.
enum class AltFamily { NormalNormal, TT, NormalT, TNormal };
std::string alt_family_name(AltFamily f);
AltFamily parse_alt_family(const std::string& name);

/// Product prior with zero locations and the given scales for the family.
ProductPrior logistic_alternative(AltFamily family, double sigma0, double sigma1, double t_dof = 1.0);

RegionScan logistic_scan(const Logistic& design, const ProductPrior& base, AltFamily family, double gamma,
                         const Axis& sigma0, const Axis& sigma1, const LogisticRule& rule = {},
                         double t_dof = 1.0);

ReductionField logistic_reduction(const Logistic& design, const ProductPrior& base, AltFamily family,
                                  double gamma, const Axis& sigma0, const Axis& sigma1,
                                  const LogisticRule& rule = {}, double t_dof = 1.0);

/// Maximizer of the reduction along one axis with the other held fixed. The
/// reduction is piecewise constant, so the maximum is a plateau; its edges
/// are refined by bisection and the reported argmax is its midpoint. The best
/// coarse plateau is resampled at `local_points` before the edges are refined.
struct SliceMax {
  double argmax = 0.0;
  double max_reduction = 0.0;
  double plateau_lo = 0.0;
  double plateau_hi = 0.0;
  std::vector<double> grid;
  std::vector<double> reductions;
};

/// `vary_intercept` selects which scale moves along `axis`; the other is `fixed`.
SliceMax logistic_slice_argmax(const Logistic& design, const ProductPrior& base, AltFamily family, double gamma,
                               bool vary_intercept, double fixed, const Axis& axis, const LogisticRule& rule = {},
                               double t_dof = 1.0, double edge_tol = 1e-4,
                               int local_points = 81);

// ---------------------------------------------------------------------------
// Multinomial with two maximal ancillaries
// ---------------------------------------------------------------------------

/// Beta(alpha, beta) alternatives for the shifted multinomial, conditioning on
/// the observed values of both ancillaries; a cell needs both to pass.
RegionScan multinomial_ancillary_scan(long n, std::array<long, 2> u1, std::array<long, 2> u2,
                                      const BetaPrior& base, double gamma, const Axis& alpha, const Axis& beta);

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// CSV: axis1,axis2,classification,method,pvalue_evidence (full precision).
void write_scan_csv(std::ostream& os, const RegionScan& scan);
/// CSV: axis1,axis2,reduction.
void write_reduction_csv(std::ostream& os, const ReductionField& field);

struct Polyline {
  double level = 0.0;
  std::vector<std::array<double, 2>> points;
};

/// Level curves of the field by marching squares, segments joined into polylines.
std::vector<Polyline> contour_lines(const ReductionField& field, const std::vector<double>& levels);
/// CSV: level,polyline,x,y.
void write_contours_csv(std::ostream& os, const std::vector<Polyline>& lines);

}  // namespace priorinfo
