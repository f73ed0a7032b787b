#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "priorinfo/distmath.hpp"

namespace priorinfo {

struct Interval {
  double lo;
  double hi;
};

using Region = std::vector<Interval>;

/// A one-dimensional continuous prior predictive, described by its cdf and
/// the shape of its invariant density m*. Because m* is unimodal, antimodal,
/// monotone or flat, every level set {m* <= c} is a union of at most two
/// intervals, so P-values and conflict regions reduce to scalar root finding.
class UnivariatePredictive {
public:
  enum class Shape { Unimodal, Antimodal, Increasing, Decreasing, Flat };

  struct Spec {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    Shape shape = Shape::Unimodal;
    double turning = 0.0;    // mode (unimodal) or antimode (antimodal)
    bool symmetric = false;  // m* symmetric about `turning`
    std::function<double(double)> log_density;  // log m*, normalized
    std::function<double(double)> cdf;
    std::function<double(double)> sf;
    double scale = 1.0;  // typical spread, used to seed bracket searches
  };

  explicit UnivariatePredictive(Spec spec);

  double log_density(double x) const { return spec_.log_density(x); }
  double cdf(double x) const;
  double sf(double x) const;
  Shape shape() const { return spec_.shape; }
  double lower() const { return spec_.lo; }
  double upper() const { return spec_.hi; }
  double turning() const { return spec_.turning; }

  /// {x : m*(x) <= m*(x0)}.
  Region level_region(double x0) const;

  /// Probability of a region under this predictive.
  double mass(const Region& region) const;

  /// Conflict P-value M(m*(T) <= m*(x0)).
  double pvalue(double x0) const { return mass(level_region(x0)); }

  /// Level set whose mass is gamma: the set of points with P-value <= gamma.
  Region conflict_region(double gamma) const;

  /// Stretch of the support along which the P-value is monotone and takes
  /// every value in (0, 1): left of the turning point, or the whole support
  /// for monotone densities.
  Interval branch() const;
  /// True when the P-value increases along branch() from its lower end.
  bool pvalue_increases_on_branch() const;
  double scale() const { return spec_.scale; }

private:
  // Point on the far side of the turning point with the same density as x0;
  // clamps to the support end when no such point exists.
  double partner(double x0) const;
  // Branch point x (left of the turning point) whose level region has mass gamma.
  double branch_for_mass(double gamma) const;

  Spec spec_;
};

/// A k-dimensional continuous prior predictive used through simulation.
class MultivariatePredictive {
public:
  struct Spec {
    int dim = 2;
    std::function<Eigen::VectorXd(Rng&)> sample;
    std::function<double(const Eigen::VectorXd&)> log_density;
    /// Closed-form conflict P-value when one exists.
    std::function<double(const Eigen::VectorXd&)> pvalue;
  };

  explicit MultivariatePredictive(Spec spec) : spec_(std::move(spec)) {}

  int dim() const { return spec_.dim; }
  Eigen::VectorXd sample(Rng& rng) const { return spec_.sample(rng); }
  double log_density(const Eigen::VectorXd& t) const { return spec_.log_density(t); }
  bool has_closed_form_pvalue() const { return bool(spec_.pvalue); }
  double pvalue(const Eigen::VectorXd& t) const { return spec_.pvalue(t); }

private:
  Spec spec_;
};

}  // namespace priorinfo
