#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "priorinfo/conflict.hpp"

namespace priorinfo {

enum class WiClass { WiAtLevel, NotWiAtLevel, UniformlyWi, UniformlyWiAtLevel, NotUniformlyWi };

std::string wi_class_name(WiClass c);

/// How a verdict was reached.
struct WiEvidence {
  std::string route;        // enumeration, conflict-region, tail-grid, level-ladder, monte-carlo
  std::size_t points = 0;   // lattice levels, grid points or draws examined
  Method method = Method::ClosedForm;
  std::optional<double> mc_stderr;
  std::uint64_t seed = 0;
  bool indeterminate = false;  // Monte Carlo margin within 3 standard errors
  bool grid_warning = false;   // a margin at the grid edge sits within tolerance
  double worst_margin = 0.0;   // max over checked points of (tail mass - level)
};

struct WiVerdict {
  double conflict_rate = 0.0;  // base-predictive probability that the alternative flags conflict
  double quantile = 0.0;       // gamma-quantile of the base P-value
  double gamma = 0.0;
  std::optional<double> reduction;  // undefined when the quantile is 0
  WiClass classification = WiClass::WiAtLevel;
  std::optional<double> gamma0;     // uniform checks only
  WiEvidence evidence;

  bool weakly_informative() const {
    return classification == WiClass::WiAtLevel || classification == WiClass::UniformlyWi;
  }
};

struct WiOptions {
  ConflictOptions conflict;
  int t0_grid = 512;            // tail-domination grid points along the monotone branch
  double grid_span = 10.0;      // half-width of an unbounded branch, in predictive scales
  double gamma0_tol = 1e-4;     // bisection tolerance on the uniform boundary
  double margin_tol = 1e-9;     // relative slack in continuous tail-mass comparisons
};

/// gamma-quantile of the base-prior P-value: gamma for continuous models, the
/// smallest achievable P-value with cumulative mass >= gamma for discrete ones.
double pvalue_quantile(const SamplingModel& model, const PriorSpec& base, double gamma, const WiOptions& opts = {});

struct ConflictRate {
  double value = 0.0;
  double quantile = 0.0;
  Method method = Method::ClosedForm;
  std::optional<double> mc_stderr;
  std::size_t samples = 0;
};

/// M1(P2(T) <= x): probability under the base predictive that the
/// alternative prior signals conflict at the base quantile x of level gamma.
ConflictRate conflict_rate(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt, double gamma,
                         const WiOptions& opts = {});

/// 1 - rate / quantile; empty when the quantile is 0.
std::optional<double> reduction(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                                double gamma, const WiOptions& opts = {});

/// Weak informativity at a single level.
WiVerdict check_at_level(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt, double gamma,
                         const WiOptions& opts = {});

/// Uniform weak informativity; when it fails, gamma0 is the largest level up
/// to which weak informativity holds at every level.
WiVerdict is_uniformly_wi(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                          const WiOptions& opts = {});

// ---------------------------------------------------------------------------
// Discrete building blocks (shared with discretescan)
// ---------------------------------------------------------------------------

/// M1(P2 <= x) with both P-value ladders already built.
double discrete_conflict_rate(const PmfLadder& base, const PmfLadder& alt, double x);

struct UniformResult {
  bool uniform = true;
  double gamma0 = 1.0;
  double worst_margin = 0.0;
  std::size_t points = 0;
};

/// Checks M1(P2 <= v) <= v at every achievable base level v, in increasing
/// order; gamma0 is the last level before the first failure.
UniformResult discrete_uniform(const PmfLadder& base, const PmfLadder& alt);

// ---------------------------------------------------------------------------
// Conditional weak informativity given an ancillary (shifted multinomial)
// ---------------------------------------------------------------------------

/// Level-gamma check under the conditional predictives given U = value, with
/// the quantile recomputed from the conditional base predictive.
WiVerdict conditional_check(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                            AncillaryKind kind, std::array<long, 2> value, double gamma);

/// Uniform version of conditional_check.
WiVerdict conditional_uniform(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                              AncillaryKind kind, std::array<long, 2> value);

struct AncillaryVerdict {
  WiVerdict u1;
  WiVerdict u2;
  /// Both ancillaries must agree for the prior to count as weakly informative.
  bool weakly_informative() const { return u1.weakly_informative() && u2.weakly_informative(); }
  /// Smaller of the two reductions (each against its own quantile).
  double worst_reduction() const;
};

AncillaryVerdict check_given_ancillaries(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                                         std::array<long, 2> u1, std::array<long, 2> u2, double gamma);

}  // namespace priorinfo
