#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace priorinfo {

/// Relative tolerance under which two probabilities count as equal. Used both
/// for ties between pmf values (so symmetric outcomes group together even
/// when quadrature rounding differs in the last bits) and for comparing a
/// P-value against a threshold.
inline constexpr double kTieTolerance = 1e-12;

inline bool tied(double a, double b) {
  const double scale = a > b ? a : b;
  const double d = a > b ? a - b : b - a;
  return d <= kTieTolerance * scale;
}

/// a <= b, treating near-equal values as equal.
inline bool leq_tied(double a, double b) { return a <= b || tied(a, b); }

/// Conflict P-values of a discrete predictive: for each lattice point t0,
/// P(t0) = M(m(t) <= m(t0)), with ties grouped.
class PmfLadder {
public:
  explicit PmfLadder(Eigen::VectorXd pmf);

  const Eigen::VectorXd& pmf() const { return pmf_; }
  const Eigen::VectorXd& pvalues() const { return pvalues_; }
  double pvalue(Eigen::Index i) const { return pvalues_[i]; }
  Eigen::Index size() const { return pmf_.size(); }
  double total_mass() const { return total_; }

  /// Distinct achievable P-values in increasing order.
  const std::vector<double>& levels() const { return levels_; }

  /// Smallest achievable P-value x with M(P <= x) >= gamma.
  double quantile(double gamma) const;

  /// Largest pmf value (the modal mass).
  double max_mass() const { return max_mass_; }

private:
  Eigen::VectorXd pmf_;
  Eigen::VectorXd pvalues_;
  std::vector<double> levels_;
  double total_ = 0.0;
  double max_mass_ = 0.0;
};

/// Sum of base_pmf over points whose P-value is <= x (tie-aware).
double mass_at_or_below(const Eigen::VectorXd& base_pmf, const Eigen::VectorXd& pvalues, double x);

/// Precomputed cumulative view of base mass against a set of P-values, so that
/// mass_at_or_below can be evaluated for many thresholds quickly.
class TailMassTable {
public:
  TailMassTable(const Eigen::VectorXd& base_pmf, const Eigen::VectorXd& pvalues);
  double operator()(double x) const;

private:
  std::vector<double> sorted_p_;
  std::vector<double> cumulative_;
};

/// Mixed-radix enumeration of the product lattice {0..n_1} x ... x {0..n_q}.
/// The first coordinate varies slowest.
class MixedRadix {
public:
  explicit MixedRadix(std::vector<int> extents);  // extents are n_i (values 0..n_i)

  std::int64_t size() const { return size_; }
  std::int64_t index(const std::vector<long>& digits) const;
  std::vector<long> digits(std::int64_t index) const;
  const std::vector<int>& extents() const { return extents_; }

private:
  std::vector<int> extents_;
  std::vector<std::int64_t> stride_;
  std::int64_t size_ = 1;
};

}  // namespace priorinfo
