#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace priorinfo {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical routine (root finder, quadrature) failed to converge.
class NumericalFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

double ln_gamma(double x);
double ln_beta(double a, double b);
/// log of the binomial coefficient C(n, k).
double ln_choose(long n, long k);

/// Regularized lower incomplete gamma P(a, x).
double reg_inc_gamma(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), accurate in the tail.
double reg_inc_gamma_upper(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// ---------------------------------------------------------------------------
// Distribution primitives. Every cdf has a matching survival function (sf)
// computed directly rather than as 1 - cdf.
// ---------------------------------------------------------------------------

double normal_pdf(double z);
double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);

double chisq_cdf(double k, double x);
double chisq_sf(double k, double x);
double chisq_quantile(double k, double p);

/// F(k, lambda) distribution.
double f_cdf(double k, double lambda, double x);
double f_sf(double k, double lambda, double x);
double f_quantile(double k, double lambda, double p);

/// Standard Student t with lambda degrees of freedom.
double student_t_cdf(double lambda, double x);
double student_t_sf(double lambda, double x);
double student_t_quantile(double lambda, double p);

/// Gamma with shape/rate parameterization.
double gamma_rate_pdf(double shape, double rate, double x);
double gamma_rate_cdf(double shape, double rate, double x);
double gamma_rate_sf(double shape, double rate, double x);

double beta_pdf(double a, double b, double x);
double beta_cdf(double a, double b, double x);
double beta_sf(double a, double b, double x);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureRule {
  enum class Kind { GaussLegendre, GammaWeight, BetaWeight };

  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Kind kind = Kind::GaussLegendre;

  Eigen::Index size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Rule with sum_i w_i f(u_i) ~= integral f(u) u^tilt g(u) du, where g is the
/// Gamma_rate(shape, rate) density. Nodes whose weights underflow are dropped.
QuadratureRule gamma_weight_rule(double shape, double rate, int n = 200, double tilt = 0.0);

/// Gauss rule for the Beta(a, b) density on [0, 1]; exact for polynomials of
/// degree <= 2n - 1.
QuadratureRule beta_weight_rule(double a, double b, int n);

/// Adaptive integration of a smooth function over [a, b]; either end may be
/// infinite. Throws NumericalFailure when the error estimate stays above tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-11);

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Root of f on [lo, hi]; f(lo) and f(hi) must differ in sign (a zero at
/// either end is returned directly).
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol = 0.0, const std::string& what = "root");

/// Like find_root, but first grows the upper end geometrically (hi *= factor)
/// until the sign changes, at most max_expand times.
double find_root_expanding(const std::function<double(double)>& f, double lo, double hi,
                           double factor = 2.0, int max_expand = 200,
                           const std::string& what = "root");

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

class NeumaierSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Deterministic random source built on std::mt19937_64. A stream is
/// identified by (seed, stream id); substream(i) derives a new independent
/// stream through std::seed_seq, so results never depend on scheduling.
/// All variate generators are implemented here (not via <random>
/// distributions) so that streams are bit-identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  Rng substream(std::uint64_t id) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  double normal();
  double gamma(double shape, double rate);
  double beta(double a, double b);
  long binomial(long n, double p);

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// 64-bit mixing function used to derive per-item seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace priorinfo
