#include "priorinfo/distmath.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace priorinfo {

namespace bm = boost::math;

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw DomainError(std::string(op) + ": " + detail);
}

void require_probability_open(const char* op, double p) {
  require(p > 0.0 && p < 1.0, op, "probability must lie in (0,1), got " + fmt(p));
}

void require_positive(const char* op, const char* name, double v) {
  require(v > 0.0 && std::isfinite(v), op, std::string(name) + " must be positive, got " + fmt(v));
}

void require_nonneg(const char* op, const char* name, double v) {
  require(v >= 0.0 && !std::isnan(v), op, std::string(name) + " must be nonnegative, got " + fmt(v));
}

// x == +inf is accepted by cdfs and sfs and mapped to the limit.
bool is_pos_inf(double x) { return std::isinf(x) && x > 0; }

}  // namespace

double ln_gamma(double x) {
  require_positive("ln_gamma", "x", x);
  return bm::lgamma(x);
}

double ln_beta(double a, double b) {
  require_positive("ln_beta", "a", a);
  require_positive("ln_beta", "b", b);
  return bm::lgamma(a) + bm::lgamma(b) - bm::lgamma(a + b);
}

double ln_choose(long n, long k) {
  require(n >= 0 && k >= 0 && k <= n, "ln_choose", "need 0 <= k <= n");
  return bm::lgamma(double(n) + 1) - bm::lgamma(double(k) + 1) - bm::lgamma(double(n - k) + 1);
}

double reg_inc_gamma(double a, double x) {
  require_positive("reg_inc_gamma", "a", a);
  require_nonneg("reg_inc_gamma", "x", x);
  if (is_pos_inf(x)) return 1.0;
  return bm::gamma_p(a, x);
}

double reg_inc_gamma_upper(double a, double x) {
  require_positive("reg_inc_gamma_upper", "a", a);
  require_nonneg("reg_inc_gamma_upper", "x", x);
  if (is_pos_inf(x)) return 0.0;
  return bm::gamma_q(a, x);
}

double reg_inc_beta(double a, double b, double x) {
  require_positive("reg_inc_beta", "a", a);
  require_positive("reg_inc_beta", "b", b);
  require(x >= 0.0 && x <= 1.0, "reg_inc_beta", "x must lie in [0,1], got " + fmt(x));
  return bm::ibeta(a, b, x);
}

// -- normal -----------------------------------------------------------------

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }
double normal_sf(double z) { return 0.5 * std::erfc(z / M_SQRT2); }

double normal_quantile(double p) {
  require_probability_open("normal_quantile", p);
  return bm::quantile(bm::normal_distribution<double>(), p);
}

// -- chi-squared --------------------------------------------------------------

double chisq_cdf(double k, double x) {
  require(k >= 1.0, "chisq_cdf", "degrees must be >= 1, got " + fmt(k));
  require_nonneg("chisq_cdf", "x", x);
  return reg_inc_gamma(0.5 * k, 0.5 * x);
}

double chisq_sf(double k, double x) {
  require(k >= 1.0, "chisq_sf", "degrees must be >= 1, got " + fmt(k));
  require_nonneg("chisq_sf", "x", x);
  return reg_inc_gamma_upper(0.5 * k, 0.5 * x);
}

double chisq_quantile(double k, double p) {
  require(k >= 1.0, "chisq_quantile", "degrees must be >= 1, got " + fmt(k));
  require_probability_open("chisq_quantile", p);
  return bm::quantile(bm::chi_squared_distribution<double>(k), p);
}

// -- F ------------------------------------------------------------------------

double f_cdf(double k, double lambda, double x) {
  require(k >= 1.0, "f_cdf", "numerator degrees must be >= 1, got " + fmt(k));
  require_positive("f_cdf", "lambda", lambda);
  require_nonneg("f_cdf", "x", x);
  if (is_pos_inf(x)) return 1.0;
  // F(k, l) cdf is I_{kx/(kx+l)}(k/2, l/2).
  const double kx = k * x;
  return bm::ibeta(0.5 * k, 0.5 * lambda, kx / (kx + lambda));
}

double f_sf(double k, double lambda, double x) {
  require(k >= 1.0, "f_sf", "numerator degrees must be >= 1, got " + fmt(k));
  require_positive("f_sf", "lambda", lambda);
  require_nonneg("f_sf", "x", x);
  if (is_pos_inf(x)) return 0.0;
  // Written as I_{l/(kx+l)}(l/2, k/2) to keep relative accuracy in the tail.
  const double kx = k * x;
  return bm::ibeta(0.5 * lambda, 0.5 * k, lambda / (kx + lambda));
}

double f_quantile(double k, double lambda, double p) {
  require(k >= 1.0, "f_quantile", "numerator degrees must be >= 1, got " + fmt(k));
  require_positive("f_quantile", "lambda", lambda);
  require_probability_open("f_quantile", p);
  return bm::quantile(bm::fisher_f_distribution<double>(k, lambda), p);
}

// -- Student t ----------------------------------------------------------------

double student_t_cdf(double lambda, double x) {
  require_positive("student_t_cdf", "lambda", lambda);
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return bm::cdf(bm::students_t_distribution<double>(lambda), x);
}

double student_t_sf(double lambda, double x) { return student_t_cdf(lambda, -x); }

double student_t_quantile(double lambda, double p) {
  require_positive("student_t_quantile", "lambda", lambda);
  require_probability_open("student_t_quantile", p);
  return bm::quantile(bm::students_t_distribution<double>(lambda), p);
}

// -- gamma (shape, rate) ------------------------------------------------------

double gamma_rate_pdf(double shape, double rate, double x) {
  require_positive("gamma_rate_pdf", "shape", shape);
  require_positive("gamma_rate_pdf", "rate", rate);
  require_nonneg("gamma_rate_pdf", "x", x);
  if (x == 0.0) {
    if (shape < 1.0) return std::numeric_limits<double>::infinity();
    return shape == 1.0 ? rate : 0.0;
  }
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  bm::lgamma(shape));
}

double gamma_rate_cdf(double shape, double rate, double x) {
  require_positive("gamma_rate_cdf", "rate", rate);
  return reg_inc_gamma(shape, rate * x);
}

double gamma_rate_sf(double shape, double rate, double x) {
  require_positive("gamma_rate_sf", "rate", rate);
  return reg_inc_gamma_upper(shape, rate * x);
}

// -- beta ---------------------------------------------------------------------

double beta_pdf(double a, double b, double x) {
  require_positive("beta_pdf", "a", a);
  require_positive("beta_pdf", "b", b);
  require(x >= 0.0 && x <= 1.0, "beta_pdf", "x must lie in [0,1], got " + fmt(x));
  return bm::pdf(bm::beta_distribution<double>(a, b), x);
}

double beta_cdf(double a, double b, double x) { return reg_inc_beta(a, b, x); }

double beta_sf(double a, double b, double x) {
  require(x >= 0.0 && x <= 1.0, "beta_sf", "x must lie in [0,1], got " + fmt(x));
  return reg_inc_beta(b, a, 1.0 - x);
}

// -- quadrature ---------------------------------------------------------------

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are the
// squared first components of the normalized eigenvectors.
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                  Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalFailure("golub_welsch: eigensolver failed");
  nodes = solver.eigenvalues();
  weights = solver.eigenvectors().row(0).transpose().array().square();
}

QuadratureRule drop_underflow(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                              QuadratureRule::Kind kind) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > std::numeric_limits<double>::min()) keep.push_back(i);
  QuadratureRule rule;
  rule.kind = kind;
  rule.nodes.resize(Eigen::Index(keep.size()));
  rule.weights.resize(Eigen::Index(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    rule.nodes[Eigen::Index(j)] = x[keep[j]];
    rule.weights[Eigen::Index(j)] = w[keep[j]];
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  require(n >= 2, "gauss_legendre", "need at least 2 nodes");
  require(std::isfinite(a) && std::isfinite(b) && a < b, "gauss_legendre", "need finite a < b");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(n - 1);
  for (int j = 1; j < n; ++j) off[j - 1] = j / std::sqrt(4.0 * j * j - 1.0);
  Eigen::VectorXd x, w;
  golub_welsch(diag, off, x, w);
  QuadratureRule rule;
  rule.kind = QuadratureRule::Kind::GaussLegendre;
  rule.nodes = (0.5 * (b - a)) * (x.array() + 1.0) + a;
  rule.weights = (b - a) * w / w.sum();
  return rule;
}

QuadratureRule gamma_weight_rule(double shape, double rate, int n, double tilt) {
  require_positive("gamma_weight_rule", "shape", shape);
  require_positive("gamma_weight_rule", "rate", rate);
  require(n >= 2, "gamma_weight_rule", "need at least 2 nodes");
  const double a = shape - 1.0 + tilt;  // generalized Laguerre exponent
  require(a > -1.0, "gamma_weight_rule", "shape + tilt must be positive");
  Eigen::VectorXd diag(n), off(n - 1);
  for (int j = 0; j < n; ++j) diag[j] = 2.0 * j + a + 1.0;
  for (int j = 1; j < n; ++j) off[j - 1] = std::sqrt(j * (j + a));
  Eigen::VectorXd x, w;
  golub_welsch(diag, off, x, w);
  const double tilt_moment =
      std::exp(bm::lgamma(shape + tilt) - bm::lgamma(shape) - tilt * std::log(rate));
  Eigen::VectorXd u = x / rate;
  Eigen::VectorXd wn = w * (tilt_moment / w.sum());
  return drop_underflow(u, wn, QuadratureRule::Kind::GammaWeight);
}

QuadratureRule beta_weight_rule(double a, double b, int n) {
  require_positive("beta_weight_rule", "a", a);
  require_positive("beta_weight_rule", "b", b);
  require(n >= 2, "beta_weight_rule", "need at least 2 nodes");
  // Jacobi weight (1-x)^p (1+x)^q on [-1,1] maps to Beta(q+1, p+1) under
  // B = (1+x)/2.
  const double p = b - 1.0, q = a - 1.0;
  Eigen::VectorXd diag(n), off(n - 1);
  for (int j = 0; j < n; ++j) {
    const double s = 2.0 * j + p + q;
    diag[j] = (j == 0) ? (q - p) / (p + q + 2.0) : (q * q - p * p) / (s * (s + 2.0));
  }
  for (int j = 1; j < n; ++j) {
    const double s = 2.0 * j + p + q;
    double beta_j;
    if (j == 1)
      beta_j = 4.0 * (1.0 + p) * (1.0 + q) / ((2.0 + p + q) * (2.0 + p + q) * (3.0 + p + q));
    else
      beta_j = 4.0 * j * (j + p) * (j + q) * (j + p + q) / (s * s * (s + 1.0) * (s - 1.0));
    off[j - 1] = std::sqrt(beta_j);
  }
  Eigen::VectorXd x, w;
  golub_welsch(diag, off, x, w);
  Eigen::VectorXd nodes = 0.5 * (x.array() + 1.0);
  Eigen::VectorXd wn = w / w.sum();
  return drop_underflow(nodes, wn, QuadratureRule::Kind::BetaWeight);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
  require(!(a > b), "integrate_adaptive", "need a <= b");
  if (a == b) return 0.0;
  double err = 0.0, l1 = 0.0, value = 0.0;
  const double tol = rel_tol;
  if (std::isinf(a) && std::isinf(b)) {
    bm::quadrature::sinh_sinh<double> integrator;
    value = integrator.integrate(f, tol, &err, &l1);
  } else {
    bm::quadrature::tanh_sinh<double> integrator;
    value = integrator.integrate(f, a, b, tol, &err, &l1);
  }
  if (!std::isfinite(value) || err > std::max(1e-6 * l1, 1e-300))
    throw NumericalFailure("integrate_adaptive: no convergence on [" + fmt(a) + ", " + fmt(b) +
                           "], error estimate " + fmt(err) + " vs L1 " + fmt(l1));
  return value;
}

// -- root finding ---------------------------------------------------------------

double find_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                 const std::string& what) {
  if (!(lo <= hi)) throw NumericalFailure(what + ": invalid bracket");
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0) == (fhi > 0))
    throw NumericalFailure(what + ": bracket [" + fmt(lo) + ", " + fmt(hi) +
                           "] does not change sign (f = " + fmt(flo) + ", " + fmt(fhi) + ")");
  std::uintmax_t max_iter = 500;
  std::pair<double, double> r;
  if (x_tol > 0.0) {
    auto tol = [x_tol](double u, double v) { return std::abs(u - v) <= x_tol; };
    r = bm::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  } else {
    r = bm::tools::toms748_solve(f, lo, hi, flo, fhi, bm::tools::eps_tolerance<double>(52),
                                 max_iter);
  }
  if (max_iter >= 500) throw NumericalFailure(what + ": root finder hit the iteration cap");
  return 0.5 * (r.first + r.second);
}

double find_root_expanding(const std::function<double(double)>& f, double lo, double hi,
                           double factor, int max_expand, const std::string& what) {
  const double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  int k = 0;
  while ((flo > 0) == (fhi > 0) && fhi != 0.0 && k < max_expand) {
    hi *= factor;
    fhi = f(hi);
    ++k;
  }
  return find_root(f, lo, hi, 0.0, what);
}

// -- random numbers -------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer applied to a golden-ratio stride.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(stream >> 32)};
  engine_.seed(seq);
}

Rng Rng::substream(std::uint64_t id) const { return Rng(seed_, mix_seed(stream_, id)); }

double Rng::uniform() {
  // 53 random bits, offset by half an ulp so that 0 is never produced.
  return (double(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

double Rng::gamma(double shape, double rate) {
  require_positive("Rng::gamma", "shape", shape);
  require_positive("Rng::gamma", "rate", rate);
  if (shape < 1.0) {
    // Boost to shape + 1, then scale by U^(1/shape).
    const double g = gamma(shape + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / shape) / rate;
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

long Rng::binomial(long n, double p) {
  require(n >= 0, "Rng::binomial", "n must be nonnegative");
  require(p >= 0.0 && p <= 1.0, "Rng::binomial", "p must lie in [0,1]");
  if (p == 0.0 || n == 0) return 0;
  if (p == 1.0) return n;
  // Sequential inversion on the pmf recursion; n is small in every caller.
  const double u = uniform();
  const double ratio = p / (1.0 - p);
  double pmf = std::exp(double(n) * std::log1p(-p));
  double cdf = pmf;
  long k = 0;
  while (u > cdf && k < n) {
    pmf *= ratio * double(n - k) / double(k + 1);
    ++k;
    cdf += pmf;
  }
  return k;
}

}  // namespace priorinfo
