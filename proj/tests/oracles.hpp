#pragma once

// Reference computations for the tests. Everything here is written from the
// defining formulas with std:: math only, so it shares no code path with the
// library under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace oracle {

/// Rounds to 12 significant digits; equal after rounding counts as a tie.
inline double round12(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return std::strtod(buf, nullptr);
}

inline bool same12(double a, double b) { return round12(a) == round12(b); }

inline double lchoose(long n, long k) {
  return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1);
}

inline double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

/// C(n,t) B(t+a, n-t+b) / B(a,b).
inline std::vector<double> betabinom_pmf(long n, double a, double b) {
  std::vector<double> p(std::size_t(n + 1));
  for (long t = 0; t <= n; ++t)
    p[std::size_t(t)] = std::exp(lchoose(n, t) + lbeta(double(t) + a, double(n - t) + b) - lbeta(a, b));
  return p;
}

/// P(t0) = sum of pmf over outcomes with pmf <= pmf(t0), ties at 12 digits.
inline double pvalue(const std::vector<double>& pmf, std::size_t i0) {
  const double ref = round12(pmf[i0]);
  double s = 0.0;
  for (double p : pmf)
    if (round12(p) <= ref) s += p;
  return s;
}

inline std::vector<double> all_pvalues(const std::vector<double>& pmf) {
  std::vector<double> out(pmf.size());
  for (std::size_t i = 0; i < pmf.size(); ++i) out[i] = pvalue(pmf, i);
  return out;
}

/// Smallest achievable P-value x with M(P <= x) >= gamma.
inline double x_gamma(const std::vector<double>& pmf, double gamma) {
  const auto pv = all_pvalues(pmf);
  double best = 2.0;
  for (double x : pv) {
    double mass = 0.0;
    for (std::size_t j = 0; j < pmf.size(); ++j)
      if (round12(pv[j]) <= round12(x)) mass += pmf[j];
    if (round12(mass) >= round12(gamma)) best = std::min(best, x);
  }
  return best;
}

/// M1(P2 <= x) by summing base masses over outcomes flagged by the alternative.
inline double eq4(const std::vector<double>& base, const std::vector<double>& alt, double x) {
  const auto p2 = all_pvalues(alt);
  double s = 0.0;
  for (std::size_t j = 0; j < base.size(); ++j)
    if (round12(p2[j]) <= round12(x)) s += base[j];
  return s;
}

// ---------------------------------------------------------------------------
// Shifted multinomial: cell probabilities (1-B)/3, B/3, (3-2B)/6, (1+2B)/6
// with B ~ Beta(a, b). The likelihood is a polynomial in B, so the predictive
// is an exact finite sum of Beta moments.
// ---------------------------------------------------------------------------

using Poly = std::vector<double>;  // coefficients of B^0, B^1, ...

inline Poly poly_mul(const Poly& p, const Poly& q) {
  Poly r(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

inline Poly poly_pow(const Poly& p, long k) {
  Poly r{1.0};
  for (long i = 0; i < k; ++i) r = poly_mul(r, p);
  return r;
}

/// E[B^k] for B ~ Beta(a, b).
inline double beta_moment(double a, double b, std::size_t k) {
  double m = 1.0;
  for (std::size_t j = 0; j < k; ++j) m *= (a + double(j)) / (a + b + double(j));
  return m;
}

inline double multinomial_prob(const std::array<long, 4>& f, double a, double b) {
  const long n = f[0] + f[1] + f[2] + f[3];
  const Poly cells[4] = {{1.0 / 3, -1.0 / 3}, {0.0, 1.0 / 3}, {0.5, -1.0 / 3}, {1.0 / 6, 1.0 / 3}};
  Poly lik{1.0};
  for (int c = 0; c < 4; ++c) lik = poly_mul(lik, poly_pow(cells[c], f[std::size_t(c)]));
  double coef = std::lgamma(double(n) + 1);
  for (long v : f) coef -= std::lgamma(double(v) + 1);
  double s = 0.0;
  for (std::size_t k = 0; k < lik.size(); ++k) s += lik[k] * beta_moment(a, b, k);
  return std::exp(coef) * s;
}

inline std::vector<std::array<long, 4>> multinomial_outcomes(long n) {
  std::vector<std::array<long, 4>> out;
  for (long a = 0; a <= n; ++a)
    for (long b = 0; a + b <= n; ++b)
      for (long c = 0; a + b + c <= n; ++c) out.push_back({a, b, c, n - a - b - c});
  return out;
}

/// Conditional P-value given U1 = (f1+f2, f3+f4) or U2 = (f1+f4, f2+f3):
/// joint enumeration, filtered on the ancillary and renormalized.
inline double conditional_pvalue(const std::array<long, 4>& f0, int which, double a, double b) {
  auto u = [&](const std::array<long, 4>& f) {
    return which == 1 ? std::array<long, 2>{f[0] + f[1], f[2] + f[3]} : std::array<long, 2>{f[0] + f[3], f[1] + f[2]};
  };
  const long n = f0[0] + f0[1] + f0[2] + f0[3];
  std::vector<double> pmf;
  std::size_t i0 = 0;
  double total = 0.0;
  for (const auto& f : multinomial_outcomes(n)) {
    if (u(f) != u(f0)) continue;
    if (f == f0) i0 = pmf.size();
    pmf.push_back(multinomial_prob(f, a, b));
    total += pmf.back();
  }
  for (double& p : pmf) p /= total;
  return pvalue(pmf, i0);
}

// ---------------------------------------------------------------------------
// Quadrature by composite Simpson on a fixed grid.
// ---------------------------------------------------------------------------

inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
  double glo = g(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0) == (glo < 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Finite-n threshold s with (1/n + s1)^{-1/2} = E[(1/n + s/U)^{-1/2}],
/// U ~ Gamma_rate(lambda/2, lambda/2), integrating over log u.
inline double finite_n_t_threshold(long n, double s1, double lambda) {
  const double h = 1.0 / double(n), k = lambda / 2.0;
  const double lnorm = k * std::log(k) - std::lgamma(k);
  auto expect = [&](double s) {
    return simpson(
        [&](double v) {
          const double u = std::exp(v);
          // gamma density times the Jacobian du = u dv
          const double dens = std::exp(lnorm + k * v - k * u);
          return dens / std::sqrt(h + s / u);
        },
        -60.0, 8.0, 40000);
  };
  const double target = 1.0 / std::sqrt(h + s1);
  return bisect([&](double s) { return expect(s) - target; }, 1e-10 * s1, 4.0 * s1, 80);
}

// ---------------------------------------------------------------------------
// Large-sample conflict rate for gamma priors on a normal precision. In the
// limit T = sigma^2 follows the inverse-gamma prior and the invariant density
// is proportional to t^{-a-1/2} e^{-b/t}. Work in s = log t.
// ---------------------------------------------------------------------------

struct GammaKernel {
  double a, b;
  // density of log T under the inverse-gamma prior
  double log_density(double s) const { return a * std::log(b) - std::lgamma(a) - a * s - b * std::exp(-s); }
  // log of the invariant density, up to a constant
  double log_invariant(double s) const { return -(a + 0.5) * s - b * std::exp(-s); }
  double mode() const { return std::log(b / (a + 0.5)); }
};

/// M1(m2*(T) <= c) where c puts M2 mass gamma in the two tails of m2*.
inline double gamma_limit_eq4(double a1, double b1, double a2, double b2, double gamma) {
  const GammaKernel k1{a1, b1}, k2{a2, b2};
  const double m = k2.mode(), top = k2.log_invariant(m);
  const double lo = m - 60.0, hi = m + 60.0;
  // Tails [lo, left] and [right, hi] where log m2* drops by `drop` below its peak.
  auto ends = [&](double drop) {
    auto g = [&](double s) { return k2.log_invariant(s) - (top - drop); };
    return std::array<double, 2>{bisect(g, lo, m, 80), bisect(g, m, hi, 80)};
  };
  auto tail_mass = [&](const GammaKernel& k, const std::array<double, 2>& e) {
    auto f = [&](double s) { return std::exp(k.log_density(s)); };
    return simpson(f, lo, e[0], 4000) + simpson(f, e[1], hi, 4000);
  };
  const double drop = bisect([&](double d) { return gamma - tail_mass(k2, ends(d)); }, 1e-12, 200.0, 64);
  return tail_mass(k1, ends(drop));
}

}  // namespace oracle
