// Acceptance run: one PASS/FAIL line per criterion, followed by detail lines.
// Exits nonzero when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "priorinfo/cli.hpp"
#include "priorinfo/closedform.hpp"
#include "priorinfo/discretescan.hpp"
#include "priorinfo/weakinfo.hpp"

using namespace priorinfo;

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> details;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const Logistic& bioassay() {
  static const Logistic lg = logistic_from_doses({0.422, 0.744, 0.948, 2.069}, {5, 5, 5, 5});
  return lg;
}

ProductPrior normal_base() { return product_prior({normal_prior(0, 100), normal_prior(0, 6.25)}); }

Outcome kappa_values() {
  const double k1 = t_variance_threshold(1), k3 = t_variance_threshold(3);
  Outcome o;
  o.pass = std::abs(k1 - 0.6366) < 1e-4 && std::abs(k3 - 0.8488) < 1e-4 && std::abs(3 * k3 - 2.5464) < 3e-4;
  o.details.push_back(fmt("kappa(1) = %.6f, kappa(3) = %.6f, 3 kappa(3) = %.6f", k1, k3, 3 * k3));
  return o;
}

Outcome t_calibration() {
  const CalibrationResult r = calibrate_t(3.0, Regime::limit(), 1.0, 0.05, 0.5);
  Outcome o;
  o.pass = std::abs(r.ratio - 0.49604) < 1e-4;
  o.details.push_back(fmt("ratio %.6f, achieved reduction %.6f", r.ratio, r.achieved_reduction));
  return o;
}

Outcome normal_rate_structure() {
  Outcome o;
  double worst = 0.0;
  for (double g : {0.01, 0.05, 0.5}) worst = std::max(worst, std::abs(normal_conflict_rate(Regime::limit(), 1.3, 1.3, g) - g));
  bool iff = true;
  for (int i = 0; i < 20; ++i) {
    const double s2 = 0.25 + 0.1 * i;
    iff = iff && ((normal_conflict_rate(Regime::finite(20), 1.0, s2, 0.05) < 0.05) == (s2 > 1.0));
  }
  o.pass = worst <= 1e-12 && iff;
  o.details.push_back(fmt("max |rate - gamma| at equal variances %.2e; iff over 20 variances: %s", worst,
                          iff ? "holds" : "broken"));
  return o;
}

Outcome finite_n_thresholds() {
  Outcome o;
  o.pass = true;
  for (double lambda : {1.0, 3.0, 10.0}) {
    double prev = 0.0, last = 0.0;
    bool monotone = true;
    std::string row;
    for (long n : {1L, 5L, 20L, 100L, 10000L, 1000000L}) {
      const double s = finite_n_t_threshold(n, 1.0, lambda);
      monotone = monotone && s > prev;
      prev = last = s;
      row += fmt(" %.6f", s);
    }
    const double gap = std::abs(last - t_variance_threshold(lambda));
    o.pass = o.pass && monotone && gap < 1e-3;
    o.details.push_back(fmt("lambda %g:%s (kappa %.6f, gap %.1e)", lambda, row.c_str(), t_variance_threshold(lambda), gap));
  }
  return o;
}

Outcome normal_vs_t3_point() {
  const WiVerdict v = is_uniformly_wi(LocationNormal{1, 20, false}, normal_prior(0, 1), student_t_prior(0, 1.0 / 3.0, 3));
  Outcome o;
  o.pass = v.classification == WiClass::UniformlyWiAtLevel && v.gamma0 && std::abs(*v.gamma0 - 0.0357) < 0.002;
  o.details.push_back(fmt("%s gamma0 = %.5f", wi_class_name(v.classification).c_str(), v.gamma0.value_or(-1)));
  return o;
}

Outcome beta_binomial() {
  Outcome o;
  const SamplingModel m = Binomial{20, false};
  const double x = pvalue_quantile(m, beta_prior(6, 6), 0.05);
  const double uniform = symmetric_boundary(20, beta_prior(6, 6), 0.05, true, 6.0, 20.0);
  const double level = symmetric_boundary(20, beta_prior(6, 6), 0.05, false, 6.0, 20.0);
  const double lower = symmetric_boundary(20, beta_prior(6, 6), 0.05, true, 1.0, 0.05);
  const WiVerdict flat = check_at_level(m, beta_prior(6, 6), beta_prior(1, 1), 0.05);
  const WiVerdict jeffreys = is_uniformly_wi(m, beta_prior(6, 6), beta_prior(0.5, 0.5));
  const bool x_ok = std::abs(x - 0.0588) < 5e-4;
  const bool boundary_ok = std::abs(uniform - 12.3639) < 0.05;
  o.pass = x_ok && boundary_ok && flat.weakly_informative() && jeffreys.classification != WiClass::UniformlyWi;
  o.details.push_back(fmt("x_0.05 = %.6f", x));
  o.details.push_back(fmt("symmetric boundary, uniform over every level: %.5f (lower end %.5f)", uniform, lower));
  o.details.push_back(fmt("symmetric boundary, at level 0.05: %.5f", level));
  o.details.push_back(fmt("Beta(1,1): %s, rate %.6f", wi_class_name(flat.classification).c_str(), flat.conflict_rate));
  o.details.push_back(fmt("Beta(1/2,1/2): %s, gamma0 %.6f", wi_class_name(jeffreys.classification).c_str(),
                          jeffreys.gamma0.value_or(1.0)));
  return o;
}

Outcome bioassay_pvalues() {
  const SufficientStat t0 = SufficientStat::counts({0, 1, 3, 5});
  const double pn = conflict_pvalue(bioassay(), normal_base(), t0).pvalue;
  const PriorSpec cauchy = product_prior({student_t_prior(0, 100, 1), student_t_prior(0, 6.25, 1)});
  const double pc = conflict_pvalue(bioassay(), cauchy, t0).pvalue;
  const double x = pvalue_quantile(bioassay(), normal_base(), 0.05);
  Outcome o;
  o.pass = std::abs(pn - 0.1073) < 0.002 && std::abs(pc - 0.1130) < 0.002 && std::abs(x - 0.0503) < 5e-4;
  o.details.push_back(fmt("normal base %.6f, Cauchy base %.6f, x_0.05 %.6f", pn, pc, x));
  return o;
}

Outcome slice_maxima() {
  const SliceMax a = logistic_slice_argmax(bioassay(), normal_base(), AltFamily::NormalNormal, 0.05, false, 2.5,
                                           Axis{"sigma1", 1.5, 3.5, 50});
  const SliceMax b = logistic_slice_argmax(bioassay(), normal_base(), AltFamily::NormalNormal, 0.05, true, 2.5,
                                           Axis{"sigma0", 0.5, 1.5, 50});
  Outcome o;
  o.pass = std::abs(a.argmax - 2.2628) < 0.05 && std::abs(b.argmax - 0.875) < 0.05;
  auto line = [](const char* what, const SliceMax& s) {
    return fmt("%s argmax %.4f, plateau [%.4f, %.4f], reduction %.6f", what, s.argmax, s.plateau_lo, s.plateau_hi,
               s.max_reduction);
  };
  o.details.push_back(line("sigma0 = 2.5, vary sigma1:", a));
  o.details.push_back(line("sigma1 = 2.5, vary sigma0:", b));
  for (double s1 : {2.2628}) {
    const auto r = reduction(bioassay(), normal_base(), logistic_alternative(AltFamily::NormalNormal, 2.5, s1), 0.05);
    o.details.push_back(fmt("reduction at sigma1 = %.4f: %.6f", s1, r.value_or(NAN)));
  }
  const auto r0 = reduction(bioassay(), normal_base(), logistic_alternative(AltFamily::NormalNormal, 0.875, 2.5), 0.05);
  o.details.push_back(fmt("reduction at sigma0 = 0.875: %.6f", r0.value_or(NAN)));
  return o;
}

/// Symmetric positive definite matrix with the given eigenvalues and a random basis.
Eigen::MatrixXd with_eigenvalues(const Eigen::VectorXd& d, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  const int k = int(d.size());
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = z(gen);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  return q * d.asDiagonal() * q.transpose();
}

Outcome covariance_domination() {
  std::mt19937_64 gen(20100101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> checked{0.01, 0.05, 0.2};
  const std::vector<double> sweep{0.001, 0.002, 0.005, 0.01, 0.02, 0.05};
  int dom_ok = 0, nondom_ok = 0;
  double worst_excess = std::numeric_limits<double>::lowest();
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 2;
    Eigen::VectorXd e1(k);
    for (int i = 0; i < k; ++i) e1[i] = 0.3 + 2.7 * u(gen);
    const Eigen::MatrixXd s1 = with_eigenvalues(e1, gen);
    const Eigen::MatrixXd root = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s1).operatorSqrt();

    // whitened S2 with every eigenvalue >= 1 dominates
    Eigen::VectorXd d(k);
    for (int i = 0; i < k; ++i) d[i] = 1.0 + 2.0 * u(gen);
    const Eigen::MatrixXd dom = root * with_eigenvalues(d, gen) * root;
    Rng rng(1000 + std::uint64_t(trial));
    const auto r = normal_conflict_rate_mc(s1, dom, checked, Regime::limit(), rng, 100000);
    bool ok = covariance_dominates(s1, dom);
    for (std::size_t i = 0; i < checked.size(); ++i) {
      ok = ok && r[i].value <= checked[i] + 3 * r[i].stderr;
      worst_excess = std::max(worst_excess, (r[i].value - checked[i]) / r[i].stderr);
    }
    dom_ok += ok;

    // one whitened eigenvalue in [0.3, 0.6]
    d[0] = 0.3 + 0.3 * u(gen);
    const Eigen::MatrixXd bad = root * with_eigenvalues(d, gen) * root;
    Rng rng2(5000 + std::uint64_t(trial));
    const auto s = normal_conflict_rate_mc(s1, bad, sweep, Regime::limit(), rng2, 100000);
    bool violated = false;
    for (std::size_t i = 0; i < sweep.size(); ++i) violated = violated || s[i].value > sweep[i] + 3 * s[i].stderr;
    nondom_ok += violated && !covariance_dominates(s1, bad);
  }
  Outcome o;
  o.pass = dom_ok == 50 && nondom_ok == 50;
  o.details.push_back(fmt("dominating pairs within gamma + 3 se: %d/50 (largest excess %.2f se)", dom_ok, worst_excess));
  o.details.push_back(fmt("non-dominating pairs violating somewhere in the sweep: %d/50", nondom_ok));
  return o;
}

Outcome oracle_equivalence() {
  long compared = 0, mismatched = 0;
  auto same = [&](double a, double b) {
    ++compared;
    mismatched += !oracle::same12(a, b);
  };
  const std::pair<double, double> priors[] = {{1, 1}, {6, 6}, {0.5, 0.5}, {2, 0.7}, {13, 13}, {0.3, 4}};
  for (long n = 1; n <= 10; ++n)
    for (auto [a1, b1] : priors) {
      const SamplingModel m = Binomial{n, false};
      const auto base = oracle::betabinom_pmf(n, a1, b1);
      for (long t = 0; t <= n; ++t)
        same(conflict_pvalue(m, beta_prior(a1, b1), SufficientStat::counts({t})).pvalue, oracle::pvalue(base, std::size_t(t)));
      for (auto [a2, b2] : priors) {
        const auto alt = oracle::betabinom_pmf(n, a2, b2);
        for (double g : {0.01, 0.05, 0.2, 0.5}) {
          const double x = oracle::x_gamma(base, g);
          same(conflict_rate(m, beta_prior(a1, b1), beta_prior(a2, b2), g).value, oracle::eq4(base, alt, x));
        }
      }
    }
  for (long n = 1; n <= 4; ++n) {
    const SamplingModel m = ShiftedMultinomial{n};
    const auto outcomes = oracle::multinomial_outcomes(n);
    for (auto [a1, b1] : priors) {
      std::vector<double> base(outcomes.size());
      std::vector<std::size_t> at(outcomes.size());
      for (std::int64_t i = 0; i < lattice_size(m); ++i) {
        const auto c = lattice_point(m, i).integer_counts();
        const std::array<long, 4> f{c[0], c[1], c[2], c[3]};
        at[std::size_t(i)] = std::size_t(std::find(outcomes.begin(), outcomes.end(), f) - outcomes.begin());
        base[std::size_t(i)] = oracle::multinomial_prob(f, a1, b1);
      }
      for (std::int64_t i = 0; i < lattice_size(m); ++i)
        same(conflict_pvalue(m, beta_prior(a1, b1), lattice_point(m, i)).pvalue, oracle::pvalue(base, std::size_t(i)));
      for (auto [a2, b2] : priors) {
        std::vector<double> alt(outcomes.size());
        for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = oracle::multinomial_prob(outcomes[at[i]], a2, b2);
        for (double g : {0.05, 0.3}) {
          const double x = oracle::x_gamma(base, g);
          same(conflict_rate(m, beta_prior(a1, b1), beta_prior(a2, b2), g).value, oracle::eq4(base, alt, x));
        }
      }
    }
  }
  Outcome o;
  o.pass = mismatched == 0;
  o.details.push_back(fmt("%ld comparisons, %ld mismatches after 12-digit rounding", compared, mismatched));
  return o;
}

Outcome gamma_priors() {
  Outcome o;
  o.pass = true;
  const std::pair<double, double> bases[] = {{2.0, 1.0}, {5.0, 3.0}, {1.0, 0.5}};
  for (auto [a1, b1] : bases) {
    double worst = -1.0;
    bool verdicts = true;
    for (double frac : {0.25, 0.5, 1.0}) {
      const double a2 = frac * a1, b2 = gamma_mode_line_rate(a1, b1, a2);
      verdicts = verdicts && gamma_prior_check(a1, b1, a2, b2) == GammaPriorVerdict::WiAsymptotic;
      for (int i = 1; i <= 99; ++i) {
        const double g = i / 100.0;
        worst = std::max(worst, oracle::gamma_limit_eq4(a1, b1, a2, b2, g) - g);
      }
    }
    const bool lower = gamma_prior_check(a1, b1, 0.2, 0.45 * b1 / (a1 + 0.5)) == GammaPriorVerdict::NotCovered;
    o.pass = o.pass && verdicts && worst <= 1e-6 && lower;
    o.details.push_back(fmt("base (%g, %g): max over levels of rate - gamma %.2e; below the lower rate endpoint: %s", a1,
                            b1, worst, lower ? "not-covered" : "misreported"));
  }
  return o;
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("priorinfo_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto scan = [&](const std::string& cfg, const std::string& name) {
    const std::string out = (dir / name).string();
    const char* argv[] = {"priorinfo", "scan", "--config", cfg.c_str(), "--seed", "7", "--out", out.c_str()};
    std::ostringstream so, se;
    const int code = run_cli(8, argv, so, se);
    std::ifstream is(out, std::ios::binary);
    return std::make_pair(code, std::string(std::istreambuf_iterator<char>(is), {}));
  };
  Outcome o;
  o.pass = true;
  for (const char* cfg : {"betabinom", "multinomial"}) {
    const auto a = scan(cfg, std::string(cfg) + "_a.csv"), b = scan(cfg, std::string(cfg) + "_b.csv");
    const bool same = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
    o.pass = o.pass && same;
    o.details.push_back(fmt("%s scan: %zu bytes, reruns %s", cfg, a.second.size(), same ? "identical" : "differ"));
  }
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"t variance threshold kappa(1), kappa(3), 3 kappa(3)", kappa_values},
      {"t calibration ratio at lambda 3, reduction 0.5", t_calibration},
      {"normal rate equals gamma at equal variances; below gamma iff larger variance", normal_rate_structure},
      {"finite-n t threshold monotone in n and converging to kappa", finite_n_thresholds},
      {"N(0,1) vs t3(0,1/3) at n 20: uniform only below gamma0 0.0357", normal_vs_t3_point},
      {"beta-binomial n 20: x_0.05, symmetric uniform boundary 12.3639, flat and Jeffreys", beta_binomial},
      {"bioassay conflict P-values and x_0.05", bioassay_pvalues},
      {"bioassay reduction slice maxima 2.2628 and 0.875", slice_maxima},
      {"covariance domination against simulated rates", covariance_domination},
      {"discrete P-values and conflict rates against enumeration", oracle_equivalence},
      {"gamma precision priors on the mode line, lower rate endpoint", gamma_priors},
      {"scan reruns are byte-identical", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [label, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("criterion %2d %s  %s  (%.1f s)\n", index, o.pass ? "PASS" : "FAIL", label, secs);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria pass\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
