#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "priorinfo/discretescan.hpp"

using namespace priorinfo;

namespace {

const Logistic& bioassay() {
  static const Logistic lg = logistic_from_doses({0.422, 0.744, 0.948, 2.069}, {5, 5, 5, 5});
  return lg;
}

ProductPrior normal_base() { return product_prior({normal_prior(0, 100), normal_prior(0, 6.25)}); }

/// A uniform cell must also pass at the level: its evidence stays within `bound`
/// (the quantile for rate evidence, 1 for ratio evidence).
void check_nesting(const RegionScan& s, double bound) {
  for (std::size_t c = 0; c < s.cells.size(); ++c)
    if (s.cells[c] == CellClass::UniformlyWi) CHECK(leq_tied(s.evidence[c], bound));
}

/// Conditional pmfs (base, alt) of the shifted multinomial given an ancillary value.
std::pair<std::vector<double>, std::vector<double>> conditional_pmfs(long n, int which, std::array<long, 2> u,
                                                                     double a1, double b1, double a2, double b2) {
  std::vector<double> base, alt;
  for (const auto& f : oracle::multinomial_outcomes(n)) {
    const std::array<long, 2> fu = which == 1 ? std::array<long, 2>{f[0] + f[1], f[2] + f[3]}
                                              : std::array<long, 2>{f[0] + f[3], f[1] + f[2]};
    if (fu != u) continue;
    base.push_back(oracle::multinomial_prob(f, a1, b1));
    alt.push_back(oracle::multinomial_prob(f, a2, b2));
  }
  const double tb = std::accumulate(base.begin(), base.end(), 0.0), ta = std::accumulate(alt.begin(), alt.end(), 0.0);
  for (double& p : base) p /= tb;
  for (double& p : alt) p /= ta;
  return {base, alt};
}

bool oracle_uniform(const std::vector<double>& base, const std::vector<double>& alt) {
  for (double v : oracle::all_pvalues(base))
    if (oracle::round12(oracle::eq4(base, alt, v)) > oracle::round12(v)) return false;
  return true;
}

}  // namespace

TEST_CASE("axis values") {
  const Axis a{"alpha", 0.5, 2.0, 4};
  CHECK(a.value(0) == 0.5);
  CHECK(a.value(3) == 2.0);
  CHECK(a.value(1) == doctest::Approx(1.0));
  CHECK(Axis{"x", 3.0, 9.0, 1}.value(0) == 3.0);
}

TEST_CASE("beta-binomial scan: nesting, reflexivity and exact classification") {
  const Axis ax{"alpha", 0.5, 14.0, 28}, bx{"beta", 0.5, 14.0, 28};
  const RegionScan s = betabinom_scan(20, false, beta_prior(6, 6), 0.05, ax, bx);
  REQUIRE(s.cells.size() == 28u * 28u);
  const auto base = oracle::betabinom_pmf(20, 6, 6);
  const double x = oracle::x_gamma(base, 0.05);
  check_nesting(s, x);
  for (int i = 0; i < ax.steps; i += 3)
    for (int j = 0; j < bx.steps; j += 3) {
      const auto alt = oracle::betabinom_pmf(20, ax.value(i), bx.value(j));
      const bool level = oracle::round12(oracle::eq4(base, alt, x)) <= oracle::round12(x);
      const bool uniform = oracle_uniform(base, alt);
      const CellClass c = s.cell(i, j);
      CHECK((c == CellClass::UniformlyWi) == uniform);
      CHECK((c != CellClass::NotWi) == (uniform || level));
      CHECK(s.methods[std::size_t(i * bx.steps + j)] == Method::Enumeration);
    }

  const RegionScan own = betabinom_scan(20, false, beta_prior(6, 6), 0.05, Axis{"alpha", 6, 6, 1}, Axis{"beta", 6, 6, 1});
  CHECK(own.cells[0] != CellClass::NotWi);
}

TEST_CASE("symmetric uniform boundary and its shrinkage with n") {
  const double b20 = symmetric_boundary(20, beta_prior(6, 6), 0.05, true, 6.0, 20.0);
  const double lvl20 = symmetric_boundary(20, beta_prior(6, 6), 0.05, false, 6.0, 20.0);
  CHECK(b20 > 6.0);
  CHECK(lvl20 >= b20);
  CHECK(std::abs(lvl20 - 12.3639) < 0.05);
  const double b100 = symmetric_boundary(100, beta_prior(6, 6), 0.05, true, 6.0, 20.0);
  const double lvl100 = symmetric_boundary(100, beta_prior(6, 6), 0.05, false, 6.0, 20.0);
  CHECK(b100 < b20);
  CHECK(lvl100 < lvl20);

  // the oracle agrees on either side of the computed boundary
  const auto base = oracle::betabinom_pmf(20, 6, 6);
  CHECK(oracle_uniform(base, oracle::betabinom_pmf(20, b20 - 0.01, b20 - 0.01)));
  CHECK_FALSE(oracle_uniform(base, oracle::betabinom_pmf(20, b20 + 0.01, b20 + 0.01)));

  const Axis ax{"alpha", 6.5, 14.0, 16};
  auto count = [&](long n) {
    const RegionScan s = betabinom_scan(n, false, beta_prior(6, 6), 0.05, ax, ax);
    int c = 0;
    for (int i = 0; i < ax.steps; ++i) c += s.cell(i, i) != CellClass::NotWi;
    return c;
  };
  CHECK(count(100) < count(20));
  CHECK_THROWS_AS(symmetric_boundary(20, beta_prior(6, 6), 0.05, true, 15.0, 20.0), DomainError);
}

TEST_CASE("limiting beta scan keeps the base and flags concentrated priors") {
  const Axis ax{"alpha", 1.0, 20.0, 20};
  const RegionScan s = betabinom_scan(20, true, beta_prior(6, 6), 0.05, ax, ax);
  check_nesting(s, pvalue_quantile(Binomial{20, true}, beta_prior(6, 6), 0.05));
  CHECK(s.cell(5, 5) != CellClass::NotWi);    // (6, 6)
  CHECK(s.cell(0, 0) == CellClass::UniformlyWi);  // flat prior
  CHECK(s.cell(19, 19) == CellClass::NotWi);
}

TEST_CASE("logistic predictive concentrates on two points as the intercept scale grows") {
  const ProductPrior wide = product_prior({normal_prior(0, 1e6), normal_prior(0, 6.25)});
  const Eigen::VectorXd pmf = logistic_predictive_pmf(bioassay(), wide);
  const SamplingModel m = bioassay();
  const double ends = pmf[lattice_index(m, SufficientStat::counts({0, 0, 0, 0}))] +
                      pmf[lattice_index(m, SufficientStat::counts({5, 5, 5, 5}))];
  CHECK(ends > 0.9);
  CHECK(std::abs(pmf.sum() - 1.0) < 1e-3);
}

TEST_CASE("logistic scan: base is weakly informative, huge intercept scales are not") {
  const Axis s0{"sigma0", 10.0, 1000.0, 3}, s1{"sigma1", 2.5, 2.5, 1};
  const RegionScan s = logistic_scan(bioassay(), normal_base(), AltFamily::NormalNormal, 0.05, s0, s1);
  check_nesting(s, pvalue_quantile(bioassay(), normal_base(), 0.05));
  CHECK(s.cell(0, 0) != CellClass::NotWi);
  CHECK(s.cell(2, 0) == CellClass::NotWi);
  CHECK(s.methods[0] == Method::Quadrature);
}

TEST_CASE("logistic reduction field") {
  const Axis s0{"sigma0", 5.0, 15.0, 5}, s1{"sigma1", 1.5, 3.5, 5};
  const ReductionField f = logistic_reduction(bioassay(), normal_base(), AltFamily::NormalNormal, 0.05, s0, s1);
  CHECK((f.values.array() <= 1.0).all());
  CHECK(std::abs(f.quantile - 0.0503) < 5e-4);
  // s0 = 10, s1 = 2.5 are the base scales
  CHECK(std::abs(f.values(2, 2)) < 1e-9);

  const Axis one0{"sigma0", 10.0, 10.0, 1}, one1{"sigma1", 2.5, 2.5, 1};
  const ReductionField t = logistic_reduction(bioassay(), normal_base(), AltFamily::TT, 0.05, one0, one1, {}, 1.0);
  CHECK(t.values(0, 0) <= 1.0);
}

TEST_CASE("points on the 50 percent contour have half reduction") {
  const Axis s0{"sigma0", 0.5, 6.0, 8}, s1{"sigma1", 0.5, 4.0, 8};
  const ReductionField f = logistic_reduction(bioassay(), normal_base(), AltFamily::NormalNormal, 0.05, s0, s1);
  const auto lines = contour_lines(f, {0.5});
  REQUIRE_FALSE(lines.empty());
  const auto& pts = lines.front().points;
  REQUIRE(pts.size() >= 2);
  const auto p = pts[pts.size() / 2];
  const ProductPrior alt = logistic_alternative(AltFamily::NormalNormal, p[0], p[1]);
  const auto r = reduction(bioassay(), normal_base(), alt, 0.05);
  REQUIRE(r.has_value());
  CHECK(std::abs(*r - 0.5) < 0.02);
}

TEST_CASE("slice maximum is a plateau containing its argmax") {
  const SliceMax s = logistic_slice_argmax(bioassay(), normal_base(), AltFamily::NormalNormal, 0.05, true, 2.5,
                                           Axis{"sigma0", 0.5, 1.5, 11});
  CHECK(s.plateau_lo <= s.argmax);
  CHECK(s.argmax <= s.plateau_hi);
  CHECK(s.grid.size() == s.reductions.size());
  for (double r : s.reductions) CHECK(r <= s.max_reduction + 1e-12);
  const auto at = reduction(bioassay(), normal_base(), logistic_alternative(AltFamily::NormalNormal, s.argmax, 2.5), 0.05);
  CHECK(*at == doctest::Approx(s.max_reduction).epsilon(1e-9));
}

TEST_CASE("multinomial scan matches conditional enumeration for a small case") {
  const long n = 4;
  const std::array<long, 2> u1{2, 2}, u2{1, 3};
  const Axis ax{"alpha", 1.0, 25.0, 7}, bx{"beta", 1.0, 25.0, 7};
  const RegionScan s = multinomial_ancillary_scan(n, u1, u2, beta_prior(20, 20), 0.05, ax, bx);
  check_nesting(s, 1.0);
  for (int i = 0; i < ax.steps; ++i)
    for (int j = 0; j < bx.steps; ++j) {
      bool level = true, uniform = true;
      double evidence = 0.0;
      for (int which : {1, 2}) {
        const auto [base, alt] = conditional_pmfs(n, which, which == 1 ? u1 : u2, 20, 20, ax.value(i), bx.value(j));
        const double x = oracle::x_gamma(base, 0.05), r = oracle::eq4(base, alt, x);
        level = level && oracle::round12(r) <= oracle::round12(x);
        uniform = uniform && oracle_uniform(base, alt);
        evidence = std::max(evidence, r / x);
      }
      const CellClass c = s.cell(i, j);
      CHECK((c == CellClass::UniformlyWi) == uniform);
      CHECK((c != CellClass::NotWi) == (uniform || level));
      CHECK(s.evidence[std::size_t(i * bx.steps + j)] == doctest::Approx(evidence).epsilon(1e-12));
    }
}

TEST_CASE("multinomial example has weakly informative and uniform regions") {
  const Axis ax{"alpha", 1.0, 30.0, 12};
  const RegionScan s = multinomial_ancillary_scan(18, {10, 8}, {8, 10}, beta_prior(20, 20), 0.05, ax, ax);
  check_nesting(s, 1.0);
  int level = 0, uniform = 0, bad = 0;
  for (CellClass c : s.cells) {
    level += c == CellClass::WiAtLevel;
    uniform += c == CellClass::UniformlyWi;
    bad += c == CellClass::NotWi;
  }
  CHECK(level + uniform > 0);
  CHECK(uniform > 0);
  CHECK(bad > 0);
  const RegionScan own = multinomial_ancillary_scan(18, {10, 8}, {8, 10}, beta_prior(20, 20), 0.05,
                                                    Axis{"alpha", 20, 20, 1}, Axis{"beta", 20, 20, 1});
  CHECK(own.cells[0] != CellClass::NotWi);
  CHECK_THROWS(multinomial_ancillary_scan(18, {10, 9}, {8, 10}, beta_prior(20, 20), 0.05, ax, ax));
}

TEST_CASE("contours of an analytic field") {
  ReductionField f;
  f.x = Axis{"x", -2.0, 2.0, 41};
  f.y = Axis{"y", -2.0, 2.0, 41};
  f.values.resize(41, 41);
  for (int i = 0; i < 41; ++i)
    for (int j = 0; j < 41; ++j) f.values(i, j) = f.x.value(i) * f.x.value(i) + f.y.value(j) * f.y.value(j);
  const auto lines = contour_lines(f, {1.0, 9.0});
  REQUIRE(lines.size() == 1);  // radius 3 lies outside the grid
  const auto& pts = lines[0].points;
  CHECK(pts.size() > 20);
  for (const auto& p : pts) CHECK(std::abs(std::hypot(p[0], p[1]) - 1.0) < 0.01);
  // closed curve: ends meet
  CHECK(std::hypot(pts.front()[0] - pts.back()[0], pts.front()[1] - pts.back()[1]) < 1e-12);

  std::ostringstream os;
  write_contours_csv(os, lines);
  CHECK(os.str().rfind("level,polyline,x,y\n", 0) == 0);
}

TEST_CASE("scans are deterministic") {
  const Axis ax{"alpha", 0.5, 14.0, 12};
  std::ostringstream a, b;
  write_scan_csv(a, betabinom_scan(20, false, beta_prior(6, 6), 0.05, ax, ax));
  write_scan_csv(b, betabinom_scan(20, false, beta_prior(6, 6), 0.05, ax, ax));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("alpha,alpha,classification,method,pvalue_evidence\n", 0) == 0);

  const Axis s0{"sigma0", 2.0, 12.0, 3}, s1{"sigma1", 1.0, 4.0, 3};
  std::ostringstream c, d;
  write_reduction_csv(c, logistic_reduction(bioassay(), normal_base(), AltFamily::NormalT, 0.05, s0, s1, {}, 1.0));
  write_reduction_csv(d, logistic_reduction(bioassay(), normal_base(), AltFamily::NormalT, 0.05, s0, s1, {}, 1.0));
  CHECK(c.str() == d.str());
}

TEST_CASE("scan arguments are validated") {
  CHECK_THROWS(betabinom_scan(0, false, beta_prior(6, 6), 0.05, Axis{"a", 1, 2, 2}, Axis{"b", 1, 2, 2}));
  CHECK_THROWS(betabinom_scan(20, false, beta_prior(6, 6), 0.05, Axis{"a", -1, 2, 2}, Axis{"b", 1, 2, 2}));
  CHECK_THROWS(betabinom_scan(20, false, beta_prior(6, 6), 0.05, Axis{"a", 1, 2, 0}, Axis{"b", 1, 2, 2}));
  CHECK(parse_alt_family("t-normal") == AltFamily::TNormal);
  CHECK_THROWS(parse_alt_family("cauchy"));
  CHECK(cell_class_name(CellClass::Indeterminate) == "indeterminate");
}
