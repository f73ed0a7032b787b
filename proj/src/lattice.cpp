#include "priorinfo/lattice.hpp"

#include <algorithm>
#include <numeric>

#include "priorinfo/distmath.hpp"

namespace priorinfo {

PmfLadder::PmfLadder(Eigen::VectorXd pmf) : pmf_(std::move(pmf)) {
  const Eigen::Index n = pmf_.size();
  if (n == 0) throw DomainError("PmfLadder: empty pmf");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(pmf_[i] >= 0.0) || !std::isfinite(pmf_[i]))
      throw DomainError("PmfLadder: pmf entries must be finite and nonnegative");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [this](Eigen::Index a, Eigen::Index b) { return pmf_[a] < pmf_[b]; });

  // Walk upward through tie groups. A group collects consecutive sorted values
  // tied with the group's first member, so chains of tiny steps cannot merge
  // genuinely different values.
  pvalues_.resize(n);
  NeumaierSum cumulative;
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && tied(pmf_[order[start]], pmf_[order[end]])) ++end;
    for (std::size_t j = start; j < end; ++j) cumulative.add(pmf_[order[j]]);
    const double p = cumulative.value();
    for (std::size_t j = start; j < end; ++j) pvalues_[order[j]] = p;
    levels_.push_back(p);
    start = end;
  }
  total_ = cumulative.value();
  max_mass_ = pmf_.maxCoeff();
}

double PmfLadder::quantile(double gamma) const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("quantile: gamma must lie in (0,1)");
  // Achievable values satisfy M(P <= v) = v, so the quantile is the first
  // level that reaches gamma.
  for (double v : levels_)
    if (v >= gamma || tied(v, gamma)) return v;
  return levels_.back();
}

double mass_at_or_below(const Eigen::VectorXd& base_pmf, const Eigen::VectorXd& pvalues, double x) {
  if (base_pmf.size() != pvalues.size()) throw DomainError("mass_at_or_below: size mismatch");
  NeumaierSum sum;
  for (Eigen::Index i = 0; i < base_pmf.size(); ++i)
    if (leq_tied(pvalues[i], x)) sum.add(base_pmf[i]);
  return sum.value();
}

TailMassTable::TailMassTable(const Eigen::VectorXd& base_pmf, const Eigen::VectorXd& pvalues) {
  if (base_pmf.size() != pvalues.size()) throw DomainError("TailMassTable: size mismatch");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pvalues.size()));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return pvalues[a] < pvalues[b]; });
  NeumaierSum sum;
  for (Eigen::Index i : order) {
    sum.add(base_pmf[i]);
    sorted_p_.push_back(pvalues[i]);
    cumulative_.push_back(sum.value());
  }
}

double TailMassTable::operator()(double x) const {
  // Last sorted entry with p <= x under the tie rule.
  const double bound = x + kTieTolerance * std::abs(x);
  auto it = std::upper_bound(sorted_p_.begin(), sorted_p_.end(), bound);
  while (it != sorted_p_.end() && leq_tied(*it, x)) ++it;
  while (it != sorted_p_.begin() && !leq_tied(*(it - 1), x)) --it;
  if (it == sorted_p_.begin()) return 0.0;
  return cumulative_[std::size_t(it - sorted_p_.begin()) - 1];
}

MixedRadix::MixedRadix(std::vector<int> extents) : extents_(std::move(extents)) {
  stride_.assign(extents_.size(), 1);
  for (std::size_t i = extents_.size(); i-- > 0;) {
    if (extents_[i] < 0) throw DomainError("MixedRadix: negative extent");
    stride_[i] = size_;
    size_ *= std::int64_t(extents_[i]) + 1;
  }
}

std::int64_t MixedRadix::index(const std::vector<long>& digits) const {
  if (digits.size() != extents_.size()) throw DomainError("MixedRadix: wrong number of digits");
  std::int64_t idx = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 0 || digits[i] > extents_[i]) throw DomainError("MixedRadix: digit out of range");
    idx += digits[i] * stride_[i];
  }
  return idx;
}

std::vector<long> MixedRadix::digits(std::int64_t index) const {
  if (index < 0 || index >= size_) throw DomainError("MixedRadix: index out of range");
  std::vector<long> d(extents_.size());
  for (std::size_t i = 0; i < extents_.size(); ++i) {
    d[i] = long(index / stride_[i]);
    index %= stride_[i];
  }
  return d;
}

}  // namespace priorinfo
