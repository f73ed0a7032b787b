#pragma once

namespace priorinfo::detail {

// Visitor built from a set of lambdas.
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace priorinfo::detail
