#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace evidentia {

// Dense table over a sorted list of variable indices; the last variable
// varies fastest.
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> card;
  std::vector<double> values;

  static Factor unit(std::vector<std::size_t> vars, std::vector<std::size_t> card) {
    std::size_t n = std::accumulate(card.begin(), card.end(), std::size_t{1}, std::multiplies<>());
    return Factor{std::move(vars), std::move(card), std::vector<double>(n, 1.0)};
  }

  double sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

  void scale(double s) {
    for (double& v : values) v *= s;
  }
};

namespace detail {

// For each variable of `outer`, its stride inside `inner` (0 when absent).
inline std::vector<std::size_t> embedded_strides(const Factor& outer, const Factor& inner) {
  std::vector<std::size_t> inner_strides(inner.vars.size(), 1);
  for (std::size_t i = inner.vars.size(); i-- > 1;) inner_strides[i - 1] = inner_strides[i] * inner.card[i];
  std::vector<std::size_t> out(outer.vars.size(), 0);
  std::size_t j = 0;
  for (std::size_t i = 0; i < outer.vars.size() && j < inner.vars.size(); ++i) {
    if (outer.vars[i] == inner.vars[j]) out[i] = inner_strides[j++];
  }
  return out;
}

// Visits every entry of `outer` together with the matching entry of `inner`.
template <typename Fn>
void walk(const Factor& outer, const Factor& inner, Fn&& fn) {
  const auto strides = embedded_strides(outer, inner);
  std::vector<std::size_t> counter(outer.vars.size(), 0);
  std::size_t inner_index = 0;
  for (std::size_t k = 0; k < outer.values.size(); ++k) {
    fn(k, inner_index);
    for (std::size_t i = outer.vars.size(); i-- > 0;) {
      if (++counter[i] < outer.card[i]) {
        inner_index += strides[i];
        break;
      }
      inner_index -= strides[i] * (outer.card[i] - 1);
      counter[i] = 0;
    }
  }
}

}  // namespace detail

// target *= f, where f's variables are a subset of target's.
inline void multiply_in(Factor& target, const Factor& f) {
  detail::walk(target, f, [&](std::size_t k, std::size_t j) { target.values[k] *= f.values[j]; });
}

// Sums `f` down onto `keep` (a sorted subset of f.vars).
inline Factor marginal(const Factor& f, const std::vector<std::size_t>& keep) {
  std::vector<std::size_t> card;
  for (std::size_t i = 0, j = 0; i < f.vars.size() && j < keep.size(); ++i)
    if (f.vars[i] == keep[j]) {
      card.push_back(f.card[i]);
      ++j;
    }
  Factor out = Factor::unit(keep, std::move(card));
  std::fill(out.values.begin(), out.values.end(), 0.0);
  detail::walk(f, out, [&](std::size_t k, std::size_t j) { out.values[j] += f.values[k]; });
  return out;
}

}  // namespace evidentia
