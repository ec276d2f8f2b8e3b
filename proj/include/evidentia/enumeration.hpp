#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "evidentia/bn.hpp"

namespace evidentia {

inline constexpr std::size_t kDefaultJointCap = std::size_t{1} << 20;

// The full joint distribution of a network, one entry per complete
// assignment. Variables are in sorted id order and the last one varies
// fastest.
class JointTable {
 public:
  JointTable(std::vector<NodeId> variables, std::vector<std::size_t> cardinalities, std::vector<double> probabilities)
      : variables_(std::move(variables)),
        cardinalities_(std::move(cardinalities)),
        probabilities_(std::move(probabilities)) {
    strides_.assign(variables_.size(), 1);
    for (std::size_t i = variables_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * cardinalities_[i];
  }

  const std::vector<NodeId>& variables() const { return variables_; }
  const std::vector<std::size_t>& cardinalities() const { return cardinalities_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::size_t size() const { return probabilities_.size(); }
  double probability(std::size_t row) const { return probabilities_[row]; }

  std::size_t position(const NodeId& v) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
      if (variables_[i] == v) return i;
    throw UnknownNode("unknown node '" + v + "'");
  }

  std::size_t state(std::size_t row, std::size_t var) const { return (row / strides_[var]) % cardinalities_[var]; }

  std::vector<std::size_t> assignment(std::size_t row) const {
    std::vector<std::size_t> out(variables_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = state(row, i);
    return out;
  }

 private:
  std::vector<NodeId> variables_;
  std::vector<std::size_t> cardinalities_;
  std::vector<std::size_t> strides_;
  std::vector<double> probabilities_;
};

inline JointTable enumerate_joint(const DiscreteBayesNet& net, std::size_t cap = kDefaultJointCap) {
  require_valid(net);
  std::vector<NodeId> vars(net.dag().nodes().begin(), net.dag().nodes().end());
  std::vector<std::size_t> cards;
  std::size_t total = 1;
  for (const auto& v : vars) {
    cards.push_back(net.cardinality(v));
    if (total > cap / cards.back()) throw TooLarge("joint state space exceeds the cap of " + std::to_string(cap));
    total *= cards.back();
  }

  // Per node: its own position and its parents' positions in `vars`.
  struct Family {
    std::size_t self;
    std::vector<std::size_t> parents;
    const Cpt* cpt;
  };
  std::vector<Family> families;
  std::map<NodeId, std::size_t> pos;
  for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]] = i;
  for (const auto& v : vars) {
    Family f{pos[v], {}, &net.cpt(v)};
    for (const auto& p : f.cpt->parents) f.parents.push_back(pos[p]);
    families.push_back(std::move(f));
  }

  std::vector<double> probs(total);
  std::vector<std::size_t> states(vars.size(), 0);
  for (std::size_t row = 0; row < total; ++row) {
    double p = 1.0;
    for (const auto& f : families) {
      std::size_t r = 0;
      for (auto pi : f.parents) r = r * cards[pi] + states[pi];
      p *= f.cpt->rows[r][states[f.self]];
    }
    probs[row] = p;
    for (std::size_t i = vars.size(); i-- > 0;) {
      if (++states[i] < cards[i]) break;
      states[i] = 0;
    }
  }
  return JointTable(std::move(vars), std::move(cards), std::move(probs));
}

// Checks A independent of B given C numerically on the enumerated joint.
// Conditioning configurations of probability zero are skipped.
inline bool numeric_ci_check(const DiscreteBayesNet& net, const CiQuery& q, double tol,
                             std::size_t cap = kDefaultJointCap) {
  validate_query(net.dag(), q);
  JointTable joint = enumerate_joint(net, cap);

  auto encoder = [&](const NodeSet& s) {
    std::vector<std::size_t> positions;
    std::size_t size = 1;
    for (const auto& v : s) {
      positions.push_back(joint.position(v));
      size *= net.cardinality(v);
    }
    return std::make_pair(positions, size);
  };
  auto [a_pos, a_size] = encoder(q.a);
  auto [b_pos, b_size] = encoder(q.b);
  auto [c_pos, c_size] = encoder(q.c);
  auto encode = [&](std::size_t row, const std::vector<std::size_t>& positions) {
    std::size_t code = 0;
    for (auto p : positions) code = code * joint.cardinalities()[p] + joint.state(row, p);
    return code;
  };

  // abc[(c * a_size + a) * b_size + b]
  std::vector<double> abc(a_size * b_size * c_size, 0.0);
  for (std::size_t row = 0; row < joint.size(); ++row) {
    std::size_t a = encode(row, a_pos), b = encode(row, b_pos), c = encode(row, c_pos);
    abc[(c * a_size + a) * b_size + b] += joint.probability(row);
  }

  for (std::size_t c = 0; c < c_size; ++c) {
    std::vector<double> pa(a_size, 0.0), pb(b_size, 0.0);
    double pc = 0.0;
    for (std::size_t a = 0; a < a_size; ++a)
      for (std::size_t b = 0; b < b_size; ++b) {
        double p = abc[(c * a_size + a) * b_size + b];
        pa[a] += p;
        pb[b] += p;
        pc += p;
      }
    if (pc <= 0.0) continue;
    for (std::size_t a = 0; a < a_size; ++a)
      for (std::size_t b = 0; b < b_size; ++b) {
        double lhs = abc[(c * a_size + a) * b_size + b] / pc;
        double rhs = (pa[a] / pc) * (pb[b] / pc);
        if (std::abs(lhs - rhs) > tol) return false;
      }
  }
  return true;
}

}  // namespace evidentia
