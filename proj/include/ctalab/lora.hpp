#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctalab/model.hpp"

namespace ctalab {

// Default update scale alpha/r for fresh adapters. The base model here is
// randomly initialized rather than pre-trained, so at the stock learning
// rate (1e-4, ~tens of optimizer steps per run) adapters whose update
// enters at scale 1 cannot move the logits measurably within the epoch
// budget. A large fixed scale keeps the published learning rate while
// making desk-scale runs converge; it is plain reparametrization, the
// update is still W + (alpha/r) * A*B.
inline constexpr double kDefaultLoraScale = 2048.0;

struct LoraConfig {
  int rank = 16;
  // alpha <= 0 means "kDefaultLoraScale * rank", resolved at injection.
  double alpha = 0.0;
  std::vector<std::string> targets = {"wq", "wv"};  // applied per layer
  double init_std = 0.02;

  double resolved_alpha() const {
    return alpha > 0.0 ? alpha : kDefaultLoraScale * rank;
  }
};

// Trainable low-rank factors for one frozen matrix W (d_in x d_out):
// a is d_in x r, b is r x d_out, update = (alpha/r) * a * b.
struct LoraAdapter {
  std::string target;  // e.g. "layer0.wq"
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

struct AdapterSet {
  LoraConfig config;
  std::vector<LoraAdapter> adapters;

  double scale() const { return config.resolved_alpha() / config.rank; }
  const LoraAdapter* find(std::string_view target) const;
  LoraAdapter* find(std::string_view target);
};

// One adapter per target matrix per layer; a ~ N(0, init_std^2) (seeded),
// b = 0, so the freshly adapted model computes exactly the base model.
// Throws RankTooLarge when r >= min(d_in, d_out) of any target.
AdapterSet inject(const TransformerWeights& weights, const LoraConfig& config,
                  std::uint64_t seed);

// W + (alpha/r) * a * b; shapes are checked.
Eigen::MatrixXd effective_weight(const Eigen::MatrixXd& w, const LoraAdapter& adapter,
                                 double alpha);

// Bakes every adapter into a copy of the weights; the input is untouched
// and the result carries no adapters.
TransformerWeights merge(const TransformerWeights& weights, const AdapterSet& adapters);

// Sum of r * (d_in + d_out) over adapters (2rd per square target).
long long trainable_param_count(const AdapterSet& adapters);

// Resolves a target id against a model, e.g. "layer1.wv".
Eigen::MatrixXd& target_matrix(TransformerWeights& weights, std::string_view target);
const Eigen::MatrixXd& target_matrix(const TransformerWeights& weights,
                                     std::string_view target);

}  // namespace ctalab
