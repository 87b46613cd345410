#include "ctalab/lora.hpp"

#include <algorithm>

#include "ctalab/error.hpp"
#include "ctalab/rng.hpp"

namespace ctalab {

namespace {

const std::vector<std::string>& known_targets() {
  static const std::vector<std::string> names = {"wq", "wk", "wv", "wo", "w1", "w2"};
  return names;
}

}  // namespace

const LoraAdapter* AdapterSet::find(std::string_view target) const {
  for (const auto& adapter : adapters) {
    if (adapter.target == target) return &adapter;
  }
  return nullptr;
}

LoraAdapter* AdapterSet::find(std::string_view target) {
  for (auto& adapter : adapters) {
    if (adapter.target == target) return &adapter;
  }
  return nullptr;
}

Eigen::MatrixXd& target_matrix(TransformerWeights& weights, std::string_view target) {
  const auto dot = target.find('.');
  if (dot == std::string_view::npos || !target.starts_with("layer")) {
    throw Error(ErrorCode::InvalidArgument, "bad adapter target '" + std::string(target) + "'");
  }
  std::size_t layer = 0;
  try {
    layer = static_cast<std::size_t>(std::stoul(std::string(target.substr(5, dot - 5))));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad adapter target '" + std::string(target) + "'");
  }
  if (layer >= weights.layers.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "adapter target '" + std::string(target) + "' is outside the model");
  }
  const auto name = target.substr(dot + 1);
  auto& l = weights.layers[layer];
  if (name == "wq") return l.wq;
  if (name == "wk") return l.wk;
  if (name == "wv") return l.wv;
  if (name == "wo") return l.wo;
  if (name == "w1") return l.w1;
  if (name == "w2") return l.w2;
  throw Error(ErrorCode::InvalidArgument, "bad adapter target '" + std::string(target) + "'");
}

const Eigen::MatrixXd& target_matrix(const TransformerWeights& weights,
                                     std::string_view target) {
  return target_matrix(const_cast<TransformerWeights&>(weights), target);
}

AdapterSet inject(const TransformerWeights& weights, const LoraConfig& config,
                  std::uint64_t seed) {
  if (config.rank < 1) throw Error(ErrorCode::InvalidArgument, "rank must be >= 1");
  for (const auto& name : config.targets) {
    if (std::find(known_targets().begin(), known_targets().end(), name) ==
        known_targets().end()) {
      throw Error(ErrorCode::InvalidArgument, "unknown adapter target '" + name + "'");
    }
  }

  AdapterSet set;
  set.config = config;
  set.config.alpha = config.resolved_alpha();
  Rng rng(seed);
  for (std::size_t li = 0; li < weights.layers.size(); ++li) {
    for (const auto& name : config.targets) {
      const std::string target = "layer" + std::to_string(li) + "." + name;
      const auto& w = target_matrix(weights, target);
      if (config.rank >= std::min(w.rows(), w.cols())) {
        throw Error(ErrorCode::RankTooLarge,
                    "rank " + std::to_string(config.rank) + " >= min dimension of " + target);
      }
      LoraAdapter adapter;
      adapter.target = target;
      adapter.a.resize(w.rows(), config.rank);
      for (Eigen::Index r = 0; r < adapter.a.rows(); ++r) {
        for (Eigen::Index c = 0; c < adapter.a.cols(); ++c) {
          adapter.a(r, c) = rng.next_normal(0.0, config.init_std);
        }
      }
      adapter.b = Eigen::MatrixXd::Zero(config.rank, w.cols());
      set.adapters.push_back(std::move(adapter));
    }
  }
  return set;
}

Eigen::MatrixXd effective_weight(const Eigen::MatrixXd& w, const LoraAdapter& adapter,
                                 double alpha) {
  if (adapter.a.rows() != w.rows() || adapter.b.cols() != w.cols() ||
      adapter.a.cols() != adapter.b.rows()) {
    throw Error(ErrorCode::ShapeMismatch,
                "adapter '" + adapter.target + "' does not match its target matrix");
  }
  const double scale = alpha / static_cast<double>(adapter.a.cols());
  return w + scale * (adapter.a * adapter.b);
}

TransformerWeights merge(const TransformerWeights& weights, const AdapterSet& set) {
  TransformerWeights merged = weights;
  for (const auto& adapter : set.adapters) {
    auto& w = target_matrix(merged, adapter.target);
    w = effective_weight(w, adapter, set.config.resolved_alpha());
  }
  return merged;
}

long long trainable_param_count(const AdapterSet& set) {
  long long count = 0;
  for (const auto& adapter : set.adapters) {
    count += static_cast<long long>(adapter.a.size()) +
             static_cast<long long>(adapter.b.size());
  }
  return count;
}

}  // namespace ctalab
