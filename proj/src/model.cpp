#include "ctalab/model.hpp"

#include <cmath>

#include "ctalab/error.hpp"
#include "ctalab/lora.hpp"
#include "ctalab/rng.hpp"
#include "ctalab/tokenizer.hpp"

namespace ctalab {

namespace {

constexpr double kLnEpsilon = 1e-5;

void fill_normal(Eigen::MatrixXd& m, Rng& rng, double stddev) {
  // Row-major fill so the draw order is part of the format.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.next_normal(0.0, stddev);
    }
  }
}

// y = x-hat * gain + bias, row-wise; returns x-hat and 1/std per row.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& gain,
                           const Eigen::VectorXd& bias, Eigen::MatrixXd& normed,
                           Eigen::VectorXd& rstd) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  normed.resize(rows, cols);
  rstd.resize(rows);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + kLnEpsilon);
    rstd(r) = inv;
    normed.row(r) = (x.row(r).array() - mean) * inv;
    out.row(r) = normed.row(r).cwiseProduct(gain.transpose()) + bias.transpose();
  }
  return out;
}

Eigen::MatrixXd resolve(const Eigen::MatrixXd& base, const AdapterSet* adapters,
                        const std::string& target) {
  if (adapters != nullptr) {
    if (const LoraAdapter* adapter = adapters->find(target)) {
      return effective_weight(base, *adapter, adapters->config.resolved_alpha());
    }
  }
  return base;
}

}  // namespace

void ModelConfig::validate() const {
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0 ||
      context_length <= 0 || vocab_size <= 0) {
    throw Error(ErrorCode::InvalidArgument, "model dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw Error(ErrorCode::InvalidArgument, "d_model must be divisible by n_heads");
  }
}

std::vector<TensorView> tensor_views(TransformerWeights& w) {
  std::vector<TensorView> views;
  const auto add_matrix = [&](const std::string& name, Eigen::MatrixXd& m) {
    views.push_back({name, m.data(), m.rows(), m.cols()});
  };
  const auto add_vector = [&](const std::string& name, Eigen::VectorXd& v) {
    views.push_back({name, v.data(), v.size(), 1});
  };
  add_matrix("token_embedding", w.token_embedding);
  add_matrix("position_embedding", w.position_embedding);
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    auto& layer = w.layers[i];
    add_matrix(p + "wq", layer.wq);
    add_matrix(p + "wk", layer.wk);
    add_matrix(p + "wv", layer.wv);
    add_matrix(p + "wo", layer.wo);
    add_matrix(p + "w1", layer.w1);
    add_matrix(p + "w2", layer.w2);
    add_vector(p + "ln1_gain", layer.ln1_gain);
    add_vector(p + "ln1_bias", layer.ln1_bias);
    add_vector(p + "ln2_gain", layer.ln2_gain);
    add_vector(p + "ln2_bias", layer.ln2_bias);
  }
  add_vector("final_gain", w.final_gain);
  add_vector("final_bias", w.final_bias);
  add_matrix("lm_head", w.lm_head);
  return views;
}

TransformerWeights init_weights(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  TransformerWeights w;
  w.config = config;
  Rng rng(seed);
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(config.d_model));
  const double ff_std = 1.0 / std::sqrt(static_cast<double>(config.d_ff));

  w.token_embedding.resize(config.vocab_size, config.d_model);
  fill_normal(w.token_embedding, rng, 0.02);
  w.position_embedding.resize(config.context_length, config.d_model);
  fill_normal(w.position_embedding, rng, 0.02);

  w.layers.resize(static_cast<std::size_t>(config.n_layers));
  for (auto& layer : w.layers) {
    layer.wq.resize(config.d_model, config.d_model);
    layer.wk.resize(config.d_model, config.d_model);
    layer.wv.resize(config.d_model, config.d_model);
    layer.wo.resize(config.d_model, config.d_model);
    fill_normal(layer.wq, rng, proj_std);
    fill_normal(layer.wk, rng, proj_std);
    fill_normal(layer.wv, rng, proj_std);
    fill_normal(layer.wo, rng, proj_std);
    layer.w1.resize(config.d_model, config.d_ff);
    layer.w2.resize(config.d_ff, config.d_model);
    fill_normal(layer.w1, rng, proj_std);
    fill_normal(layer.w2, rng, ff_std);
    layer.ln1_gain = Eigen::VectorXd::Ones(config.d_model);
    layer.ln1_bias = Eigen::VectorXd::Zero(config.d_model);
    layer.ln2_gain = Eigen::VectorXd::Ones(config.d_model);
    layer.ln2_bias = Eigen::VectorXd::Zero(config.d_model);
  }
  w.final_gain = Eigen::VectorXd::Ones(config.d_model);
  w.final_bias = Eigen::VectorXd::Zero(config.d_model);
  w.lm_head.resize(config.d_model, config.vocab_size);
  fill_normal(w.lm_head, rng, proj_std);
  return w;
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

double gelu_derivative(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
  const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  return cdf + x * phi;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    Eigen::ArrayXd e = (logits.row(r).array() - m).exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

Eigen::MatrixXd forward(const TransformerWeights& weights, const AdapterSet* adapters,
                        std::span<const int> ids, ForwardCache* cache) {
  const auto& cfg = weights.config;
  const auto T = static_cast<Eigen::Index>(ids.size());
  if (T == 0) throw Error(ErrorCode::InvalidArgument, "forward needs at least one token");
  if (T > cfg.context_length) {
    throw Error(ErrorCode::SequenceTooLong,
                std::to_string(ids.size()) + " tokens exceed context length " +
                    std::to_string(cfg.context_length));
  }
  const int n_heads = cfg.n_heads;
  const Eigen::Index d_head = cfg.d_model / n_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d_head));

  Eigen::MatrixXd x(T, cfg.d_model);
  for (Eigen::Index t = 0; t < T; ++t) {
    const int id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= cfg.vocab_size) {
      throw Error(ErrorCode::InvalidArgument, "token id " + std::to_string(id) + " out of range");
    }
    x.row(t) = weights.token_embedding.row(id) + weights.position_embedding.row(t);
  }
  if (cache) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->x0 = x;
    cache->layers.assign(weights.layers.size(), LayerCache{});
  }

  Eigen::MatrixXd normed;
  Eigen::VectorXd rstd;
  for (std::size_t li = 0; li < weights.layers.size(); ++li) {
    const auto& layer = weights.layers[li];
    const std::string prefix = "layer" + std::to_string(li) + ".";
    LayerCache* lc = cache ? &cache->layers[li] : nullptr;
    if (lc) lc->x_in = x;

    const Eigen::MatrixXd wq = resolve(layer.wq, adapters, prefix + "wq");
    const Eigen::MatrixXd wk = resolve(layer.wk, adapters, prefix + "wk");
    const Eigen::MatrixXd wv = resolve(layer.wv, adapters, prefix + "wv");
    const Eigen::MatrixXd wo = resolve(layer.wo, adapters, prefix + "wo");
    const Eigen::MatrixXd w1 = resolve(layer.w1, adapters, prefix + "w1");
    const Eigen::MatrixXd w2 = resolve(layer.w2, adapters, prefix + "w2");

    const Eigen::MatrixXd n1 = layer_norm(x, layer.ln1_gain, layer.ln1_bias, normed, rstd);
    if (lc) {
      lc->normed1 = normed;
      lc->rstd1 = rstd;
    }
    const Eigen::MatrixXd q = n1 * wq;
    const Eigen::MatrixXd k = n1 * wk;
    const Eigen::MatrixXd v = n1 * wv;

    Eigen::MatrixXd heads(T, cfg.d_model);
    std::vector<Eigen::MatrixXd> probs;
    if (lc) probs.reserve(static_cast<std::size_t>(n_heads));
    for (int h = 0; h < n_heads; ++h) {
      const auto qh = q.middleCols(h * d_head, d_head);
      const auto kh = k.middleCols(h * d_head, d_head);
      const auto vh = v.middleCols(h * d_head, d_head);
      Eigen::MatrixXd scores = qh * kh.transpose() * inv_sqrt_dh;
      Eigen::MatrixXd p(T, T);
      for (Eigen::Index i = 0; i < T; ++i) {
        // Causal mask: row i sees columns 0..i only.
        const auto row = scores.row(i).head(i + 1);
        const double m = row.maxCoeff();
        Eigen::ArrayXd e = (row.array() - m).exp();
        const double z = e.sum();
        p.row(i).setZero();
        p.row(i).head(i + 1) = e / z;
      }
      heads.middleCols(h * d_head, d_head) = p * vh;
      if (lc) probs.push_back(std::move(p));
    }
    if (lc) {
      lc->q = q;
      lc->k = k;
      lc->v = v;
      lc->attn = std::move(probs);
      lc->heads = heads;
      lc->wq_eff = wq;
      lc->wk_eff = wk;
      lc->wv_eff = wv;
      lc->wo_eff = wo;
      lc->w1_eff = w1;
      lc->w2_eff = w2;
    }
    x += heads * wo;
    if (lc) lc->x_mid = x;

    const Eigen::MatrixXd n2 = layer_norm(x, layer.ln2_gain, layer.ln2_bias, normed, rstd);
    if (lc) {
      lc->normed2 = normed;
      lc->rstd2 = rstd;
    }
    Eigen::MatrixXd ff_pre = n2 * w1;
    Eigen::MatrixXd ff_act = ff_pre.unaryExpr([](double v) { return gelu(v); });
    if (lc) {
      lc->ff_pre = ff_pre;
      lc->ff_act = ff_act;
    }
    x += ff_act * w2;
  }

  const Eigen::MatrixXd hidden =
      layer_norm(x, weights.final_gain, weights.final_bias, normed, rstd);
  if (cache) {
    cache->normed_final = normed;
    cache->rstd_final = rstd;
    cache->hidden_final = hidden;
  }
  return hidden * weights.lm_head;
}

std::vector<int> generate_greedy(const TransformerWeights& weights,
                                 const AdapterSet* adapters,
                                 std::span<const int> prompt_ids, int max_new_tokens) {
  const auto& cfg = weights.config;
  if (static_cast<int>(prompt_ids.size()) > cfg.context_length) {
    throw Error(ErrorCode::SequenceTooLong, "prompt does not fit the context window");
  }
  std::vector<int> ids(prompt_ids.begin(), prompt_ids.end());
  std::vector<int> out;
  for (int step = 0; step < max_new_tokens; ++step) {
    if (static_cast<int>(ids.size()) >= cfg.context_length) break;
    const Eigen::MatrixXd logits = forward(weights, adapters, ids);
    const auto last = logits.row(logits.rows() - 1);
    int best = 0;
    for (int v = 1; v < cfg.vocab_size; ++v) {
      if (last(v) > last(best)) best = v;  // ties keep the lowest id
    }
    if (best == Tokenizer::kEosId) break;
    out.push_back(best);
    ids.push_back(best);
  }
  return out;
}

}  // namespace ctalab
