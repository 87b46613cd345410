#include "ctalab/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ctalab/error.hpp"
#include "ctalab/fingerprint.hpp"
#include "ctalab/rng.hpp"

namespace ctalab {

namespace {

Eigen::Map<Eigen::ArrayXd> as_array(const TensorView& view) {
  return Eigen::Map<Eigen::ArrayXd>(view.data, view.size());
}

Eigen::Map<const Eigen::ArrayXd> as_const_array(const TensorView& view) {
  return Eigen::Map<const Eigen::ArrayXd>(view.data, view.size());
}

// dy is the gradient at the LN output; accumulates into dgain/dbias/dx.
void layer_norm_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& normed,
                         const Eigen::VectorXd& rstd, const Eigen::VectorXd& gain,
                         Eigen::VectorXd* dgain, Eigen::VectorXd* dbias,
                         Eigen::MatrixXd& dx) {
  const Eigen::Index cols = dy.cols();
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    if (dgain) *dgain += dy.row(r).cwiseProduct(normed.row(r)).transpose();
    if (dbias) *dbias += dy.row(r).transpose();
    const Eigen::ArrayXd dxhat = dy.row(r).transpose().array() * gain.array();
    const double m1 = dxhat.mean();
    const double m2 = (dxhat * normed.row(r).transpose().array()).mean();
    dx.row(r) += (rstd(r) *
                  (dxhat - m1 - normed.row(r).transpose().array() * m2))
                     .matrix()
                     .transpose();
  }
}

Eigen::MatrixXd gained(const Eigen::MatrixXd& normed, const Eigen::VectorXd& gain,
                       const Eigen::VectorXd& bias) {
  Eigen::MatrixXd out(normed.rows(), normed.cols());
  for (Eigen::Index r = 0; r < normed.rows(); ++r) {
    out.row(r) = normed.row(r).cwiseProduct(gain.transpose()) + bias.transpose();
  }
  return out;
}

void scale_gradients(Gradients& grads, double factor) {
  if (grads.base) {
    for (auto& view : tensor_views(*grads.base)) as_array(view) *= factor;
  }
  if (grads.adapters) {
    for (auto& adapter : grads.adapters->adapters) {
      adapter.a *= factor;
      adapter.b *= factor;
    }
  }
}

}  // namespace

const char* to_string(TrainMode mode) {
  return mode == TrainMode::Lora ? "lora" : "sft";
}

TrainMode train_mode_from_string(std::string_view name) {
  if (name == "lora") return TrainMode::Lora;
  if (name == "sft") return TrainMode::Sft;
  throw Error(ErrorCode::InvalidArgument, "unknown train mode '" + std::string(name) + "'");
}

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd") return OptimizerKind::Sgd;
  throw Error(ErrorCode::InvalidArgument, "unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0 || batch_size < 1 || max_epochs < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "learning rate, batch size and epochs must be positive");
  }
}

std::string train_config_to_json(const TrainConfig& config) {
  nlohmann::json j = {
      {"mode", to_string(config.mode)},
      {"learning_rate", config.learning_rate},
      {"batch_size", config.batch_size},
      {"max_epochs", config.max_epochs},
      {"seed", config.seed},
      {"optimizer", to_string(config.optimizer)},
      {"early_stop_loss", config.early_stop_loss},
      {"lora",
       {{"rank", config.lora.rank},
        {"alpha", config.lora.alpha},
        {"targets", config.lora.targets},
        {"init_std", config.lora.init_std}}},
      {"model",
       {{"d_model", config.model.d_model},
        {"n_layers", config.model.n_layers},
        {"n_heads", config.model.n_heads},
        {"d_ff", config.model.d_ff},
        {"context_length", config.model.context_length},
        {"vocab_size", config.model.vocab_size}}},
  };
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& json_text) {
  TrainConfig config;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("bad train config json: ") + e.what());
  }
  if (j.contains("mode")) config.mode = train_mode_from_string(j.at("mode").get<std::string>());
  config.learning_rate = j.value("learning_rate", config.learning_rate);
  config.batch_size = j.value("batch_size", config.batch_size);
  config.max_epochs = j.value("max_epochs", config.max_epochs);
  config.seed = j.value("seed", config.seed);
  if (j.contains("optimizer")) {
    config.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  }
  config.early_stop_loss = j.value("early_stop_loss", config.early_stop_loss);
  if (j.contains("lora")) {
    const auto& l = j.at("lora");
    config.lora.rank = l.value("rank", config.lora.rank);
    config.lora.alpha = l.value("alpha", config.lora.alpha);
    if (l.contains("targets")) {
      config.lora.targets = l.at("targets").get<std::vector<std::string>>();
    }
    config.lora.init_std = l.value("init_std", config.lora.init_std);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    config.model.d_model = m.value("d_model", config.model.d_model);
    config.model.n_layers = m.value("n_layers", config.model.n_layers);
    config.model.n_heads = m.value("n_heads", config.model.n_heads);
    config.model.d_ff = m.value("d_ff", config.model.d_ff);
    config.model.context_length = m.value("context_length", config.model.context_length);
    config.model.vocab_size = m.value("vocab_size", config.model.vocab_size);
  }
  return config;
}

EncodedInstance encode_instance(const Tokenizer& tokenizer, const PromptInstance& instance,
                                int context_length) {
  const auto prompt = tokenizer.encode(instance.input_text);
  const auto target = tokenizer.encode(instance.target_label);
  if (target.empty()) {
    throw Error(ErrorCode::InvalidArgument, "instance target label tokenizes to nothing");
  }
  std::vector<int> tokens;
  tokens.reserve(prompt.size() + target.size() + 2);
  tokens.push_back(Tokenizer::kBosId);
  tokens.insert(tokens.end(), prompt.begin(), prompt.end());
  tokens.insert(tokens.end(), target.begin(), target.end());
  tokens.push_back(Tokenizer::kEosId);

  if (static_cast<int>(tokens.size()) - 1 > context_length) {
    throw Error(ErrorCode::SequenceTooLong,
                "instance needs " + std::to_string(tokens.size() - 1) +
                    " positions, context is " + std::to_string(context_length));
  }

  EncodedInstance out;
  const std::size_t rows = tokens.size() - 1;
  out.input_ids.assign(tokens.begin(), tokens.end() - 1);
  out.target_ids.assign(tokens.begin() + 1, tokens.end());
  out.loss_mask.assign(rows, 0);
  for (std::size_t t = prompt.size(); t < rows; ++t) out.loss_mask[t] = 1;
  return out;
}

double token_cross_entropy_loss(const Eigen::MatrixXd& logits,
                                std::span<const int> target_ids,
                                std::span<const std::uint8_t> loss_mask) {
  if (static_cast<std::size_t>(logits.rows()) != target_ids.size() ||
      target_ids.size() != loss_mask.size()) {
    throw Error(ErrorCode::ShapeMismatch, "logits, targets and mask disagree on length");
  }
  double sum = 0.0;
  long long count = 0;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    if (!loss_mask[static_cast<std::size_t>(t)]) continue;
    const int target = target_ids[static_cast<std::size_t>(t)];
    if (target < 0 || target >= logits.cols()) {
      throw Error(ErrorCode::InvalidArgument, "target id out of vocabulary");
    }
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    sum += lse - logits(t, target);
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyMask, "loss mask selects no positions");
  return sum / static_cast<double>(count);
}

Gradients zero_gradients(const TransformerWeights& weights, const AdapterSet* adapters,
                         TrainMode mode) {
  Gradients grads;
  if (mode == TrainMode::Sft) {
    TransformerWeights zero = weights;
    for (auto& view : tensor_views(zero)) as_array(view).setZero();
    grads.base = std::move(zero);
  } else {
    if (adapters == nullptr) {
      throw Error(ErrorCode::InvalidArgument, "LoRA-mode gradients need adapters");
    }
    AdapterSet zero = *adapters;
    for (auto& adapter : zero.adapters) {
      adapter.a.setZero();
      adapter.b.setZero();
    }
    grads.adapters = std::move(zero);
  }
  return grads;
}

double BatchStats::mean_loss() const {
  return masked_tokens > 0 ? loss_sum / static_cast<double>(masked_tokens) : 0.0;
}

BatchStats compute_gradients(const TransformerWeights& weights, const AdapterSet* adapters,
                             std::span<const EncodedInstance> batch, TrainMode mode,
                             Gradients& grads) {
  const auto& cfg = weights.config;
  const int n_heads = cfg.n_heads;
  const Eigen::Index d_head = cfg.d_model / n_heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d_head));
  const double adapter_scale = adapters ? adapters->scale() : 0.0;

  BatchStats stats;
  for (const auto& instance : batch) {
    ForwardCache cache;
    const Eigen::MatrixXd logits = forward(weights, adapters, instance.input_ids, &cache);
    const auto T = logits.rows();

    // Cross entropy over masked positions; dlogits = softmax - onehot there.
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(T, logits.cols());
    for (Eigen::Index t = 0; t < T; ++t) {
      if (!instance.loss_mask[static_cast<std::size_t>(t)]) continue;
      const int target = instance.target_ids[static_cast<std::size_t>(t)];
      const double m = logits.row(t).maxCoeff();
      const Eigen::ArrayXd e = (logits.row(t).array() - m).exp();
      const double z = e.sum();
      stats.loss_sum += m + std::log(z) - logits(t, target);
      ++stats.masked_tokens;
      dlogits.row(t) = (e / z).matrix().transpose();
      dlogits(t, target) -= 1.0;
    }

    TransformerWeights* gb = grads.base ? &*grads.base : nullptr;
    const auto apply_matrix_grad = [&](const std::string& target, Eigen::MatrixXd* base_slot,
                                       auto&& compute_dw) {
      const LoraAdapter* adapter = adapters ? adapters->find(target) : nullptr;
      LoraAdapter* agrad =
          (adapter && grads.adapters) ? grads.adapters->find(target) : nullptr;
      if (base_slot == nullptr && agrad == nullptr) return;
      const Eigen::MatrixXd dw = compute_dw();
      if (base_slot) *base_slot += dw;
      if (agrad) {
        agrad->a += adapter_scale * (dw * adapter->b.transpose());
        agrad->b += adapter_scale * (adapter->a.transpose() * dw);
      }
    };

    // LM head and final layer norm.
    if (gb) gb->lm_head.noalias() += cache.hidden_final.transpose() * dlogits;
    Eigen::MatrixXd dhidden = dlogits * weights.lm_head.transpose();
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(T, cfg.d_model);
    layer_norm_backward(dhidden, cache.normed_final, cache.rstd_final, weights.final_gain,
                        gb ? &gb->final_gain : nullptr, gb ? &gb->final_bias : nullptr, dx);

    for (int li = cfg.n_layers - 1; li >= 0; --li) {
      const auto& layer = weights.layers[static_cast<std::size_t>(li)];
      const auto& lc = cache.layers[static_cast<std::size_t>(li)];
      LayerWeights* gl = gb ? &gb->layers[static_cast<std::size_t>(li)] : nullptr;
      const std::string prefix = "layer" + std::to_string(li) + ".";

      // Feed-forward block: x_out = x_mid + gelu(n2 * w1) * w2.
      Eigen::MatrixXd dx_mid = dx;
      const Eigen::MatrixXd& df2 = dx;
      apply_matrix_grad(prefix + "w2", gl ? &gl->w2 : nullptr,
                        [&] { return lc.ff_act.transpose() * df2; });
      Eigen::MatrixXd da = df2 * lc.w2_eff.transpose();
      Eigen::MatrixXd df1 =
          da.cwiseProduct(lc.ff_pre.unaryExpr([](double v) { return gelu_derivative(v); }));
      apply_matrix_grad(prefix + "w1", gl ? &gl->w1 : nullptr, [&] {
        return gained(lc.normed2, layer.ln2_gain, layer.ln2_bias).transpose() * df1;
      });
      Eigen::MatrixXd dn2 = df1 * lc.w1_eff.transpose();
      layer_norm_backward(dn2, lc.normed2, lc.rstd2, layer.ln2_gain,
                          gl ? &gl->ln2_gain : nullptr, gl ? &gl->ln2_bias : nullptr, dx_mid);

      // Attention block: x_mid = x_in + heads * wo.
      Eigen::MatrixXd dx_in = dx_mid;
      const Eigen::MatrixXd& dattn = dx_mid;
      apply_matrix_grad(prefix + "wo", gl ? &gl->wo : nullptr,
                        [&] { return lc.heads.transpose() * dattn; });
      Eigen::MatrixXd dheads = dattn * lc.wo_eff.transpose();

      Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(T, cfg.d_model);
      Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(T, cfg.d_model);
      Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(T, cfg.d_model);
      for (int h = 0; h < n_heads; ++h) {
        const auto qh = lc.q.middleCols(h * d_head, d_head);
        const auto kh = lc.k.middleCols(h * d_head, d_head);
        const auto vh = lc.v.middleCols(h * d_head, d_head);
        const auto do_h = dheads.middleCols(h * d_head, d_head);
        const Eigen::MatrixXd& p = lc.attn[static_cast<std::size_t>(h)];

        const Eigen::MatrixXd dp = do_h * vh.transpose();
        dv.middleCols(h * d_head, d_head).noalias() += p.transpose() * do_h;

        Eigen::MatrixXd ds(T, T);
        for (Eigen::Index i = 0; i < T; ++i) {
          const double dot = dp.row(i).cwiseProduct(p.row(i)).sum();
          ds.row(i) = p.row(i).cwiseProduct((dp.row(i).array() - dot).matrix());
        }
        dq.middleCols(h * d_head, d_head).noalias() += ds * kh * inv_sqrt_dh;
        dk.middleCols(h * d_head, d_head).noalias() += ds.transpose() * qh * inv_sqrt_dh;
      }

      const Eigen::MatrixXd n1 = gained(lc.normed1, layer.ln1_gain, layer.ln1_bias);
      apply_matrix_grad(prefix + "wq", gl ? &gl->wq : nullptr,
                        [&] { return n1.transpose() * dq; });
      apply_matrix_grad(prefix + "wk", gl ? &gl->wk : nullptr,
                        [&] { return n1.transpose() * dk; });
      apply_matrix_grad(prefix + "wv", gl ? &gl->wv : nullptr,
                        [&] { return n1.transpose() * dv; });
      Eigen::MatrixXd dn1 = dq * lc.wq_eff.transpose();
      dn1.noalias() += dk * lc.wk_eff.transpose();
      dn1.noalias() += dv * lc.wv_eff.transpose();
      layer_norm_backward(dn1, lc.normed1, lc.rstd1, layer.ln1_gain,
                          gl ? &gl->ln1_gain : nullptr, gl ? &gl->ln1_bias : nullptr, dx_in);
      dx = std::move(dx_in);
    }

    if (gb) {
      for (Eigen::Index t = 0; t < T; ++t) {
        gb->token_embedding.row(cache.ids[static_cast<std::size_t>(t)]) += dx.row(t);
        gb->position_embedding.row(t) += dx.row(t);
      }
    }
  }

  if (stats.masked_tokens == 0) {
    throw Error(ErrorCode::EmptyMask, "batch contains no target tokens");
  }
  scale_gradients(grads, 1.0 / static_cast<double>(stats.masked_tokens));
  return stats;
}

void AdamState::step(std::span<TensorView> params, std::span<const TensorView> grads,
                     double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer parameter/gradient mismatch");
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(Eigen::ArrayXd::Zero(p.size()));
      v_.emplace_back(Eigen::ArrayXd::Zero(p.size()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = as_array(params[i]);
    const auto g = as_const_array(grads[i]);
    m_[i] = beta1 * m_[i] + (1.0 - beta1) * g;
    v_[i] = beta2 * v_[i] + (1.0 - beta2) * g.square();
    p -= lr * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + eps);
  }
}

void sgd_step(std::span<TensorView> params, std::span<const TensorView> grads, double lr) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer parameter/gradient mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    as_array(params[i]) -= lr * as_const_array(grads[i]);
  }
}

std::vector<TensorView> adapter_views(AdapterSet& adapters) {
  std::vector<TensorView> views;
  for (auto& adapter : adapters.adapters) {
    views.push_back({adapter.target + ".a", adapter.a.data(), adapter.a.rows(), adapter.a.cols()});
    views.push_back({adapter.target + ".b", adapter.b.data(), adapter.b.rows(), adapter.b.cols()});
  }
  return views;
}

Checkpoint initialize_model(const Dataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.instances.empty()) {
    throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  }
  std::vector<std::string> texts;
  texts.reserve(dataset.instances.size() * 2);
  for (const auto& instance : dataset.instances) {
    texts.push_back(instance.input_text);
    texts.push_back(instance.target_label);
  }

  Checkpoint ckpt;
  ckpt.tokenizer = Tokenizer::build(texts);
  ckpt.train_config = config;
  ckpt.train_config.model.vocab_size = ckpt.tokenizer.vocab_size();
  ckpt.train_config.lora.alpha = config.lora.resolved_alpha();
  ckpt.weights = init_weights(ckpt.train_config.model, derive_seed(config.seed, {"init"}));
  ckpt.dataset_fingerprint = dataset.fingerprint;
  ckpt.corpus_fingerprint = dataset.corpus_fingerprint;
  ckpt.fingerprint = config_fingerprint(train_config_to_json(ckpt.train_config) + "|" +
                                        dataset.fingerprint);
  return ckpt;
}

Checkpoint train(const Dataset& dataset, const TrainConfig& config,
                 const std::filesystem::path& log_path) {
  Checkpoint ckpt = initialize_model(dataset, config);
  const TrainConfig& cfg = ckpt.train_config;
  if (cfg.mode == TrainMode::Lora) {
    ckpt.adapters = inject(ckpt.weights, cfg.lora, derive_seed(cfg.seed, {"adapters"}));
  }

  std::vector<EncodedInstance> encoded;
  encoded.reserve(dataset.instances.size());
  for (const auto& instance : dataset.instances) {
    encoded.push_back(encode_instance(ckpt.tokenizer, instance, cfg.model.context_length));
  }

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, std::ios::binary | std::ios::trunc);
    if (!log) throw Error(ErrorCode::IoError, "cannot write log '" + log_path.string() + "'");
    log << "# fingerprint=" << ckpt.fingerprint << '\n';
  }

  AdamState adam;
  AdapterSet* adapters = ckpt.adapters ? &*ckpt.adapters : nullptr;
  auto params = cfg.mode == TrainMode::Lora ? adapter_views(*adapters)
                                            : tensor_views(ckpt.weights);

  std::vector<std::size_t> order(encoded.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {"epoch", std::to_string(epoch)}));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    long long epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<EncodedInstance> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(encoded[order[i]]);

      Gradients grads = zero_gradients(ckpt.weights, adapters, cfg.mode);
      const BatchStats stats =
          compute_gradients(ckpt.weights, adapters, batch, cfg.mode, grads);
      if (!std::isfinite(stats.loss_sum)) {
        throw Error(ErrorCode::NonFiniteLoss,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                        std::to_string(start / static_cast<std::size_t>(cfg.batch_size)));
      }
      auto grad_views = cfg.mode == TrainMode::Lora ? adapter_views(*grads.adapters)
                                                    : tensor_views(*grads.base);
      if (cfg.optimizer == OptimizerKind::Adam) {
        adam.step(params, grad_views, cfg.learning_rate);
      } else {
        sgd_step(params, grad_views, cfg.learning_rate);
      }
      epoch_loss += stats.loss_sum;
      epoch_tokens += stats.masked_tokens;
    }

    const double mean = epoch_loss / static_cast<double>(epoch_tokens);
    ckpt.loss_history.push_back(mean);
    ckpt.epochs_run = epoch;
    if (log) {
      char line[96];
      std::snprintf(line, sizeof(line), "epoch=%d\tmean_loss=%.12g\n", epoch, mean);
      log << line;
      log.flush();
    }
    if (mean < cfg.early_stop_loss) break;
  }
  return ckpt;
}

}  // namespace ctalab
