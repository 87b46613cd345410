#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ctalab {

struct AdapterSet;

struct ModelConfig {
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 2;
  int d_ff = 256;
  int context_length = 256;
  int vocab_size = 0;  // filled from the tokenizer

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct LayerWeights {
  Eigen::MatrixXd wq, wk, wv, wo;        // d_model x d_model
  Eigen::MatrixXd w1, w2;                // d_model x d_ff, d_ff x d_model
  Eigen::VectorXd ln1_gain, ln1_bias;    // d_model
  Eigen::VectorXd ln2_gain, ln2_bias;    // d_model
};

// Pre-norm decoder-only transformer: learned positional embeddings, GELU
// feed-forward, final layer norm, untied LM head. All math is double
// precision and single-threaded, so fixed weights and input give
// bit-stable logits.
struct TransformerWeights {
  ModelConfig config;
  Eigen::MatrixXd token_embedding;     // vocab x d_model
  Eigen::MatrixXd position_embedding;  // context x d_model
  std::vector<LayerWeights> layers;
  Eigen::VectorXd final_gain, final_bias;
  Eigen::MatrixXd lm_head;             // d_model x vocab
};

// Named view over every parameter tensor, in a fixed traversal order.
struct TensorView {
  std::string name;
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index size() const { return rows * cols; }
};

std::vector<TensorView> tensor_views(TransformerWeights& weights);

TransformerWeights init_weights(const ModelConfig& config, std::uint64_t seed);

// Forward intermediates kept for backpropagation.
struct LayerCache {
  Eigen::MatrixXd x_in;              // block input
  Eigen::MatrixXd normed1;           // LN1 x-hat (pre-gain)
  Eigen::VectorXd rstd1;
  Eigen::MatrixXd q, k, v;
  std::vector<Eigen::MatrixXd> attn; // per-head row-softmax probabilities
  Eigen::MatrixXd heads;             // concatenated head outputs
  Eigen::MatrixXd x_mid;             // after attention residual
  Eigen::MatrixXd normed2;
  Eigen::VectorXd rstd2;
  Eigen::MatrixXd ff_pre, ff_act;    // pre-GELU / post-GELU
  Eigen::MatrixXd wq_eff, wk_eff, wv_eff, wo_eff, w1_eff, w2_eff;
};

struct ForwardCache {
  std::vector<int> ids;
  Eigen::MatrixXd x0;
  std::vector<LayerCache> layers;
  Eigen::MatrixXd normed_final;
  Eigen::VectorXd rstd_final;
  Eigen::MatrixXd hidden_final;      // after final gain/bias
};

// Causal forward pass; position t attends to positions <= t. With
// adapters attached every adapted matrix contributes W + (alpha/r) * A*B.
Eigen::MatrixXd forward(const TransformerWeights& weights, const AdapterSet* adapters,
                        std::span<const int> ids, ForwardCache* cache = nullptr);

// Greedy decoding: argmax with ties to the lowest id, stopping at <eos>,
// max_new_tokens, or the context boundary. Returns only the continuation,
// without the terminating <eos>.
std::vector<int> generate_greedy(const TransformerWeights& weights,
                                 const AdapterSet* adapters,
                                 std::span<const int> prompt_ids, int max_new_tokens);

// Row-wise softmax (used by the loss and by tests).
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

double gelu(double x);
double gelu_derivative(double x);

}  // namespace ctalab
