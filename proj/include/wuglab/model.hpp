#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wuglab/corpus.hpp"
#include "wuglab/optimizer.hpp"
#include "wuglab/tensor.hpp"

namespace wuglab {

struct ModelConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 4;
    std::size_t ffn_multiplier = 4;
    std::size_t max_seq_len = 16;
    std::size_t novel_slots = 16;  // reserved tail of the vocabulary
    int mask_token_id = 1;
    int pad_token_id = 0;
    double init_std = 0.02;
    double ln_epsilon = 1e-12;

    std::size_t head_dim() const { return d_model / n_heads; }
    std::size_t ffn_dim() const { return d_model * ffn_multiplier; }
    void validate() const;  // throws std::invalid_argument

    bool operator==(const ModelConfig&) const = default;
};

// All model weights, addressable by name. The embedding matrix doubles as
// the output projection (tied head), so its rows are both the reading and
// the predicting representation of each token.
struct Parameters {
    ModelConfig config;
    NamedTensors tensors;

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    const Tensor& embedding() const { return at("embedding"); }
    Tensor& embedding() { return at("embedding"); }
};

std::string layer_param_name(std::size_t layer, const std::string& suffix);

// Weights ~ normal(0, init_std); biases and LN offsets zero, LN gains one;
// output bias zero. Deterministic per seed.
Parameters init_model(const ModelConfig& config, std::uint64_t seed);

// Logits over the vocabulary for the masked position, after the full
// encoder stack: hidden(mask) . embedding^T + output_bias.
Tensor mlm_logits(const Parameters& params, std::span<const int> tokens,
                  std::size_t mask_position);

// Final encoder hidden states (T x d). Pure function of (params, tokens).
Tensor encoder_hidden_states(const Parameters& params, std::span<const int> tokens);

struct LossGrads {
    double loss;
    Gradients grads;
};

// Mean masked cross-entropy over the batch, with exact gradients for every
// parameter.
LossGrads loss_and_grads(const Parameters& params, const std::vector<Stimulus>& batch);
// Summed (unnormalized) variant; used for joint exposure training.
LossGrads summed_loss_and_grads(const Parameters& params,
                                const std::vector<Stimulus>& batch);

struct TrainHyper {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    std::size_t epochs = 5;
    std::size_t batch_size = 32;
    double mask_prob = 0.15;  // applied to content-word positions only
    std::size_t threads = 1;
};

struct TrainReport {
    std::vector<double> epoch_mean_loss;
    double heldout_accuracy = 0.0;
    double wall_seconds = 0.0;
};

// Standard MLM training over the base corpus: per epoch, each content-word
// position is masked with probability mask_prob (seeded); sentences with at
// least one mask form batches. Throws DivergenceError on non-finite loss.
TrainReport train_base(Parameters& params, const std::vector<std::vector<int>>& corpus,
                       const TrainHyper& hyper, std::uint64_t seed, const Vocab& vocab,
                       const std::vector<Stimulus>& heldout);

// Fraction of stimuli whose argmax logit at the mask (ties broken by lowest
// token id) falls inside the stimulus category's word list.
double masked_accuracy(const Parameters& params, const std::vector<Stimulus>& heldout,
                       const Vocab& vocab);

}  // namespace wuglab
