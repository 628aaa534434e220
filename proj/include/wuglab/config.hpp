#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wuglab/geometry.hpp"
#include "wuglab/model.hpp"
#include "wuglab/protocol.hpp"

namespace wuglab {

// Flat key set for the whole pipeline; every field maps to one JSON key of
// the same name. Unknown keys are rejected.
struct RunConfig {
    // lexicon / corpus
    std::size_t lexicon_words_per_category = 60;
    std::uint64_t lexicon_seed = 11;
    std::size_t corpus_sentences = 20000;
    std::uint64_t corpus_seed = 12;
    std::size_t heldout_stimuli = 1000;
    std::uint64_t heldout_seed = 13;

    // model
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 4;
    std::size_t ffn_multiplier = 4;
    std::size_t max_seq_len = 16;
    std::size_t novel_slots = 16;
    double init_std = 0.02;
    std::uint64_t model_seed = 14;

    // base training
    double train_learning_rate = 1e-3;
    std::size_t train_epochs = 5;
    std::size_t train_batch_size = 32;
    double train_mask_prob = 0.15;
    std::uint64_t train_seed = 15;
    std::size_t threads = 0;  // 0 = auto (min(4, hardware))

    // embedding-only protocol
    double protocol_learning_rate = 2e-4;
    std::size_t protocol_steps = 200;
    std::size_t snapshot_interval = 10;
    bool joint_exposure = true;
    std::size_t test_n_per_category = 100;

    // geometry
    std::size_t exemplars_per_category = 0;  // 0 = all lexicon words
    bool global_pca_basis = false;
    std::size_t projection_samples_per_category = 20;

    // runs
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    void validate() const;  // throws std::invalid_argument

    ModelConfig model_config(std::size_t vocab_size) const;
    TrainHyper train_hyper() const;
    KsConfig ks_config() const;
    ExemplarConfig exemplar_config() const;
    std::size_t effective_threads() const;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_json_file(const std::string& path);
    std::string to_json_text() const;
};

}  // namespace wuglab
