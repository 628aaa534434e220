#include "wuglab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "wuglab/error.hpp"

namespace wuglab {

namespace {

using nlohmann::json;

// Field table shared by the reader and the writer so the key set cannot
// drift.
template <typename Visitor>
void visit_fields(RunConfig& config, Visitor&& visit) {
    visit("lexicon_words_per_category", config.lexicon_words_per_category);
    visit("lexicon_seed", config.lexicon_seed);
    visit("corpus_sentences", config.corpus_sentences);
    visit("corpus_seed", config.corpus_seed);
    visit("heldout_stimuli", config.heldout_stimuli);
    visit("heldout_seed", config.heldout_seed);
    visit("d_model", config.d_model);
    visit("n_layers", config.n_layers);
    visit("n_heads", config.n_heads);
    visit("ffn_multiplier", config.ffn_multiplier);
    visit("max_seq_len", config.max_seq_len);
    visit("novel_slots", config.novel_slots);
    visit("init_std", config.init_std);
    visit("model_seed", config.model_seed);
    visit("train_learning_rate", config.train_learning_rate);
    visit("train_epochs", config.train_epochs);
    visit("train_batch_size", config.train_batch_size);
    visit("train_mask_prob", config.train_mask_prob);
    visit("train_seed", config.train_seed);
    visit("threads", config.threads);
    visit("protocol_learning_rate", config.protocol_learning_rate);
    visit("protocol_steps", config.protocol_steps);
    visit("snapshot_interval", config.snapshot_interval);
    visit("joint_exposure", config.joint_exposure);
    visit("test_n_per_category", config.test_n_per_category);
    visit("exemplars_per_category", config.exemplars_per_category);
    visit("global_pca_basis", config.global_pca_basis);
    visit("projection_samples_per_category", config.projection_samples_per_category);
    visit("seeds", config.seeds);
}

}  // namespace

void RunConfig::validate() const {
    if (lexicon_words_per_category < 10) {
        throw std::invalid_argument("config: lexicon_words_per_category must be >= 10");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("config: seeds must be nonempty");
    }
    if (test_n_per_category == 0 || projection_samples_per_category == 0 ||
        train_batch_size == 0 || snapshot_interval == 0) {
        throw std::invalid_argument("config: counts must be positive");
    }
    if (!(train_mask_prob > 0.0 && train_mask_prob <= 1.0)) {
        throw std::invalid_argument("config: train_mask_prob must be in (0, 1]");
    }
    model_config(lexicon_words_per_category * kNumCategories + 4 + novel_slots).validate();
}

ModelConfig RunConfig::model_config(std::size_t vocab_size) const {
    ModelConfig mc;
    mc.vocab_size = vocab_size;
    mc.d_model = d_model;
    mc.n_layers = n_layers;
    mc.n_heads = n_heads;
    mc.ffn_multiplier = ffn_multiplier;
    mc.max_seq_len = max_seq_len;
    mc.novel_slots = novel_slots;
    mc.init_std = init_std;
    return mc;
}

TrainHyper RunConfig::train_hyper() const {
    TrainHyper hyper;
    hyper.kind = OptimizerKind::Adam;
    hyper.learning_rate = train_learning_rate;
    hyper.epochs = train_epochs;
    hyper.batch_size = train_batch_size;
    hyper.mask_prob = train_mask_prob;
    hyper.threads = effective_threads();
    return hyper;
}

KsConfig RunConfig::ks_config() const {
    KsConfig kc;
    kc.test_n_per_category = test_n_per_category;
    kc.hyper.learning_rate = protocol_learning_rate;
    kc.hyper.steps = protocol_steps;
    kc.hyper.snapshot_interval = snapshot_interval;
    kc.hyper.joint_exposure = joint_exposure;
    return kc;
}

ExemplarConfig RunConfig::exemplar_config() const {
    return ExemplarConfig{exemplars_per_category};
}

std::size_t RunConfig::effective_threads() const {
    if (threads != 0) {
        return threads;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min(4u, hw);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw Error("config must be a JSON object");
    }
    RunConfig config;
    std::vector<std::string> known;
    try {
        visit_fields(config, [&](const char* key, auto& field) {
            known.push_back(key);
            if (j.contains(key)) {
                j.at(key).get_to(field);
            }
        });
    } catch (const json::exception& e) {
        throw Error(std::string("config field has wrong type: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error("config has unknown key: " + key);
        }
    }
    config.validate();
    return config;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
    json j = json::object();
    visit_fields(const_cast<RunConfig&>(*this),
                 [&](const char* key, auto& field) { j[key] = field; });
    return j.dump(2) + "\n";
}

}  // namespace wuglab
