#include "wuglab/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "wuglab/error.hpp"
#include "wuglab/rng.hpp"

namespace wuglab {

std::pair<double, double> mean_and_ci95(const std::vector<double>& values) {
    if (values.empty()) {
        throw std::invalid_argument("mean_and_ci95: empty sample");
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= double(values.size());
    if (values.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : values) {
        const double c = v - mean;
        ss += c * c;
    }
    const double sd = std::sqrt(ss / double(values.size() - 1));
    return {mean, 1.96 * sd / std::sqrt(double(values.size()))};
}

std::vector<NovelToken> add_novel_tokens(Parameters& params, Vocab& vocab,
                                         const std::vector<std::string>& names,
                                         const std::vector<LexicalCategory>& categories,
                                         std::uint64_t seed) {
    if (names.size() != categories.size()) {
        throw std::invalid_argument("add_novel_tokens: names/categories size mismatch");
    }
    if (vocab.novel_used() + names.size() > vocab.novel_slots()) {
        throw Error("add_novel_tokens: novel-token capacity exhausted");
    }
    Tensor& embedding = params.embedding();
    Tensor& output_bias = params.at("output_bias");
    const std::size_t d = params.config.d_model;

    Rng rng(mix_seed(seed, 0x6e6f76656cULL));  // "novel"
    std::vector<NovelToken> tokens;
    tokens.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        const int id = vocab.register_novel(names[i]);
        double* row = embedding.row(static_cast<std::size_t>(id));
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = rng.normal(0.0, params.config.init_std);
        }
        output_bias[static_cast<std::size_t>(id)] = 0.0;
        tokens.push_back(NovelToken{names[i], id, categories[i]});
    }
    return tokens;
}

std::vector<Trajectory> learn_novel_embeddings(Parameters& params,
                                               const std::pair<Stimulus, Stimulus>& stimuli,
                                               const std::vector<NovelToken>& tokens,
                                               const ProtocolHyper& hyper) {
    if (tokens.size() != 2) {
        throw std::invalid_argument("learn_novel_embeddings: expected exactly two tokens");
    }
    if (stimuli.first.target != tokens[0].token_id ||
        stimuli.second.target != tokens[1].token_id) {
        throw std::invalid_argument(
            "learn_novel_embeddings: stimuli targets must be the novel tokens");
    }
    const std::size_t d = params.config.d_model;
    const std::size_t v = params.config.vocab_size;
    const std::vector<std::size_t> novel_rows = {
        static_cast<std::size_t>(tokens[0].token_id),
        static_cast<std::size_t>(tokens[1].token_id)};

    std::vector<Trajectory> trajectories;
    for (const NovelToken& token : tokens) {
        trajectories.push_back(Trajectory{token, {}});
    }
    const auto snapshot = [&](std::size_t step) {
        const Tensor& embedding = params.embedding();
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            Tensor row({d});
            std::memcpy(row.data(), embedding.row(novel_rows[i]), d * sizeof(double));
            trajectories[i].snapshots.push_back(TrajectorySnapshot{step, std::move(row)});
        }
    };
    snapshot(0);

    OptimizerState opt = OptimizerState::sgd(hyper.learning_rate);
    const auto embedding_only = [](const std::string& name) { return name == "embedding"; };
    const std::vector<Stimulus> both = {stimuli.first, stimuli.second};

    for (std::size_t step = 1; step <= hyper.steps; ++step) {
        LossGrads lg;
        if (hyper.joint_exposure) {
            lg = summed_loss_and_grads(params, both);
        } else {
            lg = summed_loss_and_grads(params, {both[(step - 1) % 2]});
        }
        if (!std::isfinite(lg.loss)) {
            throw DivergenceError("learn_novel_embeddings: non-finite loss at step " +
                                  std::to_string(step));
        }
        // Keep only the novel rows of the embedding gradient; the name
        // filter alone would move the whole matrix.
        Gradients filtered;
        const Tensor* d_embedding = lg.grads.find("embedding");
        if (d_embedding != nullptr) {
            Tensor& masked = filtered.accumulate("embedding", {v, d});
            for (std::size_t row : novel_rows) {
                std::memcpy(masked.row(row), d_embedding->row(row), d * sizeof(double));
            }
        }
        optimizer_step(params.tensors, filtered, opt, embedding_only);
        if (step % hyper.snapshot_interval == 0 || step == hyper.steps) {
            snapshot(step);
        }
    }
    return trajectories;
}

PairResult evaluate_pair(const Parameters& params, const TestSet& test,
                         const NovelToken& token_a, const NovelToken& token_b) {
    if (token_a.category != test.pair.first || token_b.category != test.pair.second) {
        throw std::invalid_argument(
            "evaluate_pair: token categories must match the test pair");
    }
    std::vector<double> scores;
    scores.reserve(test.items.size());
    for (const Stimulus& item : test.items) {
        const Tensor logits = mlm_logits(params, item.tokens, item.mask_position);
        const double logit_a = logits[static_cast<std::size_t>(token_a.token_id)];
        const double logit_b = logits[static_cast<std::size_t>(token_b.token_id)];
        const double correct = item.category == token_a.category ? logit_a : logit_b;
        const double other = item.category == token_a.category ? logit_b : logit_a;
        if (correct > other) {
            scores.push_back(1.0);
        } else if (correct == other) {
            scores.push_back(0.5);
        } else {
            scores.push_back(0.0);
        }
    }
    const auto [mean, ci95] = mean_and_ci95(scores);
    return PairResult{test.pair, mean, ci95, scores.size()};
}

KsRunRecord run_ks_experiment(const Parameters& base, const Vocab& base_vocab,
                              CategoryPair pair, const KsConfig& config,
                              std::uint64_t seed) {
    Parameters params = base;
    Vocab vocab = base_vocab;

    const auto& names = reserved_novel_names();
    std::vector<NovelToken> tokens =
        add_novel_tokens(params, vocab, {names[0], names[1]}, {pair.first, pair.second},
                         seed);

    auto train_stimuli = make_training_stimuli(pair, vocab, tokens[0].token_id,
                                               tokens[1].token_id, seed);
    std::vector<Trajectory> trajectories =
        learn_novel_embeddings(params, train_stimuli, tokens, config.hyper);
    TestSet test = make_test_set(pair, vocab, config.test_n_per_category, train_stimuli,
                                 tokens[0].token_id, tokens[1].token_id, seed);
    PairResult result = evaluate_pair(params, test, tokens[0], tokens[1]);

    return KsRunRecord{pair,
                       seed,
                       std::move(train_stimuli),
                       std::move(test),
                       std::move(tokens),
                       std::move(trajectories),
                       result};
}

std::uint64_t parameters_fingerprint(const Parameters& params, const SkipEntries& skip) {
    std::uint64_t hash = 14695981039346656037ULL;
    const auto feed = [&hash](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            hash ^= bytes[i];
            hash *= 1099511628211ULL;
        }
    };
    for (const auto& [name, tensor] : params.tensors) {
        feed(name.data(), name.size());
        const auto it = skip.find(name);
        if (it == skip.end()) {
            feed(tensor.data(), tensor.size() * sizeof(double));
            continue;
        }
        const auto& rows = it->second;
        const auto skipped = [&](std::size_t r) {
            return std::find(rows.begin(), rows.end(), r) != rows.end();
        };
        if (tensor.rank() == 2) {
            for (std::size_t r = 0; r < tensor.rows(); ++r) {
                if (!skipped(r)) {
                    feed(tensor.row(r), tensor.cols() * sizeof(double));
                }
            }
        } else {
            for (std::size_t i = 0; i < tensor.size(); ++i) {
                if (!skipped(i)) {
                    feed(tensor.data() + i, sizeof(double));
                }
            }
        }
    }
    return hash;
}

SkipEntries novel_token_skip(const std::vector<NovelToken>& tokens) {
    SkipEntries skip;
    for (const NovelToken& token : tokens) {
        skip["embedding"].push_back(static_cast<std::size_t>(token.token_id));
        skip["output_bias"].push_back(static_cast<std::size_t>(token.token_id));
    }
    return skip;
}

}  // namespace wuglab
