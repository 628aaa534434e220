#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wuglab/category.hpp"
#include "wuglab/corpus.hpp"
#include "wuglab/model.hpp"

namespace wuglab {

inline constexpr double kChanceAccuracy = 0.5;  // two-way decision

// A vocabulary item absent from base training whose embedding row is the
// object of study.
struct NovelToken {
    std::string name;
    int token_id;
    LexicalCategory category;
};

struct TrajectorySnapshot {
    std::size_t step;
    Tensor embedding;  // copy of the token's embedding row
};

// Ordered snapshots of one novel token's embedding row over embedding-only
// training. Snapshot 0 is the initial random row; the last is post-training.
struct Trajectory {
    NovelToken token;
    std::vector<TrajectorySnapshot> snapshots;
};

struct PairResult {
    CategoryPair pair;
    double accuracy;
    double ci95;       // half-width, 1.96 * sd / sqrt(n)
    std::size_t n_items;
};

// Claims reserved vocabulary slots and fills each new embedding row with
// i.i.d. normal(0, init_std) values; the matching output-bias entry is set
// to 0. Every pre-existing parameter stays bit-identical.
std::vector<NovelToken> add_novel_tokens(Parameters& params, Vocab& vocab,
                                         const std::vector<std::string>& names,
                                         const std::vector<LexicalCategory>& categories,
                                         std::uint64_t seed);

struct ProtocolHyper {
    // Calibrated so the embedding's 2D shadow lands near its category
    // centroid instead of shooting past it; larger rates keep accuracy at
    // 1.0 but overshoot the exemplar cloud within a few steps.
    double learning_rate = 2e-4;
    std::size_t steps = 200;
    std::size_t snapshot_interval = 10;
    bool joint_exposure = true;  // false: alternate single-stimulus steps
};

// Gradient descent restricted to the two novel embedding rows (joint mode
// optimizes the summed loss of both stimuli). Records snapshots at step 0,
// every snapshot_interval steps, and the final step. All other parameters
// are left bit-identical.
std::vector<Trajectory> learn_novel_embeddings(Parameters& params,
                                               const std::pair<Stimulus, Stimulus>& stimuli,
                                               const std::vector<NovelToken>& tokens,
                                               const ProtocolHyper& hyper);

// Per test stimulus of category c: 1 if the category-c token's logit at the
// mask beats the other token's, 0.5 on an exact tie, else 0.
PairResult evaluate_pair(const Parameters& params, const TestSet& test,
                         const NovelToken& token_a, const NovelToken& token_b);

struct KsConfig {
    std::size_t test_n_per_category = 100;
    ProtocolHyper hyper;
};

struct KsRunRecord {
    CategoryPair pair;
    std::uint64_t seed;
    std::pair<Stimulus, Stimulus> train_stimuli;
    TestSet test;
    std::vector<NovelToken> tokens;
    std::vector<Trajectory> trajectories;
    PairResult result;
};

// Full single-pair replication: register novel tokens, build the exposure
// pair, train embeddings only, build the lexically disjoint test set, and
// evaluate. Owns private copies of the base parameters and vocabulary.
KsRunRecord run_ks_experiment(const Parameters& base, const Vocab& base_vocab,
                              CategoryPair pair, const KsConfig& config,
                              std::uint64_t seed);

// FNV-1a over every tensor's bytes; used to assert freeze invariants.
// `skip` names rows (rank-2 tensors) or entries (rank-1) to leave out, e.g.
// the novel-token embedding rows and their output-bias entries.
using SkipEntries = std::map<std::string, std::vector<std::size_t>>;
std::uint64_t parameters_fingerprint(const Parameters& params,
                                     const SkipEntries& skip = {});

// Skip set covering a novel token's own storage: its embedding row and its
// output-bias entry.
SkipEntries novel_token_skip(const std::vector<NovelToken>& tokens);

// Mean and 1.96*sd/sqrt(n) half-width of per-item scores.
std::pair<double, double> mean_and_ci95(const std::vector<double>& values);

}  // namespace wuglab
