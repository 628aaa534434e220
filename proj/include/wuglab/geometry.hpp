#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wuglab/category.hpp"
#include "wuglab/lexicon.hpp"
#include "wuglab/model.hpp"
#include "wuglab/protocol.hpp"
#include "wuglab/tensor.hpp"

namespace wuglab {

struct Point2 {
    double x;
    double y;
    bool operator==(const Point2&) const = default;
};

// Mean plus the top-2 principal directions of a set of embeddings; the
// analysis plane for both movement tracking and region sampling.
struct PcaBasis {
    Tensor mean;  // d
    Tensor pc1;   // d, unit norm
    Tensor pc2;   // d, unit norm, orthogonal to pc1
    double explained_variance[2];
    std::string fit_set_description;
};

// Mean-centered SVD; components are the top-2 right singular directions,
// explained variances the squared singular values over (n-1). Sign
// convention: each component's largest-magnitude coordinate is positive.
// Throws std::invalid_argument when the input is degenerate (all vectors
// identical) or too small.
PcaBasis fit_pca(const std::vector<Tensor>& vectors);

Point2 project(const PcaBasis& basis, const Tensor& v);
// mean + x*pc1 + y*pc2; residual directions stay at the fit-set mean.
Tensor inverse_project(const PcaBasis& basis, Point2 p);

struct MovementRecord {
    NovelToken token;
    double initial_distance;
    double final_distance;
    // (initial - final) / initial; absent when initial_distance == 0.
    std::optional<double> relative_movement;
};

// Projects the first and last snapshots and measures the 2D approach toward
// the centroid of the token's own category exemplars.
MovementRecord movement_analysis(const Trajectory& trajectory, const PcaBasis& basis,
                                 const std::map<LexicalCategory, std::vector<Point2>>&
                                     exemplar_points);

// Maximum-likelihood 2D normal over exemplar projections (1/n covariance).
struct Region2 {
    LexicalCategory category;
    Point2 mean2;
    double cov_xx;
    double cov_xy;
    double cov_yy;
};

Region2 fit_region(LexicalCategory category, const std::vector<Point2>& points);
// i.i.d. draws via the Cholesky factor; a zero covariance degenerates to the
// mean point. Deterministic per seed.
std::vector<Point2> sample_region(const Region2& region, std::size_t n,
                                  std::uint64_t seed);

struct ExemplarConfig {
    // 0 means the full lexicon category (desk-scale default; the reference
    // setup samples 500 per category from a pretrained vocabulary).
    std::size_t n_per_category = 0;
};

// Input-embedding rows of a category's exemplar words.
std::vector<Tensor> category_exemplar_rows(const Parameters& params, const Vocab& vocab,
                                           LexicalCategory category,
                                           const ExemplarConfig& config = {});

// Basis over the two categories' exemplars (or all four when global).
PcaBasis fit_exemplar_basis(const Parameters& params, const Vocab& vocab,
                            CategoryPair pair, const ExemplarConfig& config = {},
                            bool global_basis = false);

std::map<LexicalCategory, std::vector<Point2>> project_exemplars(
    const Parameters& params, const Vocab& vocab, CategoryPair pair,
    const PcaBasis& basis, const ExemplarConfig& config = {});

struct ProjectionConfig {
    std::size_t n_novel_per_category = 20;
    std::uint64_t seed = 1;
};

struct ProjectionRunRecord {
    CategoryPair pair;
    std::uint64_t seed;
    PairResult result;                        // mean over pairings, ci over pairings
    std::vector<double> pairing_accuracies;   // one per sampled token pair
    std::vector<Point2> samples_first;
    std::vector<Point2> samples_second;
};

// Observability hook for the no-training invariant: state of the working
// parameter copy after the last pairing. The fingerprint covers every
// parameter except the two novel rows and their output-bias entries.
struct ProjectionAudit {
    int token_id_first = -1;
    int token_id_second = -1;
    Tensor final_row_first;   // installed embedding rows, bitwise
    Tensor final_row_second;
    std::uint64_t fingerprint_excluding_novel = 0;
};

// Samples 2D points from each category's region, lifts them into embedding
// space, installs them as novel-token rows (bias 0), and evaluates each
// pairing on the test set. No gradient step occurs anywhere.
ProjectionRunRecord run_projection_experiment(const Parameters& base,
                                              const Vocab& base_vocab,
                                              const PcaBasis& basis,
                                              const Region2& region_first,
                                              const Region2& region_second,
                                              CategoryPair pair, const TestSet& test,
                                              const ProjectionConfig& config,
                                              ProjectionAudit* audit = nullptr);

}  // namespace wuglab
