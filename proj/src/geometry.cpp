#include "wuglab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "wuglab/rng.hpp"

namespace wuglab {

namespace {

// One-sided Jacobi SVD: orthogonalizes the columns of A (n x d) by plane
// rotations, accumulating them into V. On return the p-th column norm of A
// is the p-th singular value and V's p-th column the matching right
// singular vector (unsorted).
void one_sided_jacobi(Tensor& a, Tensor& v) {
    const std::size_t n = a.rows();
    const std::size_t d = a.cols();
    v = Tensor({d, d});
    for (std::size_t i = 0; i < d; ++i) {
        v.at(i, i) = 1.0;
    }
    constexpr double kTol = 1e-14;
    constexpr std::size_t kMaxSweeps = 64;
    for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool converged = true;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double ap = a.at(i, p);
                    const double aq = a.at(i, q);
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if (gamma == 0.0 || gamma * gamma <= kTol * kTol * alpha * beta) {
                    continue;
                }
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double ap = a.at(i, p);
                    const double aq = a.at(i, q);
                    a.at(i, p) = c * ap - s * aq;
                    a.at(i, q) = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vp = v.at(i, p);
                    const double vq = v.at(i, q);
                    v.at(i, p) = c * vp - s * vq;
                    v.at(i, q) = s * vp + c * vq;
                }
            }
        }
        if (converged) {
            break;
        }
    }
}

void apply_sign_convention(Tensor& component) {
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < component.size(); ++i) {
        if (std::abs(component[i]) > std::abs(component[argmax])) {
            argmax = i;
        }
    }
    if (component[argmax] < 0.0) {
        for (std::size_t i = 0; i < component.size(); ++i) {
            component[i] = -component[i];
        }
    }
}

}  // namespace

PcaBasis fit_pca(const std::vector<Tensor>& vectors) {
    if (vectors.size() < 3) {
        throw std::invalid_argument("fit_pca: need at least 3 vectors");
    }
    const std::size_t d = vectors.front().size();
    if (d < 2) {
        throw std::invalid_argument("fit_pca: need dimension >= 2");
    }
    for (const Tensor& v : vectors) {
        if (v.size() != d) {
            throw std::invalid_argument("fit_pca: inconsistent vector dimensions");
        }
    }
    const std::size_t n = vectors.size();

    PcaBasis basis;
    basis.mean = Tensor({d});
    for (const Tensor& v : vectors) {
        for (std::size_t i = 0; i < d; ++i) {
            basis.mean[i] += v[i];
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        basis.mean[i] /= double(n);
    }

    Tensor centered({n, d});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            centered.at(r, i) = vectors[r][i] - basis.mean[i];
        }
    }

    Tensor v_mat;
    one_sided_jacobi(centered, v_mat);

    std::vector<std::pair<double, std::size_t>> order(d);
    for (std::size_t j = 0; j < d; ++j) {
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            norm_sq += centered.at(i, j) * centered.at(i, j);
        }
        order[j] = {norm_sq, j};
    }
    std::sort(order.begin(), order.end(), [](const auto& lhs, const auto& rhs) {
        return lhs.first > rhs.first || (lhs.first == rhs.first && lhs.second < rhs.second);
    });

    double mean_scale = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        mean_scale += basis.mean[i] * basis.mean[i];
    }
    if (order[0].first <= 1e-20 * std::max(1.0, mean_scale)) {
        throw std::invalid_argument("fit_pca: degenerate input (no variance)");
    }

    basis.pc1 = Tensor({d});
    basis.pc2 = Tensor({d});
    for (std::size_t i = 0; i < d; ++i) {
        basis.pc1[i] = v_mat.at(i, order[0].second);
        basis.pc2[i] = v_mat.at(i, order[1].second);
    }
    basis.explained_variance[0] = order[0].first / double(n - 1);
    basis.explained_variance[1] = order[1].first / double(n - 1);
    apply_sign_convention(basis.pc1);
    apply_sign_convention(basis.pc2);
    return basis;
}

Point2 project(const PcaBasis& basis, const Tensor& v) {
    const std::size_t d = basis.mean.size();
    if (v.size() != d) {
        throw std::invalid_argument("project: dimension mismatch");
    }
    double x = 0.0, y = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double c = v[i] - basis.mean[i];
        x += c * basis.pc1[i];
        y += c * basis.pc2[i];
    }
    return Point2{x, y};
}

Tensor inverse_project(const PcaBasis& basis, Point2 p) {
    const std::size_t d = basis.mean.size();
    Tensor v({d});
    for (std::size_t i = 0; i < d; ++i) {
        v[i] = basis.mean[i] + p.x * basis.pc1[i] + p.y * basis.pc2[i];
    }
    return v;
}

namespace {

Point2 centroid(const std::vector<Point2>& points) {
    if (points.empty()) {
        throw std::invalid_argument("centroid: empty point set");
    }
    Point2 c{0.0, 0.0};
    for (const Point2& p : points) {
        c.x += p.x;
        c.y += p.y;
    }
    c.x /= double(points.size());
    c.y /= double(points.size());
    return c;
}

double distance2(Point2 a, Point2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

MovementRecord movement_analysis(const Trajectory& trajectory, const PcaBasis& basis,
                                 const std::map<LexicalCategory, std::vector<Point2>>&
                                     exemplar_points) {
    if (trajectory.snapshots.empty()) {
        throw std::invalid_argument("movement_analysis: empty trajectory");
    }
    const auto it = exemplar_points.find(trajectory.token.category);
    if (it == exemplar_points.end()) {
        throw std::invalid_argument("movement_analysis: no exemplar points for category");
    }
    const Point2 target = centroid(it->second);
    const Point2 first = project(basis, trajectory.snapshots.front().embedding);
    const Point2 last = project(basis, trajectory.snapshots.back().embedding);

    MovementRecord record{trajectory.token, distance2(first, target),
                          distance2(last, target), std::nullopt};
    if (record.initial_distance > 0.0) {
        record.relative_movement =
            (record.initial_distance - record.final_distance) / record.initial_distance;
    }
    return record;
}

Region2 fit_region(LexicalCategory category, const std::vector<Point2>& points) {
    if (points.size() < 3) {
        throw std::invalid_argument("fit_region: need at least 3 points");
    }
    const Point2 mean = centroid(points);
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (const Point2& p : points) {
        const double dx = p.x - mean.x;
        const double dy = p.y - mean.y;
        cxx += dx * dx;
        cxy += dx * dy;
        cyy += dy * dy;
    }
    const double inv_n = 1.0 / double(points.size());
    cxx *= inv_n;
    cxy *= inv_n;
    cyy *= inv_n;

    // Clamp numerically negative eigenvalues to zero.
    const double half_trace = 0.5 * (cxx + cyy);
    const double det_term = std::sqrt(0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy);
    const double lambda_min = half_trace - det_term;
    if (lambda_min < 0.0) {
        if (lambda_min < -1e-12) {
            std::cerr << "warning: fit_region(" << category_name(category)
                      << "): covariance eigenvalue " << lambda_min
                      << " clamped to zero\n";
        }
        const double lambda_max = std::max(half_trace + det_term, 0.0);
        // Reconstruct from the max-eigenvalue direction only.
        double ex = cxy;
        double ey = lambda_max - cxx;
        const double norm = std::hypot(ex, ey);
        if (norm > 0.0) {
            ex /= norm;
            ey /= norm;
            cxx = lambda_max * ex * ex;
            cxy = lambda_max * ex * ey;
            cyy = lambda_max * ey * ey;
        } else {
            cxx = lambda_max;
            cxy = 0.0;
            cyy = 0.0;
        }
    }
    return Region2{category, mean, cxx, cxy, cyy};
}

std::vector<Point2> sample_region(const Region2& region, std::size_t n,
                                  std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("sample_region: n must be positive");
    }
    // Cholesky of [[cxx, cxy], [cxy, cyy]] with zero-pivot handling.
    const double l11 = region.cov_xx > 0.0 ? std::sqrt(region.cov_xx) : 0.0;
    const double l21 = l11 > 0.0 ? region.cov_xy / l11 : 0.0;
    const double l22_sq = region.cov_yy - l21 * l21;
    const double l22 = l22_sq > 0.0 ? std::sqrt(l22_sq) : 0.0;

    Rng rng(mix_seed(seed, 0x726567696f6eULL));  // "region"
    std::vector<Point2> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        samples.push_back(Point2{region.mean2.x + l11 * z1,
                                 region.mean2.y + l21 * z1 + l22 * z2});
    }
    return samples;
}

std::vector<Tensor> category_exemplar_rows(const Parameters& params, const Vocab& vocab,
                                           LexicalCategory category,
                                           const ExemplarConfig& config) {
    const auto [begin, end] = vocab.category_id_range(category);
    const std::size_t available = static_cast<std::size_t>(end - begin);
    std::size_t n = config.n_per_category == 0 ? available : config.n_per_category;
    if (n > available) {
        throw std::invalid_argument("category_exemplar_rows: not enough exemplars");
    }
    const Tensor& embedding = params.embedding();
    const std::size_t d = params.config.d_model;
    std::vector<Tensor> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor row({d});
        std::memcpy(row.data(), embedding.row(static_cast<std::size_t>(begin) + i),
                    d * sizeof(double));
        rows.push_back(std::move(row));
    }
    return rows;
}

PcaBasis fit_exemplar_basis(const Parameters& params, const Vocab& vocab,
                            CategoryPair pair, const ExemplarConfig& config,
                            bool global_basis) {
    std::vector<Tensor> rows;
    std::string description;
    if (global_basis) {
        for (LexicalCategory c : all_categories()) {
            auto cat_rows = category_exemplar_rows(params, vocab, c, config);
            std::move(cat_rows.begin(), cat_rows.end(), std::back_inserter(rows));
        }
        description = "exemplar embeddings, all categories";
    } else {
        for (LexicalCategory c : {pair.first, pair.second}) {
            auto cat_rows = category_exemplar_rows(params, vocab, c, config);
            std::move(cat_rows.begin(), cat_rows.end(), std::back_inserter(rows));
        }
        description = "exemplar embeddings, " + pair.name();
    }
    PcaBasis basis = fit_pca(rows);
    basis.fit_set_description = std::move(description);
    return basis;
}

std::map<LexicalCategory, std::vector<Point2>> project_exemplars(
    const Parameters& params, const Vocab& vocab, CategoryPair pair,
    const PcaBasis& basis, const ExemplarConfig& config) {
    std::map<LexicalCategory, std::vector<Point2>> points;
    for (LexicalCategory c : {pair.first, pair.second}) {
        std::vector<Point2> projected;
        for (const Tensor& row : category_exemplar_rows(params, vocab, c, config)) {
            projected.push_back(project(basis, row));
        }
        points.emplace(c, std::move(projected));
    }
    return points;
}

ProjectionRunRecord run_projection_experiment(const Parameters& base,
                                              const Vocab& base_vocab,
                                              const PcaBasis& basis,
                                              const Region2& region_first,
                                              const Region2& region_second,
                                              CategoryPair pair, const TestSet& test,
                                              const ProjectionConfig& config,
                                              ProjectionAudit* audit) {
    if (region_first.category != pair.first || region_second.category != pair.second) {
        throw std::invalid_argument(
            "run_projection_experiment: region categories must match the pair");
    }
    if (!(test.pair == pair)) {
        throw std::invalid_argument("run_projection_experiment: test set pair mismatch");
    }
    if (config.n_novel_per_category == 0) {
        throw std::invalid_argument("run_projection_experiment: need at least one sample");
    }
    if (basis.mean.size() != base.config.d_model) {
        throw std::invalid_argument("run_projection_experiment: basis dimension mismatch");
    }

    Parameters params = base;
    Vocab vocab = base_vocab;
    const auto& names = reserved_novel_names();
    const NovelToken token_a{names[0], vocab.register_novel(names[0]), pair.first};
    const NovelToken token_b{names[1], vocab.register_novel(names[1]), pair.second};

    const std::size_t n = config.n_novel_per_category;
    ProjectionRunRecord record;
    record.pair = pair;
    record.seed = config.seed;
    record.samples_first = sample_region(region_first, n, mix_seed(config.seed, 0xa));
    record.samples_second = sample_region(region_second, n, mix_seed(config.seed, 0xb));

    Tensor& embedding = params.embedding();
    Tensor& output_bias = params.at("output_bias");
    const std::size_t d = params.config.d_model;
    for (std::size_t i = 0; i < n; ++i) {
        const Tensor row_a = inverse_project(basis, record.samples_first[i]);
        const Tensor row_b = inverse_project(basis, record.samples_second[i]);
        std::memcpy(embedding.row(static_cast<std::size_t>(token_a.token_id)), row_a.data(),
                    d * sizeof(double));
        std::memcpy(embedding.row(static_cast<std::size_t>(token_b.token_id)), row_b.data(),
                    d * sizeof(double));
        output_bias[static_cast<std::size_t>(token_a.token_id)] = 0.0;
        output_bias[static_cast<std::size_t>(token_b.token_id)] = 0.0;
        const PairResult pairing = evaluate_pair(params, test, token_a, token_b);
        record.pairing_accuracies.push_back(pairing.accuracy);
    }

    if (audit != nullptr) {
        audit->token_id_first = token_a.token_id;
        audit->token_id_second = token_b.token_id;
        audit->final_row_first = Tensor({d});
        audit->final_row_second = Tensor({d});
        std::memcpy(audit->final_row_first.data(),
                    embedding.row(static_cast<std::size_t>(token_a.token_id)),
                    d * sizeof(double));
        std::memcpy(audit->final_row_second.data(),
                    embedding.row(static_cast<std::size_t>(token_b.token_id)),
                    d * sizeof(double));
        audit->fingerprint_excluding_novel =
            parameters_fingerprint(params, novel_token_skip({token_a, token_b}));
    }

    const auto [mean, ci95] = mean_and_ci95(record.pairing_accuracies);
    record.result = PairResult{pair, mean, ci95, record.pairing_accuracies.size()};
    return record;
}

}  // namespace wuglab
