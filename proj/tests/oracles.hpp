#pragma once

// Independent test oracles. These deliberately avoid the library's own code
// paths: the eigensolver below goes through the covariance matrix rather
// than an SVD of the centered data, and the template matcher re-derives
// sentences from the grammar instead of trusting the generators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wuglab/corpus.hpp"
#include "wuglab/tensor.hpp"

namespace oracles {

using Matrix = std::vector<std::vector<double>>;

// Classic two-sided Jacobi eigen-decomposition of a small symmetric matrix.
// Returns eigenvalues in descending order with matching eigenvectors
// (columns of the rotation product).
inline void jacobi_symmetric_eig(Matrix a, std::vector<double>& values,
                                 Matrix& vectors) {
    const std::size_t n = a.size();
    vectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        vectors[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a[p][q] * a[p][q];
            }
        }
        if (off < 1e-28) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i][p];
                    const double aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p][i];
                    const double aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = vectors[i][p];
                    const double viq = vectors[i][q];
                    vectors[i][p] = c * vip - s * viq;
                    vectors[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    values.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return a[l][l] > a[r][r]; });
    Matrix sorted_vectors(n, std::vector<double>(n));
    std::vector<double> sorted_values(n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_values[j] = a[order[j]][order[j]];
        for (std::size_t i = 0; i < n; ++i) {
            sorted_vectors[i][j] = vectors[i][order[j]];
        }
    }
    values = std::move(sorted_values);
    vectors = std::move(sorted_vectors);
}

// Covariance of a vector set with (n-1) normalization.
inline Matrix covariance_matrix(const std::vector<wuglab::Tensor>& vectors) {
    const std::size_t n = vectors.size();
    const std::size_t d = vectors.front().size();
    std::vector<double> mean(d, 0.0);
    for (const auto& v : vectors) {
        for (std::size_t i = 0; i < d; ++i) {
            mean[i] += v[i];
        }
    }
    for (double& m : mean) {
        m /= double(n);
    }
    Matrix cov(d, std::vector<double>(d, 0.0));
    for (const auto& v : vectors) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                cov[i][j] += (v[i] - mean[i]) * (v[j] - mean[j]);
            }
        }
    }
    for (auto& row : cov) {
        for (double& c : row) {
            c /= double(n - 1);
        }
    }
    return cov;
}

// Indices of grammar templates that can generate the sentence.
inline std::vector<std::size_t> matching_templates(const std::vector<int>& sentence,
                                                   const wuglab::Vocab& vocab) {
    std::vector<std::size_t> matches;
    const auto& templates = wuglab::grammar_templates();
    for (std::size_t ti = 0; ti < templates.size(); ++ti) {
        const auto& tpl = templates[ti];
        if (tpl.length() != sentence.size()) {
            continue;
        }
        bool ok = true;
        for (std::size_t i = 0; i < sentence.size() && ok; ++i) {
            const auto& item = tpl.items[i];
            if (item.is_literal) {
                ok = sentence[i] == vocab.id_of(item.literal);
            } else {
                const auto category = vocab.category_of_id(sentence[i]);
                ok = category.has_value() && *category == item.category;
            }
        }
        if (ok) {
            matches.push_back(ti);
        }
    }
    return matches;
}

// Categories whose words can legally fill the masked slot of a stimulus
// (i.e. make the completed sentence derivable from some template).
inline std::vector<wuglab::LexicalCategory> licensed_categories(
    const wuglab::Stimulus& s, const wuglab::Vocab& vocab) {
    std::vector<wuglab::LexicalCategory> licensed;
    for (wuglab::LexicalCategory c : wuglab::all_categories()) {
        const auto [begin, end] = vocab.category_id_range(c);
        if (begin == end) {
            continue;
        }
        std::vector<int> completed = s.tokens;
        completed[s.mask_position] = begin;
        if (!matching_templates(completed, vocab).empty()) {
            licensed.push_back(c);
        }
    }
    return licensed;
}

// Hand-built lexicon: `n` words per category with predictable names
// (noun0, verb1, ...). Bypasses build_lexicon's size floor.
inline wuglab::Lexicon tiny_lexicon(std::size_t n) {
    wuglab::Lexicon lex;
    lex.function_words = {wuglab::kPadToken, wuglab::kMaskToken, wuglab::kDeterminer,
                          wuglab::kPeriod};
    for (wuglab::LexicalCategory c : wuglab::all_categories()) {
        for (std::size_t i = 0; i < n; ++i) {
            lex.words[wuglab::category_index(c)].push_back(
                std::string(wuglab::category_name(c)) + std::to_string(i));
        }
    }
    return lex;
}

}  // namespace oracles
