#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wuglab/category.hpp"

namespace wuglab {

struct ResultRow {
    std::string kind;  // "ks" or "projection"
    CategoryPair pair;
    std::uint64_t seed;
    double accuracy;
    double ci95;
    std::optional<double> rel_movement_mean;
};

struct ResultsTable {
    std::vector<ResultRow> rows;
};

// Header "kind,pair,seed,accuracy,ci95,rel_movement_mean"; floats with six
// decimals; rows sorted by (kind, pair, seed); one row per key. The sixth
// field is empty when a row has no movement statistic.
void write_results_csv(const ResultsTable& table, const std::string& path);
ResultsTable read_results_csv(const std::string& path);

std::string format_fixed6(double v);

}  // namespace wuglab
