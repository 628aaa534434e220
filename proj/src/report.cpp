#include "wuglab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "wuglab/error.hpp"

namespace wuglab {

std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

namespace {

std::tuple<std::string, std::string, std::uint64_t> row_key(const ResultRow& row) {
    return {row.kind, row.pair.name(), row.seed};
}

}  // namespace

void write_results_csv(const ResultsTable& table, const std::string& path) {
    std::vector<ResultRow> rows = table.rows;
    for (const ResultRow& row : rows) {
        if (row.accuracy < 0.0 || row.accuracy > 1.0) {
            throw std::invalid_argument("results table: accuracy outside [0,1]");
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return row_key(a) < row_key(b);
    });
    std::set<std::tuple<std::string, std::string, std::uint64_t>> keys;
    for (const ResultRow& row : rows) {
        if (!keys.insert(row_key(row)).second) {
            throw std::invalid_argument("results table: duplicate row for " + row.kind +
                                        "," + row.pair.name() + "," +
                                        std::to_string(row.seed));
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open results csv for writing: " + path);
    }
    out << "kind,pair,seed,accuracy,ci95,rel_movement_mean\n";
    for (const ResultRow& row : rows) {
        out << row.kind << ',' << row.pair.name() << ',' << row.seed << ','
            << format_fixed6(row.accuracy) << ',' << format_fixed6(row.ci95) << ',';
        if (row.rel_movement_mean) {
            out << format_fixed6(*row.rel_movement_mean);
        }
        out << '\n';
    }
    if (!out) {
        throw Error("write failure on results csv: " + path);
    }
}

ResultsTable read_results_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open results csv for reading: " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != "kind,pair,seed,accuracy,ci95,rel_movement_mean") {
        throw CorruptFileError("results csv has unexpected header: " + path);
    }
    ResultsTable table;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (line.back() == ',') {
            fields.push_back("");
        }
        if (fields.size() != 6) {
            throw CorruptFileError("results csv row with wrong field count: " + line);
        }
        ResultRow row{fields[0],
                      pair_from_name(fields[1]),
                      std::stoull(fields[2]),
                      std::stod(fields[3]),
                      std::stod(fields[4]),
                      fields[5].empty() ? std::nullopt
                                        : std::optional<double>(std::stod(fields[5]))};
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace wuglab
