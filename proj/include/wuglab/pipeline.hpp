#pragma once

#include <string>
#include <vector>

#include "wuglab/category.hpp"
#include "wuglab/config.hpp"

namespace wuglab {

// Output-directory layout shared by the pipeline stages. Every stage reads
// its inputs back from disk, so stages are independently re-runnable.
struct PipelinePaths {
    std::string out_dir;

    std::string lexicon() const { return out_dir + "/lexicon.json"; }
    std::string corpus() const { return out_dir + "/corpus.txt"; }
    std::string heldout() const { return out_dir + "/heldout.txt"; }
    std::string checkpoint() const { return out_dir + "/model.ckpt"; }
    std::string train_report() const { return out_dir + "/train_report.json"; }
    std::string ks_record(CategoryPair pair, std::uint64_t seed) const {
        return out_dir + "/ks_" + pair.name() + "_seed" + std::to_string(seed) + ".json";
    }
    std::string projection_record(CategoryPair pair, std::uint64_t seed) const {
        return out_dir + "/projection_" + pair.name() + "_seed" + std::to_string(seed) +
               ".json";
    }
    std::string results_csv() const { return out_dir + "/results.csv"; }
    std::string movement_svg(CategoryPair pair, std::uint64_t seed,
                             const std::string& token) const {
        return out_dir + "/movement_" + pair.name() + "_seed" + std::to_string(seed) +
               "_" + token + ".svg";
    }
    std::string region_svg(CategoryPair pair, std::uint64_t seed) const {
        return out_dir + "/regions_" + pair.name() + "_seed" + std::to_string(seed) +
               ".svg";
    }
};

void run_gen(const RunConfig& config, const std::string& out_dir);
void run_train(const RunConfig& config, const std::string& out_dir);
void run_ks(const RunConfig& config, const std::string& out_dir,
            const std::vector<CategoryPair>& pairs);
void run_project(const RunConfig& config, const std::string& out_dir,
                 const std::vector<CategoryPair>& pairs);
void run_report(const RunConfig& config, const std::string& out_dir,
                const std::vector<CategoryPair>& pairs);
void run_all(const RunConfig& config, const std::string& out_dir,
             const std::vector<CategoryPair>& pairs);

// Lexicon persistence (JSON; word order preserved, ids reconstructible).
void save_lexicon(const Lexicon& lexicon, const std::string& path);
Lexicon load_lexicon(const std::string& path);

}  // namespace wuglab
