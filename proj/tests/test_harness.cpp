#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "wuglab/checkpoint.hpp"
#include "wuglab/cli.hpp"
#include "wuglab/config.hpp"
#include "wuglab/error.hpp"
#include "wuglab/pipeline.hpp"
#include "wuglab/report.hpp"
#include "wuglab/svgplot.hpp"

using namespace wuglab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("wuglab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv = {"wuglab"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("results csv: header-only for empty table") {
    const fs::path dir = fresh_dir("csv_empty");
    const std::string path = (dir / "results.csv").string();
    write_results_csv(ResultsTable{}, path);
    CHECK(slurp(path) == "kind,pair,seed,accuracy,ci95,rel_movement_mean\n");
}

TEST_CASE("results csv: fixture row formatting") {
    const fs::path dir = fresh_dir("csv_row");
    const std::string path = (dir / "results.csv").string();
    ResultsTable table;
    table.rows.push_back(ResultRow{
        "projection", CategoryPair::of(LexicalCategory::Noun, LexicalCategory::Verb), 1,
        0.81, 0.08, std::nullopt});
    write_results_csv(table, path);
    CHECK(slurp(path) ==
          "kind,pair,seed,accuracy,ci95,rel_movement_mean\n"
          "projection,noun-verb,1,0.810000,0.080000,\n");
}

TEST_CASE("results csv: sorted rows, round trip, validation") {
    const fs::path dir = fresh_dir("csv_round");
    const std::string path = (dir / "results.csv").string();
    ResultsTable table;
    const auto nv = CategoryPair::of(LexicalCategory::Noun, LexicalCategory::Verb);
    const auto aa = CategoryPair::of(LexicalCategory::Adj, LexicalCategory::Adv);
    table.rows.push_back(ResultRow{"projection", nv, 2, 0.9, 0.05, std::nullopt});
    table.rows.push_back(ResultRow{"ks", nv, 1, 1.0, 0.0, 0.62});
    table.rows.push_back(ResultRow{"ks", aa, 1, 0.85, 0.04, -0.25});
    write_results_csv(table, path);

    const std::string first = slurp(path);
    // adj-adv sorts before noun-verb; ks before projection.
    CHECK(first.find("ks,adj-adv,1") < first.find("ks,noun-verb,1"));
    CHECK(first.find("ks,noun-verb,1") < first.find("projection,noun-verb,2"));

    const ResultsTable loaded = read_results_csv(path);
    const std::string second_path = (dir / "results2.csv").string();
    write_results_csv(loaded, second_path);
    CHECK(slurp(second_path) == first);

    ResultsTable duplicate = table;
    duplicate.rows.push_back(table.rows[0]);
    CHECK_THROWS_AS(write_results_csv(duplicate, path), std::invalid_argument);
    ResultsTable bad = table;
    bad.rows[0].accuracy = 1.5;
    CHECK_THROWS_AS(write_results_csv(bad, path), std::invalid_argument);
}

TEST_CASE("checkpoint: bit-exact round trip") {
    const fs::path dir = fresh_dir("ckpt");
    ModelConfig config;
    config.vocab_size = 24;
    config.d_model = 8;
    config.n_layers = 1;
    config.n_heads = 2;
    config.max_seq_len = 6;
    config.novel_slots = 4;
    const Parameters params = init_model(config, 5);

    const std::string path = (dir / "model.ckpt").string();
    save_checkpoint(params, path);
    const Parameters loaded = load_checkpoint(path);
    CHECK(loaded.config == params.config);
    CHECK(loaded.tensors == params.tensors);

    // save -> load -> save produces identical bytes.
    const std::string path2 = (dir / "model2.ckpt").string();
    save_checkpoint(loaded, path2);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("checkpoint: corruption and version errors") {
    const fs::path dir = fresh_dir("ckpt_bad");
    ModelConfig config;
    config.vocab_size = 24;
    config.d_model = 8;
    config.n_layers = 1;
    config.n_heads = 2;
    const Parameters params = init_model(config, 6);
    const std::string path = (dir / "model.ckpt").string();
    save_checkpoint(params, path);

    const std::string full = slurp(path);
    {
        std::ofstream out(dir / "truncated.ckpt", std::ios::binary);
        out.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
    }
    CHECK_THROWS_AS(load_checkpoint((dir / "truncated.ckpt").string()), CorruptFileError);

    {
        std::string tampered = full;
        tampered[8] = 2;  // bump the little-endian version tag
        std::ofstream out(dir / "future.ckpt", std::ios::binary);
        out.write(tampered.data(), static_cast<std::streamsize>(tampered.size()));
    }
    try {
        load_checkpoint((dir / "future.ckpt").string());
        FAIL("expected VersionMismatchError");
    } catch (const VersionMismatchError& e) {
        const std::string what = e.what();
        CHECK(what.find("2") != std::string::npos);
        CHECK(what.find("1") != std::string::npos);
    }

    {
        std::ofstream out(dir / "garbage.ckpt", std::ios::binary);
        out << "not a checkpoint at all";
    }
    CHECK_THROWS_AS(load_checkpoint((dir / "garbage.ckpt").string()), CorruptFileError);
    CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), Error);
}

TEST_CASE("run config: defaults round trip, strict keys") {
    const RunConfig defaults;
    const RunConfig parsed = RunConfig::from_json_text(defaults.to_json_text());
    CHECK(parsed.to_json_text() == defaults.to_json_text());

    CHECK_THROWS_AS(RunConfig::from_json_text("{\"no_such_key\": 1}"), Error);
    CHECK_THROWS_AS(RunConfig::from_json_text("{\"d_model\": \"wide\"}"), Error);
    CHECK_THROWS_AS(RunConfig::from_json_text("not json"), Error);
    CHECK_THROWS_AS(RunConfig::from_json_text("{\"seeds\": []}"), std::invalid_argument);

    const RunConfig overridden =
        RunConfig::from_json_text("{\"d_model\": 32, \"seeds\": [7]}");
    CHECK(overridden.d_model == 32);
    CHECK(overridden.seeds == std::vector<std::uint64_t>{7});
    CHECK(overridden.n_layers == defaults.n_layers);
}

TEST_CASE("lexicon json round trip") {
    const fs::path dir = fresh_dir("lexicon");
    const Lexicon lexicon = build_lexicon(12, 3);
    const std::string path = (dir / "lexicon.json").string();
    save_lexicon(lexicon, path);
    const Lexicon loaded = load_lexicon(path);
    CHECK(loaded.function_words == lexicon.function_words);
    for (LexicalCategory c : all_categories()) {
        CHECK(loaded.words_of(c) == lexicon.words_of(c));
    }
    CHECK_THROWS_AS(load_lexicon((dir / "missing.json").string()), Error);
}

TEST_CASE("movement svg: structure, arrow, stationary degeneration") {
    MovementPlotData data;
    data.title = "noun-verb <test> & co";
    data.label_first = "noun";
    data.label_second = "verb";
    data.exemplars_first = {Point2{0.0, 0.0}, Point2{1.0, 0.2}};
    data.exemplars_second = {Point2{-1.0, 0.1}, Point2{-0.5, -0.3}};
    data.trajectory = {Point2{0.1, 0.1}, Point2{0.4, 0.0}, Point2{0.8, 0.05}};

    const std::string svg = movement_svg(data);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg ") != std::string::npos);
    CHECK(svg.find("</svg>") == svg.size() - 7);  // single closing root at the end
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("<polygon") != std::string::npos);  // arrowhead
    CHECK(svg.find("PC1") != std::string::npos);
    CHECK(svg.find("PC2") != std::string::npos);
    CHECK(svg.find("&lt;test&gt;") != std::string::npos);  // escaped title
    CHECK(svg.find("<test>") == std::string::npos);

    MovementPlotData still = data;
    still.trajectory = {Point2{0.2, 0.2}, Point2{0.2, 0.2}};
    const std::string still_svg = movement_svg(still);
    CHECK(still_svg.find("<polyline") == std::string::npos);
    CHECK(still_svg.find("<polygon") == std::string::npos);

    MovementPlotData empty = data;
    empty.trajectory.clear();
    CHECK_THROWS_AS(movement_svg(empty), std::invalid_argument);
}

TEST_CASE("region svg: ellipses and sample markers") {
    RegionPlotData data;
    data.title = "regions";
    data.label_first = "noun";
    data.label_second = "verb";
    data.exemplars_first = {Point2{0.0, 0.0}, Point2{1.0, 0.2}, Point2{0.5, -0.2}};
    data.exemplars_second = {Point2{-1.0, 0.1}, Point2{-0.5, -0.3}, Point2{-0.7, 0.2}};
    data.region_first = fit_region(LexicalCategory::Noun, data.exemplars_first);
    data.region_second = fit_region(LexicalCategory::Verb, data.exemplars_second);
    data.samples_first = {Point2{0.4, 0.1}};
    data.samples_second = {Point2{-0.6, 0.0}};
    const std::string svg = region_svg(data);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<ellipse") != std::string::npos);
    CHECK(svg.find("</svg>") == svg.size() - 7);
}

TEST_CASE("cli: exit codes for usage errors") {
    CHECK(cli_main(1, nullptr) == 2);
    CHECK(run_cli({"--definitely-not-a-flag"}) == 2);
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({"--pairs", "noun-nonsense", "gen"}) == 2);
}

TEST_CASE("cli: report with missing inputs fails cleanly") {
    const fs::path dir = fresh_dir("cli_missing");
    CHECK(run_cli({"--out", dir.string(), "report"}) == 1);
    CHECK(run_cli({"--out", dir.string(), "train"}) == 1);
}

TEST_CASE("pipeline: miniature end-to-end run is deterministic") {
    const fs::path dir1 = fresh_dir("pipe1");
    const fs::path dir2 = fresh_dir("pipe2");

    RunConfig config;
    config.lexicon_words_per_category = 12;
    config.corpus_sentences = 400;
    config.heldout_stimuli = 60;
    config.d_model = 16;
    config.n_layers = 1;
    config.n_heads = 2;
    config.train_epochs = 1;
    config.test_n_per_category = 8;
    config.protocol_steps = 20;
    config.projection_samples_per_category = 3;
    config.seeds = {1, 2};
    config.threads = 2;

    const std::vector<CategoryPair> pairs = {
        CategoryPair::of(LexicalCategory::Noun, LexicalCategory::Verb),
        CategoryPair::of(LexicalCategory::Adj, LexicalCategory::Adv)};

    run_all(config, dir1.string(), pairs);
    run_all(config, dir2.string(), pairs);

    CHECK(slurp(dir1 / "results.csv") == slurp(dir2 / "results.csv"));
    CHECK(slurp(dir1 / "model.ckpt") == slurp(dir2 / "model.ckpt"));
    CHECK(slurp(dir1 / "ks_noun-verb_seed1.json") ==
          slurp(dir2 / "ks_noun-verb_seed1.json"));

    // Stage outputs exist and have the expected row count:
    // 2 kinds x 2 pairs x 2 seeds.
    const ResultsTable table = read_results_csv((dir1 / "results.csv").string());
    CHECK(table.rows.size() == 8);
    CHECK(fs::exists(dir1 / "movement_noun-verb_seed1_wug.svg"));
    CHECK(fs::exists(dir1 / "regions_adj-adv_seed1.svg"));

    // report is re-runnable on existing records.
    run_report(config, dir1.string(), pairs);
    CHECK(slurp(dir1 / "results.csv") == slurp(dir2 / "results.csv"));
}
