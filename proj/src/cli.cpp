#include "wuglab/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wuglab/config.hpp"
#include "wuglab/error.hpp"
#include "wuglab/pipeline.hpp"

namespace wuglab {

namespace {

std::vector<CategoryPair> parse_pairs(const std::vector<std::string>& names) {
    if (names.empty()) {
        return all_category_pairs();
    }
    std::vector<CategoryPair> pairs;
    for (const std::string& name : names) {
        pairs.push_back(pair_from_name(name));
    }
    return pairs;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Novel-token lexical category laboratory: synthetic grammar, masked-LM "
                 "training, single-exposure embedding learning, and embedding-space "
                 "geometry analyses"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> pair_names;

    app.add_option("--config", config_path, "JSON run configuration (defaults when omitted)");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seeds, "experiment seeds, comma separated")->delimiter(',');
    app.add_option("--pairs", pair_names,
                   "category pairs like noun-verb, comma separated (default: all six)")
        ->delimiter(',');

    app.add_subcommand("gen", "generate lexicon, base corpus, and held-out stimuli");
    app.add_subcommand("train", "train the base masked LM on the generated corpus");
    app.add_subcommand("ks", "run the single-exposure embedding-learning experiments");
    app.add_subcommand("project", "run the region-sampling projection experiments");
    app.add_subcommand("report", "aggregate records into results.csv and SVG figures");
    app.add_subcommand("all", "full pipeline: gen, train, ks, project, report");

    if (argc <= 1) {
        std::cout << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        RunConfig config =
            config_path.empty() ? RunConfig{} : RunConfig::from_json_file(config_path);
        if (!seeds.empty()) {
            config.seeds = seeds;
        }
        config.validate();
        const std::vector<CategoryPair> pairs = parse_pairs(pair_names);

        if (app.got_subcommand("gen")) {
            run_gen(config, out_dir);
        } else if (app.got_subcommand("train")) {
            run_train(config, out_dir);
        } else if (app.got_subcommand("ks")) {
            run_ks(config, out_dir, pairs);
        } else if (app.got_subcommand("project")) {
            run_project(config, out_dir, pairs);
        } else if (app.got_subcommand("report")) {
            run_report(config, out_dir, pairs);
        } else if (app.got_subcommand("all")) {
            run_all(config, out_dir, pairs);
        } else {
            std::cout << app.help();
            return 2;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace wuglab
