#include "wuglab/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "wuglab/checkpoint.hpp"
#include "wuglab/corpus.hpp"
#include "wuglab/error.hpp"
#include "wuglab/geometry.hpp"
#include "wuglab/model.hpp"
#include "wuglab/protocol.hpp"
#include "wuglab/report.hpp"
#include "wuglab/svgplot.hpp"

namespace wuglab {

namespace {

using nlohmann::json;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create output directory " + dir + ": " + ec.message());
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("missing input file: " + path);
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open output file: " + path);
    }
    return out;
}

json parse_json_file(const std::string& path) {
    std::ifstream in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw CorruptFileError("cannot parse " + path + ": " + e.what());
    }
}

// Runs tasks [0, n) on up to `threads` workers. Each task owns its outputs,
// so scheduling order cannot affect results.
void parallel_tasks(std::size_t n, std::size_t threads,
                    const std::function<void(std::size_t)>& task) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                    task(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& worker : workers) {
        worker.join();
    }
    for (const auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
}

json point_list_json(const std::vector<Point2>& points) {
    json arr = json::array();
    for (const Point2& p : points) {
        arr.push_back(json::array({p.x, p.y}));
    }
    return arr;
}

std::vector<Point2> point_list_from_json(const json& arr) {
    std::vector<Point2> points;
    for (const auto& item : arr) {
        points.push_back(Point2{item.at(0).get<double>(), item.at(1).get<double>()});
    }
    return points;
}

json tensor_values_json(const Tensor& t) {
    json arr = json::array();
    for (std::size_t i = 0; i < t.size(); ++i) {
        arr.push_back(t[i]);
    }
    return arr;
}

json basis_json(const PcaBasis& basis) {
    return json{{"fit_set", basis.fit_set_description},
                {"explained_variance",
                 json::array({basis.explained_variance[0], basis.explained_variance[1]})},
                {"mean", tensor_values_json(basis.mean)},
                {"pc1", tensor_values_json(basis.pc1)},
                {"pc2", tensor_values_json(basis.pc2)}};
}

json region_json(const Region2& region) {
    return json{{"category", std::string(category_name(region.category))},
                {"mean", json::array({region.mean2.x, region.mean2.y})},
                {"cov", json::array({region.cov_xx, region.cov_xy, region.cov_yy})}};
}

json result_json(const PairResult& result) {
    return json{{"pair", result.pair.name()},
                {"accuracy", result.accuracy},
                {"ci95", result.ci95},
                {"n_items", result.n_items}};
}

struct BaseArtifacts {
    Lexicon lexicon;
    Vocab vocab;
    Parameters params;
};

BaseArtifacts load_base(const RunConfig& config, const PipelinePaths& paths) {
    Lexicon lexicon = load_lexicon(paths.lexicon());
    Parameters params = load_checkpoint(paths.checkpoint());
    Vocab vocab(lexicon, params.config.novel_slots);
    if (vocab.size() != params.config.vocab_size) {
        throw Error("lexicon and checkpoint disagree on vocabulary size (" +
                    std::to_string(vocab.size()) + " vs " +
                    std::to_string(params.config.vocab_size) + ")");
    }
    (void)config;
    return BaseArtifacts{std::move(lexicon), std::move(vocab), std::move(params)};
}

}  // namespace

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
    json words = json::object();
    for (LexicalCategory c : all_categories()) {
        words[std::string(category_name(c))] = lexicon.words_of(c);
    }
    const json j{{"function_words", lexicon.function_words}, {"words", words}};
    std::ofstream out = open_output(path);
    out << j.dump(2) << '\n';
}

Lexicon load_lexicon(const std::string& path) {
    const json j = parse_json_file(path);
    Lexicon lexicon;
    try {
        lexicon.function_words = j.at("function_words").get<std::vector<std::string>>();
        for (LexicalCategory c : all_categories()) {
            lexicon.words[category_index(c)] =
                j.at("words").at(std::string(category_name(c))).get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw CorruptFileError("lexicon file " + path + " is malformed: " + e.what());
    }
    lexicon.validate();
    return lexicon;
}

void run_gen(const RunConfig& config, const std::string& out_dir) {
    config.validate();
    ensure_dir(out_dir);
    const PipelinePaths paths{out_dir};

    const Lexicon lexicon =
        build_lexicon(config.lexicon_words_per_category, config.lexicon_seed);
    const Vocab vocab(lexicon, config.novel_slots);
    const auto corpus = generate_corpus(vocab, config.corpus_sentences, config.corpus_seed);
    const auto heldout =
        make_heldout_stimuli(vocab, config.heldout_stimuli, config.heldout_seed);

    save_lexicon(lexicon, paths.lexicon());
    {
        std::ofstream out = open_output(paths.corpus());
        write_sentences(out, corpus, vocab);
    }
    {
        std::ofstream out = open_output(paths.heldout());
        write_stimuli(out, heldout, vocab);
    }
    std::cout << "gen: " << lexicon.content_word_count() << " lexicon words, "
              << corpus.size() << " sentences, " << heldout.size()
              << " held-out stimuli -> " << out_dir << "\n";
}

void run_train(const RunConfig& config, const std::string& out_dir) {
    config.validate();
    const PipelinePaths paths{out_dir};

    const Lexicon lexicon = load_lexicon(paths.lexicon());
    const Vocab vocab(lexicon, config.novel_slots);
    std::vector<std::vector<int>> corpus;
    {
        std::ifstream in = open_input(paths.corpus());
        corpus = read_sentences(in, vocab);
    }
    std::vector<Stimulus> heldout;
    {
        std::ifstream in = open_input(paths.heldout());
        heldout = read_stimuli(in, vocab);
    }

    Parameters params = init_model(config.model_config(vocab.size()), config.model_seed);
    const TrainReport report =
        train_base(params, corpus, config.train_hyper(), config.train_seed, vocab, heldout);
    save_checkpoint(params, paths.checkpoint());

    json j{{"epoch_mean_loss", report.epoch_mean_loss},
           {"heldout_accuracy", report.heldout_accuracy},
           {"wall_seconds", report.wall_seconds}};
    std::ofstream out = open_output(paths.train_report());
    out << j.dump(2) << '\n';

    std::cout << "train: " << report.epoch_mean_loss.size() << " epochs, final loss "
              << (report.epoch_mean_loss.empty() ? 0.0 : report.epoch_mean_loss.back())
              << ", held-out category accuracy " << report.heldout_accuracy << " ("
              << report.wall_seconds << "s)\n";
}

void run_ks(const RunConfig& config, const std::string& out_dir,
            const std::vector<CategoryPair>& pairs) {
    config.validate();
    const PipelinePaths paths{out_dir};
    const BaseArtifacts base = load_base(config, paths);

    struct Task {
        CategoryPair pair;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const CategoryPair& pair : pairs) {
        for (std::uint64_t seed : config.seeds) {
            tasks.push_back(Task{pair, seed});
        }
    }

    parallel_tasks(tasks.size(), config.effective_threads(), [&](std::size_t i) {
        const auto& [pair, seed] = tasks[i];
        const KsRunRecord record =
            run_ks_experiment(base.params, base.vocab, pair, config.ks_config(), seed);

        // Movement analysis against the pair's exemplar basis.
        const PcaBasis basis =
            fit_exemplar_basis(base.params, base.vocab, pair, config.exemplar_config(),
                               config.global_pca_basis);
        const auto exemplar_points =
            project_exemplars(base.params, base.vocab, pair, basis,
                              config.exemplar_config());

        json trajectories = json::array();
        json movement = json::array();
        json trajectory_points = json::object();
        for (const Trajectory& trajectory : record.trajectories) {
            json snapshots = json::array();
            json points = json::array();
            for (const TrajectorySnapshot& snap : trajectory.snapshots) {
                snapshots.push_back(json{{"step", snap.step},
                                         {"embedding", tensor_values_json(snap.embedding)}});
                const Point2 p = project(basis, snap.embedding);
                points.push_back(json::array({p.x, p.y}));
            }
            trajectories.push_back(json{{"token", trajectory.token.name},
                                        {"category",
                                         std::string(category_name(trajectory.token.category))},
                                        {"token_id", trajectory.token.token_id},
                                        {"snapshots", std::move(snapshots)}});
            trajectory_points[trajectory.token.name] = std::move(points);

            const MovementRecord move = movement_analysis(trajectory, basis, exemplar_points);
            json m{{"token", move.token.name},
                   {"category", std::string(category_name(move.token.category))},
                   {"initial_distance", move.initial_distance},
                   {"final_distance", move.final_distance}};
            m["relative_movement"] =
                move.relative_movement ? json(*move.relative_movement) : json(nullptr);
            movement.push_back(std::move(m));
        }

        json exemplars = json::object();
        for (const auto& [category, points] : exemplar_points) {
            exemplars[std::string(category_name(category))] = point_list_json(points);
        }

        json j{{"kind", "ks"},
               {"pair", pair.name()},
               {"seed", seed},
               {"train_stimuli",
                json::array({stimulus_to_line(record.train_stimuli.first, base.vocab),
                             stimulus_to_line(record.train_stimuli.second, base.vocab)})},
               {"result", result_json(record.result)},
               {"trajectories", std::move(trajectories)},
               {"movement", std::move(movement)},
               {"trajectory_points", std::move(trajectory_points)},
               {"exemplar_points", std::move(exemplars)},
               {"basis", basis_json(basis)}};
        // Test stimuli serialized against the run's vocabulary (novel names
        // resolve there).
        {
            Vocab run_vocab = base.vocab;
            run_vocab.register_novel(record.tokens[0].name);
            run_vocab.register_novel(record.tokens[1].name);
            json test_lines = json::array();
            for (const Stimulus& item : record.test.items) {
                test_lines.push_back(stimulus_to_line(item, run_vocab));
            }
            j["test_stimuli"] = std::move(test_lines);
        }

        std::ofstream out = open_output(paths.ks_record(pair, seed));
        out << j.dump(2) << '\n';
    });
    std::cout << "ks: wrote " << tasks.size() << " experiment records -> " << out_dir
              << "\n";
}

void run_project(const RunConfig& config, const std::string& out_dir,
                 const std::vector<CategoryPair>& pairs) {
    config.validate();
    const PipelinePaths paths{out_dir};
    const BaseArtifacts base = load_base(config, paths);

    struct Task {
        CategoryPair pair;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const CategoryPair& pair : pairs) {
        for (std::uint64_t seed : config.seeds) {
            tasks.push_back(Task{pair, seed});
        }
    }

    parallel_tasks(tasks.size(), config.effective_threads(), [&](std::size_t i) {
        const auto& [pair, seed] = tasks[i];

        // Same stimulus derivation as the matching ks run, so projection is
        // evaluated on the identical lexically disjoint test set.
        Vocab vocab = base.vocab;
        const auto& names = reserved_novel_names();
        const int id_a = vocab.register_novel(names[0]);
        const int id_b = vocab.register_novel(names[1]);
        const auto train_stimuli = make_training_stimuli(pair, vocab, id_a, id_b, seed);
        const TestSet test = make_test_set(pair, vocab, config.test_n_per_category,
                                           train_stimuli, id_a, id_b, seed);

        const PcaBasis basis =
            fit_exemplar_basis(base.params, base.vocab, pair, config.exemplar_config(),
                               config.global_pca_basis);
        const auto exemplar_points =
            project_exemplars(base.params, base.vocab, pair, basis,
                              config.exemplar_config());
        const Region2 region_first =
            fit_region(pair.first, exemplar_points.at(pair.first));
        const Region2 region_second =
            fit_region(pair.second, exemplar_points.at(pair.second));

        ProjectionConfig pc;
        pc.n_novel_per_category = config.projection_samples_per_category;
        pc.seed = seed;
        const ProjectionRunRecord record = run_projection_experiment(
            base.params, base.vocab, basis, region_first, region_second, pair, test, pc);

        json exemplars = json::object();
        for (const auto& [category, points] : exemplar_points) {
            exemplars[std::string(category_name(category))] = point_list_json(points);
        }
        const json j{{"kind", "projection"},
                     {"pair", pair.name()},
                     {"seed", seed},
                     {"result", result_json(record.result)},
                     {"pairing_accuracies", record.pairing_accuracies},
                     {"samples",
                      json{{"first", point_list_json(record.samples_first)},
                           {"second", point_list_json(record.samples_second)}}},
                     {"regions",
                      json{{"first", region_json(region_first)},
                           {"second", region_json(region_second)}}},
                     {"exemplar_points", std::move(exemplars)},
                     {"basis", basis_json(basis)}};

        std::ofstream out = open_output(paths.projection_record(pair, seed));
        out << j.dump(2) << '\n';
    });
    std::cout << "project: wrote " << tasks.size() << " experiment records -> " << out_dir
              << "\n";
}

void run_report(const RunConfig& config, const std::string& out_dir,
                const std::vector<CategoryPair>& pairs) {
    config.validate();
    const PipelinePaths paths{out_dir};

    ResultsTable table;
    for (const CategoryPair& pair : pairs) {
        for (std::uint64_t seed : config.seeds) {
            const json ks = parse_json_file(paths.ks_record(pair, seed));
            {
                double movement_sum = 0.0;
                std::size_t movement_n = 0;
                for (const auto& m : ks.at("movement")) {
                    if (!m.at("relative_movement").is_null()) {
                        movement_sum += m.at("relative_movement").get<double>();
                        ++movement_n;
                    }
                }
                table.rows.push_back(ResultRow{
                    "ks", pair, seed, ks.at("result").at("accuracy").get<double>(),
                    ks.at("result").at("ci95").get<double>(),
                    movement_n == 0
                        ? std::nullopt
                        : std::optional<double>(movement_sum / double(movement_n))});
            }
            const json proj = parse_json_file(paths.projection_record(pair, seed));
            table.rows.push_back(
                ResultRow{"projection", pair, seed,
                          proj.at("result").at("accuracy").get<double>(),
                          proj.at("result").at("ci95").get<double>(), std::nullopt});
        }
    }
    write_results_csv(table, paths.results_csv());

    // Figures for the first seed of every pair.
    const std::uint64_t seed = config.seeds.front();
    for (const CategoryPair& pair : pairs) {
        const json ks = parse_json_file(paths.ks_record(pair, seed));
        const auto exemplars_first = point_list_from_json(
            ks.at("exemplar_points").at(std::string(category_name(pair.first))));
        const auto exemplars_second = point_list_from_json(
            ks.at("exemplar_points").at(std::string(category_name(pair.second))));

        for (const auto& trajectory : ks.at("trajectories")) {
            const std::string token = trajectory.at("token").get<std::string>();
            const std::string category = trajectory.at("category").get<std::string>();
            MovementPlotData data;
            data.title = pair.name() + " (seed " + std::to_string(seed) + "): " + token +
                         " -> " + category;
            data.label_first = category_name(pair.first);
            data.label_second = category_name(pair.second);
            data.exemplars_first = exemplars_first;
            data.exemplars_second = exemplars_second;
            data.trajectory =
                point_list_from_json(ks.at("trajectory_points").at(token));
            render_movement_svg(data, paths.movement_svg(pair, seed, token));
        }

        const json proj = parse_json_file(paths.projection_record(pair, seed));
        RegionPlotData region_data;
        region_data.title = pair.name() + " (seed " + std::to_string(seed) +
                            "): category regions and sampled tokens";
        region_data.label_first = category_name(pair.first);
        region_data.label_second = category_name(pair.second);
        region_data.exemplars_first = point_list_from_json(
            proj.at("exemplar_points").at(std::string(category_name(pair.first))));
        region_data.exemplars_second = point_list_from_json(
            proj.at("exemplar_points").at(std::string(category_name(pair.second))));
        const auto region_from_json = [](const json& r) {
            return Region2{category_from_name(r.at("category").get<std::string>()),
                           Point2{r.at("mean").at(0).get<double>(),
                                  r.at("mean").at(1).get<double>()},
                           r.at("cov").at(0).get<double>(), r.at("cov").at(1).get<double>(),
                           r.at("cov").at(2).get<double>()};
        };
        region_data.region_first = region_from_json(proj.at("regions").at("first"));
        region_data.region_second = region_from_json(proj.at("regions").at("second"));
        region_data.samples_first =
            point_list_from_json(proj.at("samples").at("first"));
        region_data.samples_second =
            point_list_from_json(proj.at("samples").at("second"));
        render_region_svg(region_data, paths.region_svg(pair, seed));
    }
    std::cout << "report: " << table.rows.size() << " result rows -> "
              << paths.results_csv() << "\n";
}

void run_all(const RunConfig& config, const std::string& out_dir,
             const std::vector<CategoryPair>& pairs) {
    run_gen(config, out_dir);
    run_train(config, out_dir);
    run_ks(config, out_dir, pairs);
    run_project(config, out_dir, pairs);
    run_report(config, out_dir, pairs);
}

}  // namespace wuglab
