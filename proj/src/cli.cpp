#include "dq/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "dq/benchmark.hpp"
#include "dq/cartography.hpp"
#include "dq/confident_learning.hpp"
#include "dq/coreset.hpp"
#include "dq/harness.hpp"
#include "dq/io.hpp"
#include "dq/probe.hpp"
#include "dq/report.hpp"

namespace dq::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    double percentile = 90.0;
    std::string out;
};

struct InputOptions {
    std::string labels, features, embeddings;
    std::vector<std::string> probs;
    std::string delimiter = ",";
    int classes = 0;

    io::TabularInputSpec spec() const {
        io::TabularInputSpec s;
        if (!labels.empty()) s.labels = labels;
        if (!features.empty()) s.features = features;
        if (!embeddings.empty()) s.embeddings = embeddings;
        for (const auto& p : probs) s.probabilities.emplace_back(p);
        s.delimiter = delimiter == "tab" ? '\t' : delimiter.front();
        if (classes > 0) s.class_count = classes;
        return s;
    }
};

struct Outcome {
    ReportDocument doc;
    std::vector<std::pair<fs::path, std::string>> files;
};

const CLI::Validator kOpenPercentile(
    [](std::string& s) -> std::string {
        double v = 0.0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "percentile must be a number";
        }
        return v > 0.0 && v < 100.0 ? "" : "percentile must lie strictly between 0 and 100";
    },
    "(0,100)");

const CLI::Validator kDelimiter(
    [](std::string& s) -> std::string { return s == "tab" || s.size() == 1 ? "" : "delimiter must be one character or 'tab'"; },
    "CHAR");

void add_inputs(CLI::App* sub, InputOptions& in, bool labels, bool features, bool embeddings, bool probs) {
    if (labels) sub->add_option("--labels", in.labels, "CSV with columns id,label")->check(CLI::ExistingFile);
    if (features) sub->add_option("--features", in.features, "CSV with columns id,<features...>")->check(CLI::ExistingFile);
    if (embeddings)
        sub->add_option("--embeddings", in.embeddings, "CSV with columns id,<coordinates...>")->check(CLI::ExistingFile);
    if (probs)
        sub->add_option("--probs", in.probs,
                        "probability file(s): one per epoch (id,<classes...>) or one long file (epoch,id,<classes...>)")
            ->check(CLI::ExistingFile);
    sub->add_option("--delimiter", in.delimiter, "field delimiter")->check(kDelimiter);
    sub->add_option("--classes", in.classes, "class count (default: inferred)")->check(CLI::PositiveNumber);
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw CLI::RequiredError(flag);
}

ReportDocument make_doc(const std::string& command, std::string fingerprint, json config, std::string kind,
                        json payload) {
    ReportDocument d;
    d.command = command;
    d.input_fingerprint = std::move(fingerprint);
    d.generated_at = utc_timestamp();
    d.config = std::move(config);
    d.payload_kind = std::move(kind);
    d.payload = std::move(payload);
    return d;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw io::InputError(p.string(), 0, 0, "cannot open file");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

cartography::CartographyConfig carto_config(const Globals& g, const std::string& split, double fixed_conf,
                                            double fixed_cert) {
    cartography::CartographyConfig c;
    c.flag_percentile = g.percentile;
    c.segment_split = cartography::split_from_string(split);
    c.fixed_confidence_split = fixed_conf;
    c.fixed_certainty_split = fixed_cert;
    return c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dqkit: label-noise detection and annotation-budget sample selection"};
    app.name(args.empty() ? "dqkit" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    Globals g;
    app.add_option("--seed", g.seed, "seed for every randomized step")->capture_default_str();
    app.add_option("--percentile", g.percentile, "flag percentile for the detectors")
        ->check(kOpenPercentile)
        ->capture_default_str();
    app.add_option("--out", g.out, "write the report document here (default: $" + std::string(kOutputDirEnv) +
                                       "/<command>.json, else stdout)");

    std::function<Outcome()> action;
    InputOptions in;

    // generate-blobs
    auto* gen = app.add_subcommand("generate-blobs", "write a synthetic Gaussian-blob dataset");
    std::size_t n_per_class = 0, dim = 2;
    int gen_classes = 4;
    double separation = 4.0;
    std::string features_out, labels_out;
    gen->add_option("--n-per-class", n_per_class)->required()->check(CLI::PositiveNumber);
    gen->add_option("--classes", gen_classes)->capture_default_str()->check(CLI::Range(2, 1 << 20));
    gen->add_option("--dim", dim)->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--separation", separation)->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--features-out", features_out)->required();
    gen->add_option("--labels-out", labels_out)->required();
    gen->callback([&] {
        action = [&] {
            const auto ds = harness::generate_blobs(n_per_class, gen_classes, dim, separation, g.seed);
            json cfg{{"n_per_class", n_per_class}, {"classes", gen_classes}, {"dim", dim},
                     {"separation", separation}, {"seed", g.seed}};
            json payload{{"samples", ds.size()}, {"class_count", ds.class_count()}, {"dimension", ds.dimension()}};
            Outcome o{make_doc("generate-blobs", "", cfg, "dataset", payload), {}};
            o.files.emplace_back(features_out, io::format_matrix_csv(ds.sample_ids(), ds.features(), "f"));
            o.files.emplace_back(labels_out, io::format_labels_csv(ds.sample_ids(), ds.labels()));
            return o;
        };
    });

    // inject-noise
    auto* noise = app.add_subcommand("inject-noise", "flip a fraction of labels uniformly at random");
    double rate = 0.1;
    std::string noisy_out;
    add_inputs(noise, in, true, false, false, false);
    noise->add_option("--rate", rate)->required();
    noise->add_option("--labels-out", noisy_out, "write the noisy labels CSV here");
    noise->callback([&] {
        action = [&] {
            require(in.labels, "--labels");
            const auto spec = in.spec();
            const auto inputs = io::load_inputs(spec);
            const auto rec = harness::inject_noise(inputs.ids, inputs.labels, inputs.class_count, rate, g.seed);
            Outcome o{make_doc("inject-noise", io::fingerprint(spec),
                               {{"rate", rate}, {"seed", g.seed}, {"class_count", inputs.class_count}},
                               "noise_injection", rec),
                      {}};
            if (!noisy_out.empty()) o.files.emplace_back(noisy_out, io::format_labels_csv(rec.ids, rec.noisy_labels));
            return o;
        };
    });

    // train-probe
    auto* train = app.add_subcommand("train-probe", "train the probe classifier and log per-epoch probabilities");
    probe::TrainingConfig tcfg;
    std::string probs_out, embeddings_out;
    add_inputs(train, in, true, true, false, false);
    train->add_option("--hidden", tcfg.hidden_units)->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--max-epochs", tcfg.max_epochs)->capture_default_str()->check(CLI::Range(2, 1 << 20));
    train->add_option("--lr", tcfg.learning_rate)->capture_default_str()->check(CLI::NonNegativeNumber);
    train->add_option("--batch", tcfg.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--min-delta", tcfg.min_delta)->capture_default_str();
    train->add_option("--probs-out", probs_out, "long-format probability history CSV")->required();
    train->add_option("--embeddings-out", embeddings_out, "hidden-layer embeddings CSV");
    train->callback([&] {
        action = [&] {
            require(in.labels, "--labels");
            require(in.features, "--features");
            const auto spec = in.spec();
            const auto inputs = io::load_inputs(spec);
            const auto result = probe::train_probe(*inputs.dataset, tcfg, g.seed);
            json cfg{{"hidden_units", tcfg.hidden_units}, {"max_epochs", tcfg.max_epochs},
                     {"learning_rate", tcfg.learning_rate}, {"batch_size", tcfg.batch_size},
                     {"min_delta", tcfg.min_delta}, {"seed", g.seed}};
            json payload{{"epochs", result.history.epoch_count()},
                         {"training_accuracy", result.training_accuracy},
                         {"stopped_early", result.stopped_early}};
            Outcome o{make_doc("train-probe", io::fingerprint(spec), cfg, "training", payload), {}};
            o.files.emplace_back(probs_out, io::format_history_csv(inputs.ids, result.history));
            if (!embeddings_out.empty())
                o.files.emplace_back(embeddings_out,
                                     io::format_matrix_csv(inputs.ids, result.embeddings.values(), "e"));
            return o;
        };
    });

    // score
    auto* score = app.add_subcommand("score", "confidence/certainty scores and segments per sample");
    std::string split = "median";
    double fixed_conf = 0.5, fixed_cert = 0.5;
    auto add_split = [&](CLI::App* sub) {
        sub->add_option("--split", split, "segment split statistic")
            ->capture_default_str()
            ->check(CLI::IsMember({"median", "mean", "fixed"}));
        sub->add_option("--confidence-split", fixed_conf, "confidence split for --split fixed")->capture_default_str();
        sub->add_option("--certainty-split", fixed_cert, "certainty split for --split fixed")->capture_default_str();
    };
    add_inputs(score, in, true, false, false, true);
    add_split(score);
    score->callback([&] {
        action = [&] {
            require(in.labels, "--labels");
            if (in.probs.empty()) throw CLI::RequiredError("--probs");
            const auto spec = in.spec();
            const auto inputs = io::load_inputs(spec);
            const auto cfg = carto_config(g, split, fixed_conf, fixed_cert);
            const auto scores = cartography::score_and_flag(*inputs.history, inputs.ids, inputs.labels, cfg);
            return Outcome{make_doc("score", io::fingerprint(spec), cartography::config_json(cfg), "sample_scores",
                                    scores),
                           {}};
        };
    });

    // clean
    auto* clean = app.add_subcommand("clean", "rank likely-mislabelled samples");
    std::string method, prune_mode = "count-by-joint", epoch_choice = "final";
    add_inputs(clean, in, true, false, false, true);
    add_split(clean);
    clean->add_option("--method", method)->required()->check(CLI::IsMember({"cartography", "confident-learning"}));
    clean->add_option("--prune-mode", prune_mode, "confident-learning pruning rule")
        ->capture_default_str()
        ->check(CLI::IsMember({"count-by-joint", "percentile-by-score"}));
    clean->add_option("--epoch", epoch_choice, "epoch fed to confident learning")
        ->capture_default_str()
        ->check(CLI::IsMember({"final", "penultimate"}));
    clean->callback([&] {
        action = [&] {
            require(in.labels, "--labels");
            if (in.probs.empty()) throw CLI::RequiredError("--probs");
            const auto spec = in.spec();
            const auto inputs = io::load_inputs(spec);
            FlagReport report;
            report.method = method;
            report.sample_count = inputs.ids.size();
            json cfg;
            if (method == "cartography") {
                const auto c = carto_config(g, split, fixed_conf, fixed_cert);
                const auto scores = cartography::score_dataset(*inputs.history, inputs.ids, inputs.labels, c);
                report.flagged = cartography::flag_noisy(scores, c);
                cfg = cartography::config_json(c);
            } else {
                confident_learning::CLConfig c;
                c.flag_percentile = g.percentile;
                c.prune_mode = confident_learning::prune_mode_from_string(prune_mode);
                c.epoch = confident_learning::epoch_choice_from_string(epoch_choice);
                auto d = confident_learning::detect(*inputs.history, inputs.ids, inputs.labels, c);
                report.flagged = std::move(d.flagged);
                report.joint = std::move(d.joint);
                cfg = confident_learning::config_json(c);
            }
            cfg["method"] = method;
            return Outcome{make_doc("clean", io::fingerprint(spec), cfg, "flags", report), {}};
        };
    });

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "score a flag report against a noise-injection record");
    std::string flags_path, noise_path;
    eval->add_option("--flags", flags_path, "report document written by `clean`")->required()->check(CLI::ExistingFile);
    eval->add_option("--noise", noise_path, "report document written by `inject-noise`")
        ->required()
        ->check(CLI::ExistingFile);
    eval->callback([&] {
        action = [&] {
            const auto flags_doc = parse_document(read_text(flags_path));
            const auto noise_doc = parse_document(read_text(noise_path));
            if (flags_doc.payload_kind != "flags") throw Error(flags_path + " is not a flag report");
            if (noise_doc.payload_kind != "noise_injection") throw Error(noise_path + " is not a noise-injection record");
            const auto flags = flags_doc.payload.get<FlagReport>();
            const auto record = noise_doc.payload.get<harness::NoiseInjectionRecord>();
            std::vector<SampleId> flagged;
            for (const auto& f : flags.flagged) flagged.push_back(f.id);
            const auto report = harness::evaluate_detection(flagged, record);
            const std::string fp = io::fingerprint_files({{"flags", flags_path}, {"noise", noise_path}});
            return Outcome{make_doc("evaluate", fp, {{"method", flags.method}}, "detection", report), {}};
        };
    });

    // select
    auto* sel = app.add_subcommand("select", "choose samples to annotate under a budget");
    std::string strategy, direction = "lowest-first", distance = "euclidean", initial_path, pool_path;
    std::size_t budget = 0;
    add_inputs(sel, in, false, false, true, true);
    sel->add_option("--strategy", strategy)->required()->check(CLI::IsMember({"random", "certainty", "coreset"}));
    sel->add_option("--budget", budget)->required()->check(CLI::PositiveNumber);
    sel->add_option("--initial", initial_path, "id list (header `id`) of already-labelled samples")
        ->check(CLI::ExistingFile);
    sel->add_option("--pool", pool_path, "id list of candidates (default: every other known id)")
        ->check(CLI::ExistingFile);
    sel->add_option("--direction", direction, "certainty order")
        ->capture_default_str()
        ->check(CLI::IsMember({"lowest-first", "highest-first"}));
    sel->add_option("--distance", distance)->capture_default_str()->check(CLI::IsMember({"euclidean", "cosine"}));
    sel->callback([&] {
        action = [&] {
            if (strategy == "coreset") require(in.embeddings, "--embeddings");
            if (strategy == "certainty" && in.probs.empty()) throw CLI::RequiredError("--probs");
            if (in.embeddings.empty() && in.probs.empty() && pool_path.empty())
                throw CLI::RequiredError("--embeddings, --probs or --pool");
            auto spec = in.spec();
            spec.min_epochs = 1;
            io::LoadedInputs inputs;
            const bool have_inputs = !in.embeddings.empty() || !in.probs.empty();
            if (have_inputs) inputs = io::load_inputs(spec);

            std::vector<SampleId> initial;
            if (!initial_path.empty()) initial = io::load_id_list(initial_path, spec.delimiter);
            std::vector<SampleId> pool;
            if (!pool_path.empty()) {
                pool = io::load_id_list(pool_path, spec.delimiter);
            } else {
                const std::unordered_set<SampleId> init(initial.begin(), initial.end());
                for (SampleId id : inputs.ids)
                    if (!init.contains(id)) pool.push_back(id);
            }
            if (have_inputs) {
                const std::unordered_set<SampleId> known(inputs.ids.begin(), inputs.ids.end());
                for (const auto* list : {&initial, &pool})
                    for (SampleId id : *list)
                        if (!known.contains(id)) throw Error("unknown sample id " + std::to_string(id.value));
            }

            coreset::SelectorConfig c;
            c.budget = budget;
            c.distance = coreset::distance_from_string(distance);
            c.certainty_direction = coreset::direction_from_string(direction);
            coreset::SelectionResult result;
            if (strategy == "coreset") {
                result = coreset::k_center_greedy(*inputs.embeddings, initial, pool, c);
            } else if (strategy == "certainty") {
                const auto delta = cartography::compute_certainty(inputs.history->final_epoch());
                result = coreset::certainty_sampling(inputs.ids, delta, pool, c);
            } else {
                result = coreset::random_sampling(pool, budget, g.seed);
            }
            if (!result.coverage_radius && inputs.embeddings) {
                std::vector<SampleId> chosen = initial;
                chosen.insert(chosen.end(), result.selected.begin(), result.selected.end());
                std::vector<SampleId> all = pool;
                all.insert(all.end(), initial.begin(), initial.end());
                if (!chosen.empty())
                    result.coverage_radius = coreset::coverage_radius(*inputs.embeddings, chosen, all, c.distance);
            }
            std::vector<std::pair<std::string, fs::path>> files;
            if (!in.embeddings.empty()) files.emplace_back("embeddings", in.embeddings);
            for (const auto& p : in.probs) files.emplace_back("probabilities", p);
            if (!initial_path.empty()) files.emplace_back("initial", initial_path);
            if (!pool_path.empty()) files.emplace_back("pool", pool_path);
            json cfg{{"strategy", strategy}, {"budget", budget},      {"distance", distance},
                     {"direction", direction}, {"seed", g.seed}};
            return Outcome{make_doc("select", io::fingerprint_files(files), cfg, "selection", result), {}};
        };
    });

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "seed-strategy x expansion-strategy accuracy grid");
    std::string config_path;
    bench->add_option("--config", config_path, "benchmark configuration (JSON)")->required()->check(CLI::ExistingFile);
    bench->callback([&] {
        action = [&] {
            const std::string text = read_text(config_path);
            json j;
            try {
                j = json::parse(text);
            } catch (const json::parse_error& e) {
                throw io::InputError(config_path, 0, 0, std::string("invalid JSON: ") + e.what());
            }
            auto cfg = harness::benchmark_config_from_json(j);
            if (app.count("--seed") > 0) cfg.seed = g.seed;
            const auto report = harness::run_benchmark(cfg);
            return Outcome{make_doc("benchmark", io::fingerprint_files({{"config", config_path}}), json(cfg),
                                    "lift", report),
                           {}};
        };
    });

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("dqkit");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        Outcome o = action();
        const std::string text = render(o.doc);
        fs::path target = g.out;
        if (target.empty()) {
            if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir)
                target = fs::path(dir) / (o.doc.command + ".json");
        }
        for (const auto& [path, contents] : o.files) io::write_file_atomic(path, contents);
        if (target.empty()) out << text;
        else io::write_file_atomic(target, text);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace dq::cli
