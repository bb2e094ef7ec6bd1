// Command-line front end: ingest, stats, split, generate, train, evaluate,
// gradcheck, demo.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hkidqg/checkpoint.hpp"
#include "hkidqg/config.hpp"
#include "hkidqg/dataset.hpp"
#include "hkidqg/demo.hpp"
#include "hkidqg/error.hpp"
#include "hkidqg/gradcheck.hpp"
#include "hkidqg/io.hpp"
#include "hkidqg/pipeline.hpp"
#include "hkidqg/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hkidqg;

namespace {

struct ConfigFlags {
    std::string path;
    std::optional<std::uint64_t> seed;
    std::optional<int> layers;
    std::optional<int> top_m;
    std::optional<int> workers;
    std::optional<int> epochs;
    std::optional<std::string> backend_url;

    void add_to(CLI::App* app) {
        app->add_option("--config", path, "flat TOML or JSON config file");
        app->add_option("--seed", seed, "random seed");
        app->add_option("--layers", layers, "pyramid layers n");
        app->add_option("--top-m", top_m, "knowledge sentences m");
        app->add_option("--workers", workers, "record-level worker threads");
        app->add_option("--epochs", epochs, "training epochs");
        app->add_option("--backend-url", backend_url, "use the remote backend at this URL");
    }

    // Defaults, then the file, then environment, then flags.
    PipelineConfig resolve() const {
        PipelineConfig c;
        if (!path.empty()) apply_config(c, read_config_file(path));
        apply_env_overrides(c);
        if (seed) c.seed = *seed;
        if (layers) c.layers = *layers;
        if (top_m) c.top_m = *top_m;
        if (workers) c.workers = *workers;
        if (epochs) c.epochs = *epochs;
        if (backend_url) {
            c.backend = "remote";
            c.remote.base_url = *backend_url;
        }
        c.validate();
        return c;
    }
};

// Remote servers advertise their widths; the parameters must follow them.
Backends connect(PipelineConfig& cfg) {
    Backends b = make_backends(cfg);
    cfg.image_dim = b.image->dim();
    cfg.text_dim = b.text->dim();
    return b;
}

LoadResult load(const std::string& path, bool strict = false) {
    LoadOptions o;
    o.strict = strict;
    LoadResult r = load_dataset(path, o);
    for (const auto& issue : r.report.issues)
        std::cerr << path << ":" << issue.line << ": " << (issue.fatal ? "rejected: " : "warning: ")
                  << issue.reason << "\n";
    return r;
}

void write_out(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    write_file_atomic(path, content);
}

int report_failures(const std::vector<RunRecord>& runs) {
    int failed = 0;
    for (const auto& r : runs) {
        if (r.ok) continue;
        ++failed;
        std::cerr << "failed " << r.combination_id << " [" << r.failed_stage << "]: " << r.error << "\n";
    }
    if (failed > 0) std::cerr << failed << " of " << runs.size() << " records failed\n";
    return failed > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diagram question generation pipeline"};
    app.require_subcommand(1);

    std::string data, out, runs_path, checkpoint, overrides, loss_csv, json_out;
    bool strict = false;
    std::uint64_t seed = 0;
    int trials = 50;
    ConfigFlags flags;

    auto* ingest = app.add_subcommand("ingest", "validate a dataset file");
    ingest->add_option("data", data, "dataset JSONL")->required();
    ingest->add_flag("--strict", strict, "fail on any rejected line");
    ingest->add_option("--out", out, "write the validation report here");

    auto* stats = app.add_subcommand("stats", "corpus statistics");
    stats->add_option("data", data, "dataset JSONL")->required();
    stats->add_option("--json", json_out, "also write the JSON report here");
    auto* stats_seed = stats->add_option("--split-seed", seed, "include per-split counts for this seed");

    auto* split = app.add_subcommand("split", "diagram-level train/val/test manifest");
    split->add_option("data", data, "dataset JSONL")->required();
    split->add_option("--seed", seed, "split seed")->required();
    split->add_option("--overrides", overrides, "JSON map of diagram -> split");
    split->add_option("--out", out, "manifest path (stdout if omitted)");

    auto* generate = app.add_subcommand("generate", "run the pipeline on every record");
    generate->add_option("data", data, "dataset JSONL")->required();
    generate->add_option("--out", out, "runs JSONL")->required();
    generate->add_option("--checkpoint", checkpoint, "trained parameters");
    flags.add_to(generate);

    auto* train = app.add_subcommand("train", "toy-scale training of the fusion maps");
    train->add_option("data", data, "dataset JSONL")->required();
    train->add_option("--checkpoint", checkpoint, "checkpoint to write")->required();
    train->add_option("--loss-csv", loss_csv, "loss curve (default: <checkpoint>.loss.csv)");
    flags.add_to(train);

    auto* evaluate = app.add_subcommand("evaluate", "score generated questions");
    evaluate->add_option("--runs", runs_path, "runs JSONL")->required();
    evaluate->add_option("--data", data, "dataset JSONL")->required();
    evaluate->add_option("--out", out, "report JSON")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of fusion gradients");
    gradcheck->add_option("--seed", seed, "seed");
    gradcheck->add_option("--trials", trials, "random instances")->check(CLI::PositiveNumber);

    auto* demo = app.add_subcommand("demo", "synthetic end-to-end run");
    demo->add_option("--out", out, "output directory")->default_val("demo_out");
    demo->add_option("--seed", seed, "seed")->default_val(7);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) {
            try {
                const LoadResult r = load(data, strict);
                write_out(out, validation_to_json(r.report).dump(2) + "\n");
                std::cerr << r.report.accepted << " accepted, " << r.report.rejected << " rejected\n";
            } catch (const ValidationError& e) {
                std::cerr << "strict validation failed: " << e.what() << "\n";
                return 1;
            }
            return 0;
        }
        if (*stats) {
            const LoadResult r = load(data);
            std::optional<std::vector<Split>> splits;
            if (stats_seed->count() > 0) splits = split_records(r.records, {.seed = seed});
            const CorpusStats s = corpus_stats(r.records, splits ? &*splits : nullptr);
            std::cout << stats_to_text(s);
            if (!json_out.empty()) write_out(json_out, stats_to_json(s).dump(2) + "\n");
            return 0;
        }
        if (*split) {
            const LoadResult r = load(data);
            SplitOptions o;
            o.seed = seed;
            if (!overrides.empty()) o.overrides = load_split_overrides(overrides);
            const auto splits = split_records(r.records, o);
            json diagrams = json::object(), records = json::object();
            std::map<std::string, std::size_t> counts{{"train", 0}, {"val", 0}, {"test", 0}};
            for (std::size_t i = 0; i < r.records.size(); ++i) {
                const char* name = split_name(splits[i]);
                records[r.records[i].combination_id] = name;
                if (!diagrams.contains(r.records[i].diagram_path)) ++counts[name];
                diagrams[r.records[i].diagram_path] = name;
            }
            const json manifest = {{"seed", seed},
                                   {"proportions", {{"train", o.train}, {"val", o.val}, {"test", 1.0 - o.train - o.val}}},
                                   {"diagram_counts", counts},
                                   {"diagrams", diagrams},
                                   {"records", records}};
            write_out(out, manifest.dump(2) + "\n");
            return 0;
        }
        if (*generate) {
            PipelineConfig cfg = flags.resolve();
            const LoadResult r = load(data);
            const Backends b = connect(cfg);
            FusionParams params = checkpoint.empty() ? initial_params(cfg) : load_checkpoint(checkpoint).params;
            if (params.image_dim() != cfg.image_dim || params.text_dim() != cfg.text_dim)
                throw ConfigError("checkpoint widths do not match the backend");
            const auto runs = run_all(r.records, cfg, b, params, file_diagram_source(r.base_dir));
            write_out(out, runs_to_jsonl(runs, cfg));
            return report_failures(runs);
        }
        if (*train) {
            PipelineConfig cfg = flags.resolve();
            const LoadResult r = load(data);
            const Backends b = connect(cfg);
            const TrainResult tr = toy_train(r.records, cfg, b, file_diagram_source(r.base_dir));
            Checkpoint ck;
            ck.seed = cfg.seed;
            ck.params = tr.params;
            ck.optimizer = tr.optimizer;
            ck.config = config_to_json(cfg);
            save_checkpoint(checkpoint, ck);
            const std::string csv = loss_csv.empty() ? checkpoint + ".loss.csv" : loss_csv;
            write_out(csv, loss_curve_csv(tr.epoch_losses));
            std::cout << "loss " << tr.epoch_losses.front() << " -> " << tr.epoch_losses.back() << " over "
                      << cfg.epochs << " epochs, " << tr.optimizer.step << " steps ("
                      << tr.optimizer.rejected_steps << " rejected)\n";
            return 0;
        }
        if (*evaluate) {
            const RunsFile rf = read_runs_jsonl(runs_path);
            const LoadResult r = load(data);
            const MetricReport rep = evaluate_runs(rf.runs, r.records);
            json j = report_to_json(rep);
            j["config"] = rf.config;
            write_out(out, j.dump(2) + "\n");
            std::cout << report_to_text(rep);
            for (const auto& id : rep.failed_ids) std::cerr << "not generated: " << id << "\n";
            return rep.failed_ids.empty() ? 0 : 1;
        }
        if (*gradcheck) {
            const auto rows = gradcheck_fusion({.seed = seed, .trials = trials});
            std::cout << gradcheck_table(rows);
            std::size_t passed = 0;
            for (const auto& row : rows) passed += row.pass ? 1 : 0;
            std::cout << passed << "/" << rows.size() << " passed\n";
            return passed == rows.size() ? 0 : 1;
        }
        if (*demo) {
            const DemoOutputs d = run_demo(demo_config(seed), out);
            std::cout << "wrote " << out << "/{data.jsonl,diagrams/,runs.jsonl,report.json,loss.csv}\n";
            return d.failed == 0 ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
