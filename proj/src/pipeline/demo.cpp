#include "hkidqg/demo.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>

#include "hkidqg/error.hpp"
#include "hkidqg/io.hpp"
#include "hkidqg/rng.hpp"
#include "hkidqg/train.hpp"

namespace hkidqg {

namespace {

struct Topic {
    const char* subject;
    const char* course;
    const char* concept_text;
    std::array<const char*, 4> elements;
};

constexpr std::array<Topic, 16> kTopics{{
    {"biology", "ecology", "Ecological interactions", {"mussels", "sea star", "barnacles", "kelp"}},
    {"biology", "ecology", "Food chains", {"grass", "rabbit", "fox", "hawk"}},
    {"biology", "cell biology", "Cell structure", {"nucleus", "cell membrane", "mitochondria", "ribosome"}},
    {"biology", "botany", "Photosynthesis", {"chloroplast", "sunlight", "carbon dioxide", "glucose"}},
    {"earth science", "geology", "Rock cycle", {"magma", "sediment", "igneous rock", "metamorphic rock"}},
    {"earth science", "meteorology", "Water cycle", {"evaporation", "condensation", "precipitation", "runoff"}},
    {"earth science", "astronomy", "Moon phases", {"full moon", "new moon", "crescent", "earth"}},
    {"earth science", "geology", "Plate tectonics", {"mantle", "trench", "crust", "ridge"}},
    {"physics", "mechanics", "Simple machines", {"lever", "fulcrum", "load", "effort"}},
    {"physics", "electricity", "Electric circuits", {"battery", "switch", "bulb", "wire"}},
    {"physics", "optics", "Light refraction", {"prism", "light ray", "spectrum", "lens"}},
    {"physics", "mechanics", "Energy transfer", {"kinetic energy", "potential energy", "pendulum", "friction"}},
    {"chemistry", "matter", "States of matter", {"solid", "liquid", "gas", "melting point"}},
    {"chemistry", "atoms", "Atomic structure", {"proton", "neutron", "electron", "orbital"}},
    {"chemistry", "reactions", "Chemical reactions", {"reactant", "product", "catalyst", "heat"}},
    {"chemistry", "solutions", "Acids and bases", {"acid", "base", "indicator", "salt"}},
}};

constexpr std::array<const char*, 4> kQuestionTemplates{
    "Which part of the diagram shows how the {t} affects the {o}?",
    "What happens to the {o} when the {t} changes in {c}?",
    "How is the {t} connected to the {o} in this diagram?",
    "Why does the {t} matter for the {o} in {c}?",
};

std::string fill(std::string tmpl, const std::string& t, const std::string& o, const std::string& c) {
    auto sub = [&](const std::string& key, const std::string& val) {
        for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key, pos + val.size()))
            tmpl.replace(pos, key.size(), val);
    };
    sub("{t}", t);
    sub("{o}", o);
    std::string lc = c;
    for (char& ch : lc) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    sub("{c}", lc);
    return tmpl;
}

Diagram draw(const std::string& id, Rng& rng) {
    constexpr std::size_t kSize = 48;
    Diagram d(id, kSize, kSize, Rgb{245, 245, 240});
    // Four element blocks, one per quadrant, with jittered bounds and colour.
    for (std::size_t q = 0; q < 4; ++q) {
        const std::size_t r0 = (q / 2) * 24 + rng.uniform_int(1, 6);
        const std::size_t c0 = (q % 2) * 24 + rng.uniform_int(1, 6);
        const std::size_t r1 = r0 + rng.uniform_int(8, 16);
        const std::size_t c1 = c0 + rng.uniform_int(8, 16);
        const Rgb col{static_cast<std::uint8_t>(rng.uniform_int(20, 230)),
                      static_cast<std::uint8_t>(rng.uniform_int(20, 230)),
                      static_cast<std::uint8_t>(rng.uniform_int(20, 230))};
        for (std::size_t r = r0; r < std::min(r1, kSize); ++r)
            for (std::size_t c = c0; c < std::min(c1, kSize); ++c) d.set(r, c, col);
    }
    return d;
}

}  // namespace

DemoFixture make_demo_fixture(std::uint64_t seed) {
    DemoFixture fx;
    Rng rng(seed);
    char buf[32];
    for (std::size_t k = 0; k < kTopics.size(); ++k) {
        const Topic& tp = kTopics[k];
        std::snprintf(buf, sizeof buf, "diagrams/d%02zu.png", k);
        const std::string path = buf;
        fx.diagrams.emplace(path, draw(path, rng));
        const std::vector<std::string> elems(tp.elements.begin(), tp.elements.end());
        for (std::size_t e = 0; e < elems.size(); ++e) {
            DatasetRecord r;
            std::snprintf(buf, sizeof buf, "d%02zu-%zu", k, e);
            r.combination_id = buf;
            r.diagram_path = path;
            r.subject = tp.subject;
            r.course = tp.course;
            r.concept_text = tp.concept_text;
            r.target = elems[e];
            r.question = fill(kQuestionTemplates[e], elems[e], elems[(e + 1) % elems.size()], tp.concept_text);
            r.element_list = elems;
            fx.records.push_back(std::move(r));
        }
    }
    return fx;
}

DiagramSource memory_diagram_source(const std::map<std::string, Diagram>& diagrams) {
    return [&diagrams](const DatasetRecord& r) {
        const auto it = diagrams.find(r.diagram_path);
        if (it == diagrams.end()) throw IoError("diagram not found: " + r.diagram_path);
        return it->second;
    };
}

PipelineConfig demo_config(std::uint64_t seed) {
    PipelineConfig c;
    c.seed = seed;
    c.batch_size = 8;
    c.grad_accum = 1;
    c.lr = 1e-2;
    return c;
}

std::string loss_curve_csv(const std::vector<double>& losses) {
    std::string s = "epoch,loss\n";
    char buf[64];
    for (std::size_t e = 0; e < losses.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e, losses[e]);
        s += buf;
    }
    return s;
}

DemoOutputs run_demo(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (cfg.backend != "toy") throw ConfigError("demo runs with toy backends only");
    const DemoFixture fx = make_demo_fixture(cfg.seed);
    const Backends backends = memoize_backends(make_backends(cfg));
    const DiagramSource source = memory_diagram_source(fx.diagrams);

    const TrainResult tr = toy_train(fx.records, cfg, backends, source);
    const auto runs = run_all(fx.records, cfg, backends, tr.params, source);

    DemoOutputs out;
    out.runs_jsonl = runs_to_jsonl(runs, cfg);
    nlohmann::json rep = report_to_json(evaluate_runs(runs, fx.records));
    rep["config"] = config_to_json(cfg);
    out.report_json = rep.dump(2) + "\n";
    out.loss_csv = loss_curve_csv(tr.epoch_losses);
    for (const auto& r : runs) out.failed += r.ok ? 0 : 1;

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(fs::path(out_dir) / "diagrams");
        for (const auto& [path, d] : fx.diagrams) save_png(d, (fs::path(out_dir) / path).string());
        save_dataset((fs::path(out_dir) / "data.jsonl").string(), fx.records);
        write_file_atomic((fs::path(out_dir) / "runs.jsonl").string(), out.runs_jsonl);
        write_file_atomic((fs::path(out_dir) / "report.json").string(), out.report_json);
        write_file_atomic((fs::path(out_dir) / "loss.csv").string(), out.loss_csv);
    }
    return out;
}

}  // namespace hkidqg
