#include "hkidqg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <thread>

#include "hkidqg/error.hpp"

namespace hkidqg {

using json = nlohmann::json;

DiagramSource file_diagram_source(std::string base_dir) {
    return [base = std::move(base_dir)](const DatasetRecord& r) {
        return load_diagram(resolve_diagram_path(base, r.diagram_path));
    };
}

EncodedRecord encode_record(const DatasetRecord& rec, Diagram diagram, const PipelineConfig& cfg,
                            const Backends& backends) {
    EncodedRecord enc;
    enc.pyramid = decompose(diagram.height(), diagram.width(), cfg.layers);
    const std::size_t dv = backends.image->dim();
    for (int l = 1; l <= cfg.layers; ++l) {
        const auto cells = enc.pyramid.layer(l);
        Matrix m(cells.size(), dv);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const Vector f = backends.image->encode(crop(diagram, cells[k]));
            if (f.size() != dv) throw ShapeError("image encoder returned wrong width");
            std::copy(f.begin(), f.end(), m.row(k).begin());
        }
        enc.layer_embs.push_back(std::move(m));
    }
    enc.e_target = backends.text->encode_pooled(rec.target);
    enc.e_concept = backends.text->encode_pooled(rec.concept_text);
    enc.diagram = std::move(diagram);
    return enc;
}

namespace {

void select_and_extract(const DatasetRecord& rec, const EncodedRecord& enc,
                        const Backends& backends, const FusionParams& params, FusionInputs& in) {
    const auto scores = score_patches(enc.layer_embs, params.w_h.weights, enc.e_target, enc.e_concept);
    in.selected = select_patches(enc.pyramid, scores);

    in.patch_embs = Matrix(in.selected.size(), params.image_dim());
    for (std::size_t k = 0; k < in.selected.size(); ++k) {
        const PatchRef& p = in.selected[k].patch;
        const auto idx = static_cast<std::size_t>((p.row - 1) * p.layer + (p.col - 1));
        const auto src = enc.layer_embs[static_cast<std::size_t>(p.layer - 1)].row(idx);
        std::copy(src.begin(), src.end(), in.patch_embs.row(k).begin());
        for (auto& s : backends.vlm->extract(crop(enc.diagram, p), rec.target, rec.concept_text))
            in.extracted.push_back({p.layer, std::move(s)});
    }
}

void select_knowledge(const DatasetRecord& rec, const PipelineConfig& cfg,
                      const Backends& backends, FusionInputs& in) {
    in.knowsel_prompt = build_knowsel_prompt(rec.target, rec.concept_text);
    const KnowledgeSet ks = embed_knowledge(in.extracted, *backends.text);
    const Matrix h_tc = backends.text->encode_tokens(in.knowsel_prompt);
    in.chosen = select_top_m(attention_matrix(ks.embeddings, h_tc), ks, cfg.top_m);
    in.qg_prompt = build_qg_prompt(rec.target, rec.concept_text, in.chosen);
}

}  // namespace

FusionInputs prepare_fusion(const DatasetRecord& rec, const EncodedRecord& enc,
                            const PipelineConfig& cfg, const Backends& backends,
                            const FusionParams& params) {
    FusionInputs in;
    select_and_extract(rec, enc, backends, params, in);
    select_knowledge(rec, cfg, backends, in);
    in.h_t = backends.text->encode_tokens(in.qg_prompt);
    return in;
}

namespace {

json patch_json(const SelectedPatch& s) {
    const Rect& r = s.patch.rect;
    return {{"layer", s.patch.layer},
            {"row", s.patch.row},
            {"col", s.patch.col},
            {"rect", {r.row_start, r.row_end, r.col_start, r.col_end}},
            {"score", s.score}};
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

json run_record_to_json(const RunRecord& r) {
    json patches = json::array();
    for (const auto& s : r.selected) patches.push_back(patch_json(s));
    json extracted = json::array();
    for (const auto& k : r.extracted) extracted.push_back({{"layer", k.layer}, {"text", k.text}});
    json chosen = json::array();
    for (const auto& k : r.chosen)
        chosen.push_back({{"index", k.index}, {"layer", k.layer}, {"text", k.text}, {"score", k.score}});
    json j = {{"kind", "run"},
              {"combination_id", r.combination_id},
              {"ok", r.ok},
              {"selected_patches", patches},
              {"extracted_sentences", extracted},
              {"selected_sentences", chosen},
              {"knowsel_prompt", r.knowsel_prompt},
              {"qg_prompt", r.qg_prompt},
              {"question", r.question}};
    if (!r.ok) {
        j["failed_stage"] = r.failed_stage;
        j["error"] = r.error;
    }
    if (r.timings) {
        j["timings_ms"] = {{"extract", r.timings->extract_ms},
                           {"select", r.timings->select_ms},
                           {"fuse", r.timings->fuse_ms}};
    }
    return j;
}

RunRecord run_record_from_json(const json& j) {
    RunRecord r;
    r.combination_id = j.at("combination_id").get<std::string>();
    r.ok = j.at("ok").get<bool>();
    r.failed_stage = j.value("failed_stage", "");
    r.error = j.value("error", "");
    r.question = j.value("question", "");
    r.knowsel_prompt = j.value("knowsel_prompt", "");
    r.qg_prompt = j.value("qg_prompt", "");
    for (const auto& p : j.value("selected_patches", json::array())) {
        SelectedPatch s;
        s.patch.layer = p.at("layer").get<int>();
        s.patch.row = p.at("row").get<int>();
        s.patch.col = p.at("col").get<int>();
        const auto rect = p.at("rect").get<std::vector<std::size_t>>();
        if (rect.size() == 4) s.patch.rect = {rect[0], rect[1], rect[2], rect[3]};
        s.score = p.at("score").get<double>();
        r.selected.push_back(s);
    }
    for (const auto& k : j.value("extracted_sentences", json::array()))
        r.extracted.push_back({k.at("layer").get<int>(), k.at("text").get<std::string>()});
    for (const auto& k : j.value("selected_sentences", json::array()))
        r.chosen.push_back({k.at("index").get<std::size_t>(), k.at("layer").get<int>(),
                            k.at("text").get<std::string>(), k.at("score").get<double>()});
    return r;
}

RunRecord run_pipeline(const DatasetRecord& rec, const PipelineConfig& cfg,
                       const Backends& backends, const FusionParams& params,
                       const DiagramSource& source) {
    RunRecord out;
    out.combination_id = rec.combination_id;
    StageTimings timings;
    std::string stage = "load";
    try {
        Diagram d = source(rec);
        stage = "extract";
        auto t0 = std::chrono::steady_clock::now();
        const EncodedRecord enc = encode_record(rec, std::move(d), cfg, backends);
        FusionInputs in;
        select_and_extract(rec, enc, backends, params, in);
        out.selected = in.selected;
        out.extracted = in.extracted;
        timings.extract_ms = ms_since(t0);

        stage = "select";
        t0 = std::chrono::steady_clock::now();
        select_knowledge(rec, cfg, backends, in);
        out.chosen = in.chosen;
        out.knowsel_prompt = in.knowsel_prompt;
        out.qg_prompt = in.qg_prompt;
        timings.select_ms = ms_since(t0);

        stage = "fuse";
        t0 = std::chrono::steady_clock::now();
        in.h_t = backends.text->encode_tokens(in.qg_prompt);
        const FusionTrace tr = fusion_forward(params, in.patch_embs, in.h_t);
        out.question = backends.decoder->decode(tr.h_fuse, rec.target);
        timings.fuse_ms = ms_since(t0);
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.failed_stage = stage;
        out.error = e.what();
    }
    if (cfg.record_timings) out.timings = timings;
    return out;
}

std::vector<RunRecord> run_all(const std::vector<DatasetRecord>& records,
                               const PipelineConfig& cfg, const Backends& backends,
                               const FusionParams& params, const DiagramSource& source) {
    std::vector<RunRecord> out(records.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++)
            out[i] = run_pipeline(records[i], cfg, backends, params, source);
    };
    const auto n = static_cast<std::size_t>(std::max(1, cfg.workers));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    std::stable_sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) {
        return a.combination_id < b.combination_id;
    });
    return out;
}

std::string runs_to_jsonl(const std::vector<RunRecord>& runs, const PipelineConfig& cfg) {
    std::string s = json{{"kind", "header"}, {"config", config_to_json(cfg)}}.dump() + "\n";
    for (const auto& r : runs) s += run_record_to_json(r).dump() + "\n";
    return s;
}

RunsFile read_runs_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read runs file: " + path);
    RunsFile f;
    f.config = json::object();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const std::string kind = j.value("kind", "run");
            if (kind == "header") f.config = j.value("config", json::object());
            else f.runs.push_back(run_record_from_json(j));
        } catch (const json::exception& e) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return f;
}

MetricReport evaluate_runs(const std::vector<RunRecord>& runs,
                           const std::vector<DatasetRecord>& records) {
    std::map<std::string, const RunRecord*> by_id;
    for (const auto& r : runs) by_id[r.combination_id] = &r;
    std::vector<EvalPair> pairs;
    std::vector<std::string> failed;
    for (const auto& rec : records) {
        const auto it = by_id.find(rec.combination_id);
        if (it == by_id.end() || !it->second->ok) {
            failed.push_back(rec.combination_id);
            continue;
        }
        pairs.push_back({rec.combination_id, it->second->question, {rec.question}, rec.element_list});
    }
    if (pairs.empty()) throw ValidationError("evaluate: no successfully generated records to score");
    MetricReport rep = evaluate_run(pairs);
    rep.total_records = records.size();
    rep.failed_ids = std::move(failed);
    return rep;
}

}  // namespace hkidqg
