#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hkidqg/backends.hpp"
#include "hkidqg/config.hpp"
#include "hkidqg/dataset.hpp"
#include "hkidqg/fusion.hpp"
#include "hkidqg/image.hpp"
#include "hkidqg/knowsel.hpp"
#include "hkidqg/metrics.hpp"
#include "hkidqg/pyramid.hpp"

namespace hkidqg {

/// Supplies the pixels for a record; throws IoError if unavailable.
using DiagramSource = std::function<Diagram(const DatasetRecord&)>;

/// Loads diagram files relative to the dataset directory.
DiagramSource file_diagram_source(std::string base_dir);

/// Parameter-independent encodings of one record: the pyramid, every patch's
/// pooled embedding (grouped by layer) and the pooled constraint embeddings.
struct EncodedRecord {
    Diagram diagram;
    PatchPyramid pyramid;
    std::vector<Matrix> layer_embs;
    Vector e_target;
    Vector e_concept;
};

EncodedRecord encode_record(const DatasetRecord& rec, Diagram diagram, const PipelineConfig& cfg,
                            const Backends& backends);

/// Everything the fusion stage consumes, plus the audit trail that leads to it.
struct FusionInputs {
    SelectedPatches selected;
    std::vector<KnowledgeSentence> extracted;
    SelectedKnowledge chosen;
    std::string knowsel_prompt;
    std::string qg_prompt;
    Matrix patch_embs;  // one row per selected patch
    Matrix h_t;         // prompt token encodings
};

/// Patch selection, knowledge extraction and selection, prompt encoding.
FusionInputs prepare_fusion(const DatasetRecord& rec, const EncodedRecord& enc,
                            const PipelineConfig& cfg, const Backends& backends,
                            const FusionParams& params);

struct StageTimings {
    double extract_ms = 0.0;
    double select_ms = 0.0;
    double fuse_ms = 0.0;
};

struct RunRecord {
    std::string combination_id;
    bool ok = false;
    std::string failed_stage;  // "load", "extract", "select" or "fuse"
    std::string error;
    SelectedPatches selected;
    std::vector<KnowledgeSentence> extracted;
    SelectedKnowledge chosen;
    std::string knowsel_prompt;
    std::string qg_prompt;
    std::string question;
    std::optional<StageTimings> timings;
};

nlohmann::json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Runs the three stages on one record. Failures are captured in the result
/// with the stage that raised them; nothing is thrown for backend errors.
RunRecord run_pipeline(const DatasetRecord& rec, const PipelineConfig& cfg,
                       const Backends& backends, const FusionParams& params,
                       const DiagramSource& source);

/// Runs every record (cfg.workers threads) and returns results ordered by
/// combination_id.
std::vector<RunRecord> run_all(const std::vector<DatasetRecord>& records,
                               const PipelineConfig& cfg, const Backends& backends,
                               const FusionParams& params, const DiagramSource& source);

/// runs.jsonl layout: a header line {"kind":"header","config":...} followed by
/// one {"kind":"run",...} line per record.
std::string runs_to_jsonl(const std::vector<RunRecord>& runs, const PipelineConfig& cfg);

struct RunsFile {
    nlohmann::json config;
    std::vector<RunRecord> runs;
};

RunsFile read_runs_jsonl(const std::string& path);

/// Pairs generated questions with their ground truth; records without a
/// successful run count against coverage.
MetricReport evaluate_runs(const std::vector<RunRecord>& runs,
                           const std::vector<DatasetRecord>& records);

}  // namespace hkidqg
