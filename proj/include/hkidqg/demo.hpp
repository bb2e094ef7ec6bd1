#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hkidqg/config.hpp"
#include "hkidqg/dataset.hpp"
#include "hkidqg/image.hpp"
#include "hkidqg/pipeline.hpp"

namespace hkidqg {

/// Synthetic corpus: 16 diagrams of coloured element blocks, 4 records each.
struct DemoFixture {
    std::vector<DatasetRecord> records;
    std::map<std::string, Diagram> diagrams;  // keyed by diagram_path
};

DemoFixture make_demo_fixture(std::uint64_t seed = 7);

DiagramSource memory_diagram_source(const std::map<std::string, Diagram>& diagrams);

/// Settings for the demo: toy backends, and a learning rate and batch size
/// suited to a 64-record corpus instead of the full-scale defaults.
PipelineConfig demo_config(std::uint64_t seed = 7);

struct DemoOutputs {
    std::string runs_jsonl;
    std::string report_json;
    std::string loss_csv;
    std::size_t failed = 0;
};

/// Trains on the fixture, generates every record and scores the result.
/// When out_dir is non-empty the fixture (data.jsonl, diagrams/) and the
/// outputs (runs.jsonl, report.json, loss.csv) are written there.
DemoOutputs run_demo(const PipelineConfig& cfg, const std::string& out_dir = {});

std::string loss_curve_csv(const std::vector<double>& losses);

}  // namespace hkidqg
