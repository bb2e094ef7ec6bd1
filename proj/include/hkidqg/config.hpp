#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hkidqg/backends.hpp"

namespace hkidqg {

/// Resolved run configuration. Defaults follow the published best setting
/// (3 pyramid layers, 4 knowledge sentences) and training recipe (AdamW,
/// 5e-5 / 1e-5, 20 epochs with 2 warmup, batch 32, accumulation 4, decay
/// 0.01, dropout 0.1).
struct PipelineConfig {
    int layers = 3;
    int top_m = 4;
    std::size_t image_dim = 16;
    std::size_t text_dim = 16;
    std::string backend = "toy";  // "toy" or "remote"
    RemoteBackendConfig remote;
    std::uint64_t seed = 7;
    int workers = 1;
    bool record_timings = false;

    int batch_size = 32;
    int grad_accum = 4;
    int epochs = 20;
    int warmup_epochs = 2;
    double lr = 5e-5;
    double encoder_lr = 1e-5;
    double weight_decay = 0.01;
    double dropout = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double init_std = 0.02;

    void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& c);

/// Applies keys from a flat JSON object; unknown keys raise ConfigError.
void apply_config(PipelineConfig& c, const nlohmann::json& flat);

/// Parses a flat config file. ".json" files are JSON; anything else is read
/// as flat TOML: `key = value` lines with strings, integers, floats and
/// booleans, '#' comments, no tables.
nlohmann::json read_config_file(const std::string& path);
nlohmann::json parse_flat_toml(const std::string& text);

/// HKIDQG_BACKEND_URL selects the remote backend at that URL;
/// HKIDQG_SEED overrides the seed.
void apply_env_overrides(PipelineConfig& c);

Backends make_backends(const PipelineConfig& c);

}  // namespace hkidqg
