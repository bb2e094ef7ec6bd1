#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hkidqg/fusion.hpp"
#include "hkidqg/optim.hpp"

namespace hkidqg {

constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    std::uint64_t seed = 0;
    FusionParams params;
    OptimizerState optimizer;
    nlohmann::json config = nlohmann::json::object();
};

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

// JSON container written via write_file_atomic.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hkidqg
