#include "hkidqg/checkpoint.hpp"

#include "hkidqg/error.hpp"
#include "hkidqg/io.hpp"

namespace hkidqg {

using json = nlohmann::json;

json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.values()}};
}

Matrix matrix_from_json(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

json checkpoint_to_json(const Checkpoint& ck) {
    json params = {{"W_h", matrix_to_json(ck.params.w_h.weights)},
                   {"W_t", matrix_to_json(ck.params.w_t.weights)},
                   {"W_v", matrix_to_json(ck.params.w_v.weights)}};
    json moments = json::object();
    for (const auto& [name, mom] : ck.optimizer.moments) {
        moments[name] = {{"t", mom.t}, {"m", matrix_to_json(mom.m)}, {"v", matrix_to_json(mom.v)}};
    }
    json groups = json::object();
    for (const auto& [name, g] : ck.optimizer.groups) groups[name] = g.base_lr;
    const AdamWConfig& c = ck.optimizer.config;
    return {{"format", "hkidqg-checkpoint"},
            {"version", kCheckpointVersion},
            {"seed", ck.seed},
            {"step", ck.optimizer.step},
            {"rejected_steps", ck.optimizer.rejected_steps},
            {"param_version", ck.params.version},
            {"adamw",
             {{"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}, {"weight_decay", c.weight_decay}}},
            {"groups", groups},
            {"params", params},
            {"moments", moments},
            {"config", ck.config}};
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "hkidqg-checkpoint")
            throw FormatError("not a checkpoint file");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw FormatError("unsupported checkpoint version " + j.at("version").dump());
        Checkpoint ck;
        ck.seed = j.at("seed").get<std::uint64_t>();
        ck.optimizer.step = j.at("step").get<std::uint64_t>();
        ck.optimizer.rejected_steps = j.value("rejected_steps", std::uint64_t{0});
        ck.params.version = j.value("param_version", std::uint64_t{0});
        const json& a = j.at("adamw");
        ck.optimizer.config = {a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                               a.at("eps").get<double>(), a.at("weight_decay").get<double>()};
        ck.optimizer.groups.clear();
        for (const auto& [name, lr] : j.at("groups").items())
            ck.optimizer.groups[name] = {name, lr.get<double>()};
        const json& p = j.at("params");
        ck.params.w_h = {"W_h", matrix_from_json(p.at("W_h"))};
        ck.params.w_t = {"W_t", matrix_from_json(p.at("W_t"))};
        ck.params.w_v = {"W_v", matrix_from_json(p.at("W_v"))};
        for (const auto& [name, mj] : j.at("moments").items()) {
            Moments m;
            m.t = mj.at("t").get<std::uint64_t>();
            m.m = matrix_from_json(mj.at("m"));
            m.v = matrix_from_json(mj.at("v"));
            ck.optimizer.moments[name] = std::move(m);
        }
        ck.config = j.value("config", json::object());
        ck.params.validate();
        return ck;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    write_file_atomic(path, checkpoint_to_json(ck).dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError("checkpoint is not valid JSON: " + std::string(e.what()));
    }
    return checkpoint_from_json(j);
}

}  // namespace hkidqg
