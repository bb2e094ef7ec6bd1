#include "hkidqg/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "hkidqg/error.hpp"
#include "hkidqg/io.hpp"
#include "hkidqg/knowsel.hpp"
#include "hkidqg/pyramid.hpp"

namespace hkidqg {

using json = nlohmann::json;

void PipelineConfig::validate() const {
    if (layers < 1 || layers > kMaxLayers) throw ConfigError("layers must be in [1, 8]");
    if (top_m < 0 || top_m > kMaxSelected) throw ConfigError("top_m must be in [0, 8]");
    if (image_dim == 0 || text_dim == 0) throw ConfigError("embedding widths must be positive");
    if (backend != "toy" && backend != "remote") throw ConfigError("backend must be toy or remote");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (batch_size < 1 || grad_accum < 1) throw ConfigError("batch_size and grad_accum must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (warmup_epochs < 0) throw ConfigError("warmup_epochs must be >= 0");
    if (!(lr >= 0) || !(encoder_lr >= 0) || !(weight_decay >= 0)) throw ConfigError("rates must be >= 0");
    if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must be in [0, 1)");
    if (!(init_std > 0)) throw ConfigError("init_std must be positive");
    if (!(remote.timeout_s > 0)) throw ConfigError("timeout must be positive");
    if (remote.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

json config_to_json(const PipelineConfig& c) {
    return {{"layers", c.layers},
            {"top_m", c.top_m},
            {"image_dim", c.image_dim},
            {"text_dim", c.text_dim},
            {"backend", c.backend},
            {"backend_url", c.remote.base_url},
            {"timeout_s", c.remote.timeout_s},
            {"max_in_flight", c.remote.max_in_flight},
            {"retry", c.remote.retry},
            {"seed", c.seed},
            {"workers", c.workers},
            {"record_timings", c.record_timings},
            {"batch_size", c.batch_size},
            {"grad_accum", c.grad_accum},
            {"epochs", c.epochs},
            {"warmup_epochs", c.warmup_epochs},
            {"lr", c.lr},
            {"encoder_lr", c.encoder_lr},
            {"weight_decay", c.weight_decay},
            {"dropout", c.dropout},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"eps", c.eps},
            {"init_std", c.init_std}};
}

void apply_config(PipelineConfig& c, const json& flat) {
    if (!flat.is_object()) throw ConfigError("config must be a flat key/value object");
    for (const auto& [key, v] : flat.items()) {
        try {
            if (key == "layers") c.layers = v.get<int>();
            else if (key == "top_m") c.top_m = v.get<int>();
            else if (key == "image_dim") c.image_dim = v.get<std::size_t>();
            else if (key == "text_dim") c.text_dim = v.get<std::size_t>();
            else if (key == "backend") c.backend = v.get<std::string>();
            else if (key == "backend_url") c.remote.base_url = v.get<std::string>();
            else if (key == "timeout_s") c.remote.timeout_s = v.get<double>();
            else if (key == "max_in_flight") c.remote.max_in_flight = v.get<int>();
            else if (key == "retry") c.remote.retry = v.get<int>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "workers") c.workers = v.get<int>();
            else if (key == "record_timings") c.record_timings = v.get<bool>();
            else if (key == "batch_size") c.batch_size = v.get<int>();
            else if (key == "grad_accum") c.grad_accum = v.get<int>();
            else if (key == "epochs") c.epochs = v.get<int>();
            else if (key == "warmup_epochs") c.warmup_epochs = v.get<int>();
            else if (key == "lr") c.lr = v.get<double>();
            else if (key == "encoder_lr") c.encoder_lr = v.get<double>();
            else if (key == "weight_decay") c.weight_decay = v.get<double>();
            else if (key == "dropout") c.dropout = v.get<double>();
            else if (key == "beta1") c.beta1 = v.get<double>();
            else if (key == "beta2") c.beta2 = v.get<double>();
            else if (key == "eps") c.eps = v.get<double>();
            else if (key == "init_std") c.init_std = v.get<double>();
            else throw ConfigError("unknown config key: " + key);
        } catch (const json::exception& e) {
            throw ConfigError("bad value for " + key + ": " + v.dump() + " (" + e.what() + ")");
        }
    }
}

json parse_flat_toml(const std::string& text) {
    json out = json::object();
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "config line " + std::to_string(lineno);
        // Strip comments outside of strings.
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
            if (line[i] == '#' && !in_str) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') throw ConfigError(where + ": tables are not supported (flat keys only)");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError(where + ": expected key = value");
        if (val.front() == '"') {
            // Basic strings share JSON's escape rules.
            try {
                out[key] = json::parse(val).get<std::string>();
            } catch (const json::exception&) {
                throw ConfigError(where + ": malformed string");
            }
        } else if (val == "true" || val == "false") {
            out[key] = val == "true";
        } else {
            std::string num;
            for (char ch : val)
                if (ch != '_') num += ch;
            char* end = nullptr;
            const long long iv = std::strtoll(num.c_str(), &end, 10);
            if (end != nullptr && *end == '\0') {
                out[key] = iv;
                continue;
            }
            const double dv = std::strtod(num.c_str(), &end);
            if (end == nullptr || *end != '\0') throw ConfigError(where + ": unsupported value: " + val);
            out[key] = dv;
        }
    }
    return out;
}

json read_config_file(const std::string& path) {
    const std::string text = read_file(path);
    if (path.size() >= 5 && path.ends_with(".json")) {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError("config is not valid JSON: " + std::string(e.what()));
        }
    }
    return parse_flat_toml(text);
}

void apply_env_overrides(PipelineConfig& c) {
    if (const char* url = std::getenv("HKIDQG_BACKEND_URL"); url != nullptr && *url != '\0') {
        c.backend = "remote";
        c.remote.base_url = url;
    }
    if (const char* seed = std::getenv("HKIDQG_SEED"); seed != nullptr && *seed != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(seed, &end, 10);
        if (end == nullptr || *end != '\0') throw ConfigError("HKIDQG_SEED must be an integer");
        c.seed = v;
    }
}

Backends make_backends(const PipelineConfig& c) {
    if (c.backend == "remote") return remote_backend(c.remote);
    return toy_backends({c.seed, c.image_dim, c.text_dim});
}

}  // namespace hkidqg
