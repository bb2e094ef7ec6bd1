#include <chrono>
#include <cmath>
#include <semaphore>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hkidqg/backends.hpp"

namespace hkidqg {

using json = nlohmann::json;

namespace {

constexpr std::string_view kB64 =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string excerpt(std::string_view body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return std::string(body);
    return std::string(body.substr(0, kMax)) + "...";
}

// Shared by the four adapters: connection settings, the in-flight limiter and
// the advertised dimensions.
class RemoteSession {
public:
    explicit RemoteSession(RemoteBackendConfig cfg)
        : cfg_(std::move(cfg)), slots_(cfg_.max_in_flight) {
        if (!(cfg_.timeout_s > 0.0)) throw ConfigError("remote timeout must be positive");
        if (cfg_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
        if (cfg_.retry < 0) throw ConfigError("retry count must be >= 0");
    }

    json get(const std::string& path) { return request(path, nullptr); }
    json post(const std::string& path, const json& body) { return request(path, &body); }

    RemoteMeta meta;

private:
    json request(const std::string& path, const json* body) {
        const int attempts = cfg_.retry + 1;
        std::string last_error;
        int last_status = 0;
        const std::string payload = body != nullptr ? body->dump() : std::string();
        for (int attempt = 1; attempt <= attempts; ++attempt) {
            slots_.acquire();
            httplib::Result res = [&] {
                httplib::Client cli(cfg_.base_url);
                const auto us = std::chrono::microseconds(
                    static_cast<std::int64_t>(cfg_.timeout_s * 1e6));
                cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(us).count(),
                                           (us % std::chrono::seconds(1)).count());
                cli.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(us).count(),
                                     (us % std::chrono::seconds(1)).count());
                cli.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(us).count(),
                                      (us % std::chrono::seconds(1)).count());
                return body != nullptr ? cli.Post(path, payload, "application/json")
                                       : cli.Get(path);
            }();
            slots_.release();

            if (!res) {
                last_error = httplib::to_string(res.error());
                last_status = 0;
                continue;
            }
            if (res->status >= 200 && res->status < 300) {
                try {
                    return json::parse(res->body);
                } catch (const json::exception& e) {
                    throw ProtocolError(path + ": malformed JSON response: " + e.what(),
                                        excerpt(res->body));
                }
            }
            last_status = res->status;
            last_error = "HTTP " + std::to_string(res->status);
            // Client errors will not improve on retry.
            if (res->status < 500 && res->status != 429) break;
        }
        if (last_status != 0) {
            throw BackendError(path + ": backend returned " + last_error, last_status);
        }
        throw TimeoutError(path + ": request failed after " + std::to_string(attempts) +
                               " attempt(s): " + last_error,
                           attempts);
    }

    RemoteBackendConfig cfg_;
    std::counting_semaphore<> slots_;
};

Vector parse_vector(const json& j, const char* path, std::size_t expect_dim) {
    if (!j.is_array()) throw ProtocolError(std::string(path) + ": expected an array", excerpt(j.dump()));
    Vector v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) {
            throw ProtocolError(std::string(path) + ": non-numeric embedding entry",
                                excerpt(j.dump()));
        }
        const double d = x.get<double>();
        if (!std::isfinite(d)) {
            throw ProtocolError(std::string(path) + ": non-finite embedding entry",
                                excerpt(j.dump()));
        }
        v.push_back(d);
    }
    if (expect_dim != 0 && v.size() != expect_dim) {
        throw ProtocolError(std::string(path) + ": embedding has dimension " +
                                std::to_string(v.size()) + ", server advertised " +
                                std::to_string(expect_dim),
                            excerpt(j.dump()));
    }
    return v;
}

const json& field(const json& body, const char* name, const char* path) {
    if (!body.is_object() || !body.contains(name)) {
        throw ProtocolError(std::string(path) + ": response lacks \"" + name + "\"",
                            excerpt(body.dump()));
    }
    return body.at(name);
}

class RemoteImageEncoder final : public ImageEncoder {
public:
    explicit RemoteImageEncoder(std::shared_ptr<RemoteSession> s) : s_(std::move(s)) {}
    std::size_t dim() const override { return s_->meta.image_dim; }

    Vector encode(const Diagram& image) const override {
        const json body = {{"image_png_b64", base64_encode(encode_png(image))}};
        const json res = s_->post("/encode_image", body);
        return parse_vector(field(res, "embedding", "/encode_image"), "/encode_image", dim());
    }

private:
    std::shared_ptr<RemoteSession> s_;
};

class RemoteTextEncoder final : public TextEncoder {
public:
    explicit RemoteTextEncoder(std::shared_ptr<RemoteSession> s) : s_(std::move(s)) {}
    std::size_t dim() const override { return s_->meta.text_dim; }

    Matrix encode_tokens(std::string_view text) const override {
        const json res = s_->post("/encode_text", {{"text", text}, {"mode", "tokens"}});
        const json& rows = field(res, "embeddings", "/encode_text");
        if (!rows.is_array()) throw ProtocolError("/encode_text: expected a list of rows", excerpt(res.dump()));
        const std::size_t n = std::min(rows.size(), kMaxInputTokens);
        Matrix m(n, dim());
        for (std::size_t r = 0; r < n; ++r) {
            const Vector v = parse_vector(rows[r], "/encode_text", dim());
            std::copy(v.begin(), v.end(), m.row(r).begin());
        }
        return m;
    }

    Vector encode_pooled(std::string_view text) const override {
        const json res = s_->post("/encode_text", {{"text", text}, {"mode", "pooled"}});
        return parse_vector(field(res, "embedding", "/encode_text"), "/encode_text", dim());
    }

private:
    std::shared_ptr<RemoteSession> s_;
};

class RemoteVlm final : public KnowledgeVLM {
public:
    explicit RemoteVlm(std::shared_ptr<RemoteSession> s) : s_(std::move(s)) {}

    std::vector<std::string> extract(const Diagram& patch, const std::string& target,
                                     const std::string& concept_text) const override {
        const json body = {{"image_png_b64", base64_encode(encode_png(patch))},
                           {"target", target},
                           {"concept", concept_text}};
        const json res = s_->post("/extract", body);
        const json& p = field(res, "paragraph", "/extract");
        if (!p.is_string()) throw ProtocolError("/extract: paragraph must be a string", excerpt(res.dump()));
        return split_sentences(p.get<std::string>());
    }

private:
    std::shared_ptr<RemoteSession> s_;
};

class RemoteDecoder final : public QuestionDecoder {
public:
    explicit RemoteDecoder(std::shared_ptr<RemoteSession> s) : s_(std::move(s)) {}

    std::string decode(const Matrix& fused, const std::string& target) const override {
        json rows = json::array();
        for (std::size_t r = 0; r < fused.rows(); ++r)
            rows.push_back(std::vector<double>(fused.row(r).begin(), fused.row(r).end()));
        const json res = s_->post("/decode", {{"fused", rows}, {"target", target}});
        const json& q = field(res, "question", "/decode");
        if (!q.is_string()) throw ProtocolError("/decode: question must be a string", excerpt(res.dump()));
        std::string out = truncate_tokens(q.get<std::string>(), kMaxOutputTokens);
        if (out.empty()) throw ProtocolError("/decode: empty question", excerpt(res.dump()));
        return out;
    }

private:
    std::shared_ptr<RemoteSession> s_;
};

}  // namespace

Backends remote_backend(const RemoteBackendConfig& config) {
    auto session = std::make_shared<RemoteSession>(config);
    const json meta = session->get("/meta");
    try {
        session->meta.image_dim = meta.at("image_dim").get<std::size_t>();
        session->meta.text_dim = meta.at("text_dim").get<std::size_t>();
        session->meta.name = meta.at("name").get<std::string>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("/meta: ") + e.what(), excerpt(meta.dump()));
    }
    if (session->meta.image_dim == 0 || session->meta.text_dim == 0) {
        throw ProtocolError("/meta: dimensions must be positive", excerpt(meta.dump()));
    }
    return Backends{"remote:" + session->meta.name, std::make_shared<RemoteImageEncoder>(session),
                    std::make_shared<RemoteTextEncoder>(session),
                    std::make_shared<RemoteVlm>(session), std::make_shared<RemoteDecoder>(session)};
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += kB64[(v >> 6) & 63];
        out += kB64[v & 63];
    }
    if (const std::size_t rest = bytes.size() - i; rest > 0) {
        std::uint32_t v = bytes[i] << 16;
        if (rest == 2) v |= bytes[i + 1] << 8;
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += rest == 2 ? kB64[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const auto pos = kB64.find(c);
        if (pos == std::string_view::npos) throw FormatError("invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(pos);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace hkidqg
