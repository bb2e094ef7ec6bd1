#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hkidqg/error.hpp"
#include "hkidqg/image.hpp"
#include "hkidqg/matrix.hpp"

namespace hkidqg {

constexpr std::size_t kMaxInputTokens = 256;
constexpr std::size_t kMaxOutputTokens = 32;

/// Pooled image embedding per patch.
class ImageEncoder {
public:
    virtual ~ImageEncoder() = default;
    virtual std::size_t dim() const = 0;
    virtual Vector encode(const Diagram& image) const = 0;
};

class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual std::size_t dim() const = 0;
    // One row per token, at most kMaxInputTokens rows.
    virtual Matrix encode_tokens(std::string_view text) const = 0;
    // Mean of the token rows; zeros for empty input.
    virtual Vector encode_pooled(std::string_view text) const;
};

class KnowledgeVLM {
public:
    virtual ~KnowledgeVLM() = default;
    virtual std::vector<std::string> extract(const Diagram& patch, const std::string& target,
                                             const std::string& concept_text) const = 0;
};

class QuestionDecoder {
public:
    virtual ~QuestionDecoder() = default;
    // Non-empty, at most kMaxOutputTokens whitespace tokens.
    virtual std::string decode(const Matrix& fused, const std::string& target) const = 0;
};

struct Backends {
    std::string name;
    std::shared_ptr<const ImageEncoder> image;
    std::shared_ptr<const TextEncoder> text;
    std::shared_ptr<const KnowledgeVLM> vlm;
    std::shared_ptr<const QuestionDecoder> decoder;
};

// ---- text helpers ----------------------------------------------------------

std::vector<std::string> whitespace_tokens(std::string_view text);

/// Splits a paragraph after '.', '?' or '!' when the terminator is followed
/// by whitespace or the end of the text. Pieces are trimmed; empties dropped.
std::vector<std::string> split_sentences(std::string_view paragraph);

/// Keeps the first `max_tokens` whitespace tokens joined by single spaces.
std::string truncate_tokens(std::string_view text, std::size_t max_tokens);

// ---- toy backends ----------------------------------------------------------

struct ToyBackendOptions {
    std::uint64_t seed = 7;
    std::size_t image_dim = 16;
    std::size_t text_dim = 16;
};

std::shared_ptr<const ImageEncoder> toy_image_encoder(std::uint64_t seed, std::size_t dim);
std::shared_ptr<const TextEncoder> toy_text_encoder(std::uint64_t seed, std::size_t dim);
std::shared_ptr<const KnowledgeVLM> toy_vlm(std::uint64_t seed);
std::shared_ptr<const QuestionDecoder> toy_decoder(std::uint64_t seed);
Backends toy_backends(const ToyBackendOptions& opts);

// ---- remote backend --------------------------------------------------------

struct RemoteBackendConfig {
    std::string base_url = "http://127.0.0.1:8080";
    double timeout_s = 30.0;
    int max_in_flight = 4;
    int retry = 2;  // extra attempts after the first
};

class BackendError : public Error {
public:
    BackendError(const std::string& what, int status) : Error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

class TimeoutError : public Error {
public:
    TimeoutError(const std::string& what, int attempts) : Error(what), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class ProtocolError : public Error {
public:
    ProtocolError(const std::string& what, std::string excerpt)
        : Error(what + " (payload: " + excerpt + ")"), excerpt_(std::move(excerpt)) {}
    const std::string& excerpt() const noexcept { return excerpt_; }

private:
    std::string excerpt_;
};

struct RemoteMeta {
    std::size_t image_dim = 0;
    std::size_t text_dim = 0;
    std::string name;
};

/// Connects to a model server speaking the JSON protocol (/meta,
/// /encode_image, /encode_text, /extract, /decode) and wraps it in the four
/// backend interfaces. Fetches /meta eagerly.
Backends remote_backend(const RemoteBackendConfig& config);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace hkidqg
