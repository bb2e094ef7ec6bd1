#include <cctype>

#include "hkidqg/backends.hpp"

namespace hkidqg {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

Vector TextEncoder::encode_pooled(std::string_view text) const {
    return mean_rows(encode_tokens(text));
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view paragraph) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < paragraph.size(); ++i) {
        const char c = paragraph[i];
        if (c != '.' && c != '?' && c != '!') continue;
        const bool at_end = i + 1 == paragraph.size();
        if (!at_end && !is_space(paragraph[i + 1])) continue;
        const auto piece = trim(paragraph.substr(start, i + 1 - start));
        if (!piece.empty()) out.emplace_back(piece);
        start = i + 1;
    }
    const auto tail = trim(paragraph.substr(start));
    if (!tail.empty()) out.emplace_back(tail);
    return out;
}

std::string truncate_tokens(std::string_view text, std::size_t max_tokens) {
    const auto toks = whitespace_tokens(text);
    std::string out;
    for (std::size_t i = 0; i < toks.size() && i < max_tokens; ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

}  // namespace hkidqg
