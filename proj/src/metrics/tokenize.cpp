#include <algorithm>
#include <array>
#include <cctype>

#include "hkidqg/metrics.hpp"

namespace hkidqg {

namespace {

using Text = std::string_view;

bool alnum(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }
bool alpha(unsigned char c) { return std::isalpha(c) != 0 || c >= 0x80; }
bool digit(unsigned char c) { return std::isdigit(c) != 0; }
bool upper(unsigned char c) { return std::isupper(c) != 0; }
bool space(unsigned char c) { return std::isspace(c) != 0; }

std::string lower(Text s) {
    std::string out(s);
    for (char& c : out) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    return out;
}

bool iequals(Text a, Text b) { return lower(a) == lower(b); }

// Curly quotes become their ASCII forms before lexing.
std::string normalize_quotes(Text s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
            static_cast<unsigned char>(s[i + 1]) == 0x80) {
            const auto c = static_cast<unsigned char>(s[i + 2]);
            if (c == 0x98 || c == 0x99) { out += '\''; i += 2; continue; }
            if (c == 0x9C || c == 0x9D) { out += '"'; i += 2; continue; }
        }
        out += s[i];
    }
    return out;
}

constexpr std::array<Text, 36> kAbbrev{
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "fig", "inc",
    "ltd", "co", "corp", "mt", "gen", "gov", "sen", "rep", "col", "lt", "capt", "dept",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec"};

class Lexer {
public:
    explicit Lexer(Text s) : s_(s) {}

    Tokens run() {
        while (i_ < s_.size()) {
            if (space(at(i_))) { ++i_; continue; }
            step();
        }
        return std::move(out_);
    }

private:
    unsigned char at(std::size_t k) const { return k < s_.size() ? static_cast<unsigned char>(s_[k]) : 0; }

    void emit(Text t) { out_.push_back(lower(t)); }

    // Length of a number starting at k: [+-]? (digits ([.,:] digits)* | . digits).
    std::size_t number_len(std::size_t k) const {
        std::size_t j = k;
        if (at(j) == '+' || at(j) == '-') ++j;
        if (at(j) == '.' && digit(at(j + 1))) {
            ++j;
        } else if (!digit(at(j))) {
            return 0;
        }
        while (digit(at(j))) ++j;
        while ((at(j) == '.' || at(j) == ',' || at(j) == ':') && digit(at(j + 1))) {
            ++j;
            while (digit(at(j))) ++j;
        }
        return j - k;
    }

    // alnum+ joined by single '-' or '/'.
    std::size_t word_len(std::size_t k) const {
        std::size_t j = k;
        while (alnum(at(j))) ++j;
        if (j == k) return 0;
        while ((at(j) == '-' || at(j) == '/') && alnum(at(j + 1))) {
            ++j;
            while (alnum(at(j))) ++j;
        }
        return j - k;
    }

    // letter (. letter)+ .?  e.g. "u.s.", "a.m.", "u.s"
    std::size_t acronym_len(std::size_t k) const {
        if (!alpha(at(k)) || at(k + 1) != '.' || !alpha(at(k + 2))) return 0;
        std::size_t j = k + 1;
        while (at(j) == '.' && alpha(at(j + 1)) && !alnum(at(j + 2))) j += 2;
        if (j == k + 1) return 0;
        if (at(j) == '.') ++j;
        return alnum(at(j)) ? 0 : j - k;
    }

    // Next whitespace-separated word starts with a capital and has 2+ letters.
    bool sentence_start_follows(std::size_t k) const {
        if (!space(at(k))) return false;
        while (space(at(k))) ++k;
        return upper(at(k)) && alpha(at(k + 1));
    }

    void word(std::size_t len) {
        Text w = s_.substr(i_, len);
        i_ += len;
        if (iequals(w, "cannot")) { emit(w.substr(0, 3)); emit(w.substr(3)); return; }
        for (Text special : {Text("gonna"), Text("wanna"), Text("gotta"), Text("lemme"), Text("gimme")}) {
            if (iequals(w, special)) { emit(w.substr(0, 3)); emit(w.substr(3)); return; }
        }
        // Trailing period on abbreviations and single letters.
        if (at(i_) == '.' && !alnum(at(i_ + 1))) {
            const bool abbrev = std::find(kAbbrev.begin(), kAbbrev.end(), lower(w)) != kAbbrev.end();
            const bool number_sign = iequals(w, "no") && space(at(i_ + 1)) && digit(at(i_ + 2));
            const bool initial = w.size() == 1 && alpha(static_cast<unsigned char>(w[0])) &&
                                 !sentence_start_follows(i_ + 1);
            if (abbrev || number_sign || initial) {
                emit(s_.substr(i_ - len, len + 1));
                ++i_;
                return;
            }
        }
        // n't and the other clitics.
        if (at(i_) == '\'' ) {
            const std::size_t a = i_ + 1;
            std::size_t b = a;
            while (alpha(at(b))) ++b;
            const std::string suf = lower(s_.substr(a, b - a));
            if (!alnum(at(b))) {
                if (suf == "t" && w.size() > 1 && (w.back() == 'n' || w.back() == 'N')) {
                    emit(w.substr(0, w.size() - 1));
                    emit(s_.substr(i_ - 1, 3));
                    i_ = b;
                    return;
                }
                if (suf == "s" || suf == "re" || suf == "ve" || suf == "ll" || suf == "d" || suf == "m") {
                    emit(w);
                    emit(s_.substr(i_, b - i_));
                    i_ = b;
                    return;
                }
                if (suf == "n" && at(b) == '\'') {  // rock'n'roll
                    emit(w);
                    emit(s_.substr(i_, b + 1 - i_));
                    i_ = b + 1;
                    return;
                }
                if (!suf.empty()) {  // o'clock
                    emit(s_.substr(i_ - len, b - i_ + len));
                    i_ = b;
                    return;
                }
            }
        }
        if (at(i_) == '+' && at(i_ + 1) == '+' && !alnum(at(i_ + 2))) {  // c++
            emit(s_.substr(i_ - len, len + 2));
            i_ += 2;
            return;
        }
        emit(w);
    }

    void step() {
        const unsigned char c = at(i_);
        // 'tis, 'twas
        if (c == '\'' && (at(i_ + 1) == 't' || at(i_ + 1) == 'T')) {
            const std::size_t wl = word_len(i_ + 2);
            const std::string rest = lower(s_.substr(i_ + 2, wl));
            if (rest == "is" || rest == "was") {
                emit(s_.substr(i_, 2));
                emit(s_.substr(i_ + 2, wl));
                i_ += 2 + wl;
                return;
            }
        }
        if (const std::size_t n = acronym_len(i_); n > 0) {
            emit(s_.substr(i_, n));
            i_ += n;
            return;
        }
        const std::size_t num = number_len(i_);
        const std::size_t wl = word_len(i_);
        if (num > 0 && num >= wl) {
            emit(s_.substr(i_, num));
            i_ += num;
            return;
        }
        if (wl > 0) {
            // a@b.com, @home
            std::size_t j = i_ + wl;
            if (at(j) == '@' && alnum(at(j + 1))) {
                ++j;
                while (alnum(at(j)) || ((at(j) == '.' || at(j) == '-') && alnum(at(j + 1)))) ++j;
                emit(s_.substr(i_, j - i_));
                i_ = j;
                return;
            }
            word(wl);
            return;
        }
        if (c == '@' && alnum(at(i_ + 1))) {
            const std::size_t n = 1 + word_len(i_ + 1);
            emit(s_.substr(i_, n));
            i_ += n;
            return;
        }
        if (c == '<' && alpha(at(i_ + 1))) {  // <b>
            std::size_t j = i_ + 1;
            while (alnum(at(j))) ++j;
            if (at(j) == '>') {
                emit(s_.substr(i_, j + 1 - i_));
                i_ = j + 1;
                return;
            }
        }
        switch (c) {
            case '(': out_.emplace_back("-lrb-"); ++i_; return;
            case ')': out_.emplace_back("-rrb-"); ++i_; return;
            case '[': out_.emplace_back("-lsb-"); ++i_; return;
            case ']': out_.emplace_back("-rsb-"); ++i_; return;
            case '{': out_.emplace_back("-lcb-"); ++i_; return;
            case '}': out_.emplace_back("-rcb-"); ++i_; return;
            default: break;
        }
        if (c == '?' || c == '!') {
            std::size_t j = i_;
            while (at(j) == '?' || at(j) == '!') ++j;
            if (j - i_ > 1) emit(s_.substr(i_, j - i_));
            i_ = j;
            return;
        }
        if (c >= 0x80 || std::ispunct(c) == 0) {
            ++i_;
            return;
        }
        // Separators the evaluation toolkit filters out.
        static constexpr Text kDropped = ".,;:'\"`-";
        if (kDropped.find(static_cast<char>(c)) == Text::npos) emit(s_.substr(i_, 1));
        ++i_;
    }

    Text s_;
    std::size_t i_ = 0;
    Tokens out_;
};

}  // namespace

Tokens tokenize_eval(std::string_view s) {
    const std::string norm = normalize_quotes(s);
    return Lexer(norm).run();
}

std::string join_tokens(const Tokens& t) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ' ';
        s += t[i];
    }
    return s;
}

}  // namespace hkidqg
