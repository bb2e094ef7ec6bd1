#include <array>
#include <cmath>
#include <string>

#include "hkidqg/backends.hpp"
#include "hkidqg/hash.hpp"
#include "hkidqg/rng.hpp"

namespace hkidqg {

namespace {

std::uint64_t image_hash(const Diagram& d) {
    std::uint64_t h = fnv1a_u64(d.height());
    h = fnv1a_u64(d.width(), h);
    return fnv1a(d.bytes(), h);
}

class ToyImageEncoder final : public ImageEncoder {
public:
    ToyImageEncoder(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {}
    std::size_t dim() const override { return dim_; }

    Vector encode(const Diagram& image) const override {
        Rng rng(mix64(image_hash(image) ^ mix64(seed_)));
        Vector v(dim_);
        double norm2 = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
        if (norm2 == 0.0 && dim_ > 0) v[0] = 1.0;
        return v;
    }

private:
    std::uint64_t seed_;
    std::size_t dim_;
};

class ToyTextEncoder final : public TextEncoder {
public:
    ToyTextEncoder(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {}
    std::size_t dim() const override { return dim_; }

    Matrix encode_tokens(std::string_view text) const override {
        auto toks = whitespace_tokens(text);
        if (toks.size() > kMaxInputTokens) toks.resize(kMaxInputTokens);
        Matrix m(toks.size(), dim_);
        for (std::size_t r = 0; r < toks.size(); ++r) {
            Rng rng(mix64(fnv1a(toks[r]) ^ mix64(seed_ + 1)));
            for (double& x : m.row(r)) x = rng.normal();
        }
        return m;
    }

private:
    std::uint64_t seed_;
    std::size_t dim_;
};

class ToyVlm final : public KnowledgeVLM {
public:
    explicit ToyVlm(std::uint64_t seed) : seed_(seed) {}

    std::vector<std::string> extract(const Diagram& patch, const std::string& target,
                                     const std::string& concept_text) const override {
        const std::uint64_t ph = image_hash(patch);
        std::uint64_t h = mix64(ph ^ mix64(seed_ + 2));
        h = fnv1a(target, h);
        h = fnv1a(std::string_view("\x1f"), h);
        h = fnv1a(concept_text, h);
        h = mix64(h);
        const std::size_t k = 2 + h % 4;
        std::vector<std::string> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::uint64_t prop = mix64(h + i) % 1000;
            out.push_back("Patch " + hex8(ph) + " relates " + target + " to " + concept_text +
                          " via property " + std::to_string(prop) + ".");
        }
        return out;
    }

private:
    std::uint64_t seed_;
};

class ToyDecoder final : public QuestionDecoder {
public:
    explicit ToyDecoder(std::uint64_t seed) : seed_(seed) {}

    std::string decode(const Matrix& fused, const std::string& target) const override {
        static constexpr std::array<std::string_view, 6> kTemplates{
            "What is the role of the {} in this diagram?",
            "Which part of the diagram shows the {}?",
            "How does the {} interact with the other parts shown?",
            "What would happen if the {} were removed?",
            "Where is the {} located in the diagram?",
            "Why is the {} important in this process?",
        };
        // Quantize so the choice does not hinge on the last bits of a sum.
        std::uint64_t h = mix64(seed_ + 3);
        for (double x : fused.data())
            h = fnv1a_u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(x * 1e4))), h);
        const std::string_view tmpl = kTemplates[mix64(h) % kTemplates.size()];
        const auto slot = tmpl.find("{}");
        const std::string t = target.empty() ? std::string("object") : target;
        std::string q = std::string(tmpl.substr(0, slot)) + t + std::string(tmpl.substr(slot + 2));
        return truncate_tokens(q, kMaxOutputTokens);
    }

private:
    std::uint64_t seed_;
};

}  // namespace

std::shared_ptr<const ImageEncoder> toy_image_encoder(std::uint64_t seed, std::size_t dim) {
    return std::make_shared<ToyImageEncoder>(seed, dim);
}

std::shared_ptr<const TextEncoder> toy_text_encoder(std::uint64_t seed, std::size_t dim) {
    return std::make_shared<ToyTextEncoder>(seed, dim);
}

std::shared_ptr<const KnowledgeVLM> toy_vlm(std::uint64_t seed) {
    return std::make_shared<ToyVlm>(seed);
}

std::shared_ptr<const QuestionDecoder> toy_decoder(std::uint64_t seed) {
    return std::make_shared<ToyDecoder>(seed);
}

Backends toy_backends(const ToyBackendOptions& opts) {
    return Backends{"toy", toy_image_encoder(opts.seed, opts.image_dim),
                    toy_text_encoder(opts.seed, opts.text_dim), toy_vlm(opts.seed),
                    toy_decoder(opts.seed)};
}

}  // namespace hkidqg
