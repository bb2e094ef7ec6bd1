#include "hkidqg/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "hkidqg/error.hpp"
#include "hkidqg/hash.hpp"
#include "hkidqg/rng.hpp"

namespace hkidqg {

double surrogate_loss(const Matrix& h_fuse, const Vector& target) {
    const Vector pooled = mean_rows(h_fuse);
    if (pooled.size() != target.size()) throw ShapeError("surrogate_loss: width mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < pooled.size(); ++j) s += (pooled[j] - target[j]) * (pooled[j] - target[j]);
    return s / static_cast<double>(pooled.size());
}

Matrix surrogate_grad(const Matrix& h_fuse, const Vector& target) {
    const Vector pooled = mean_rows(h_fuse);
    if (pooled.size() != target.size()) throw ShapeError("surrogate_grad: width mismatch");
    Matrix g(h_fuse.rows(), h_fuse.cols());
    if (h_fuse.rows() == 0) return g;
    const double k = 2.0 / (static_cast<double>(pooled.size()) * static_cast<double>(h_fuse.rows()));
    for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t j = 0; j < g.cols(); ++j) g(r, j) = k * (pooled[j] - target[j]);
    return g;
}

FusionParams initial_params(const PipelineConfig& cfg) {
    Rng rng(cfg.seed);
    return FusionParams::init(cfg.image_dim, cfg.text_dim, rng, cfg.init_std);
}

namespace {

class CachedText final : public TextEncoder {
public:
    explicit CachedText(std::shared_ptr<const TextEncoder> inner) : inner_(std::move(inner)) {}
    std::size_t dim() const override { return inner_->dim(); }
    Matrix encode_tokens(std::string_view text) const override {
        std::string key(text);
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        Matrix m = inner_->encode_tokens(text);
        std::lock_guard lock(mu_);
        return cache_.emplace(std::move(key), std::move(m)).first->second;
    }

private:
    std::shared_ptr<const TextEncoder> inner_;
    mutable std::mutex mu_;
    mutable std::map<std::string, Matrix> cache_;
};

class CachedVlm final : public KnowledgeVLM {
public:
    explicit CachedVlm(std::shared_ptr<const KnowledgeVLM> inner) : inner_(std::move(inner)) {}
    std::vector<std::string> extract(const Diagram& patch, const std::string& target,
                                     const std::string& concept_text) const override {
        std::uint64_t h = fnv1a_u64(patch.height());
        h = fnv1a_u64(patch.width(), h);
        h = fnv1a(patch.bytes(), h);
        auto key = std::make_tuple(h, target, concept_text);
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        auto s = inner_->extract(patch, target, concept_text);
        std::lock_guard lock(mu_);
        return cache_.emplace(std::move(key), std::move(s)).first->second;
    }

private:
    std::shared_ptr<const KnowledgeVLM> inner_;
    mutable std::mutex mu_;
    mutable std::map<std::tuple<std::uint64_t, std::string, std::string>, std::vector<std::string>>
        cache_;
};

struct Prepared {
    const DatasetRecord* rec;
    EncodedRecord enc;
    Vector q;
};

double dataset_loss(const std::vector<Prepared>& data, const PipelineConfig& cfg,
                    const Backends& b, const FusionParams& params) {
    double s = 0.0;
    for (const auto& p : data) {
        const FusionInputs in = prepare_fusion(*p.rec, p.enc, cfg, b, params);
        s += surrogate_loss(fusion_forward(params, in.patch_embs, in.h_t).h_fuse, p.q);
    }
    return s / static_cast<double>(data.size());
}

void add_into(Matrix& acc, const Matrix& g) {
    auto a = acc.data();
    auto v = g.data();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += v[i];
}

}  // namespace

Backends memoize_backends(const Backends& b) {
    Backends m = b;
    m.text = std::make_shared<CachedText>(b.text);
    m.vlm = std::make_shared<CachedVlm>(b.vlm);
    return m;
}

TrainResult toy_train(const std::vector<DatasetRecord>& records, const PipelineConfig& cfg,
                      const Backends& backends_in, const DiagramSource& source) {
    if (records.empty()) throw ConfigError("toy_train: empty dataset");
    cfg.validate();
    const Backends b = memoize_backends(backends_in);

    std::vector<Prepared> data;
    data.reserve(records.size());
    for (const auto& r : records) {
        EncodedRecord enc = encode_record(r, source(r), cfg, b);
        data.push_back({&r, std::move(enc), b.text->encode_pooled(r.question)});
    }

    TrainResult res;
    res.initial = initial_params(cfg);
    res.params = res.initial;
    res.optimizer.config = {cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay};
    res.optimizer.groups["default"].base_lr = cfg.lr;
    res.optimizer.groups["encoder"].base_lr = cfg.encoder_lr;

    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t accum = static_cast<std::size_t>(cfg.grad_accum);
    const std::size_t batches = (data.size() + batch - 1) / batch;
    res.schedule = {(batches + accum - 1) / accum, cfg.warmup_epochs, std::max(cfg.epochs, cfg.warmup_epochs + 1)};

    FusionParams& p = res.params;
    res.epoch_losses.push_back(dataset_loss(data, cfg, b, p));
    Rng rng(mix64(cfg.seed ^ 0x747261696eULL));
    std::vector<std::size_t> order(data.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(0, i - 1)]);

        Matrix gh, gt, gv;
        std::size_t seen = 0;
        auto reset = [&] {
            gh = Matrix(p.w_h.weights.rows(), p.w_h.weights.cols());
            gt = Matrix(p.w_t.weights.rows(), p.w_t.weights.cols());
            gv = Matrix(p.w_v.weights.rows(), p.w_v.weights.cols());
            seen = 0;
        };
        reset();
        for (std::size_t bi = 0; bi < batches; ++bi) {
            const std::size_t end = std::min(order.size(), (bi + 1) * batch);
            for (std::size_t k = bi * batch; k < end; ++k) {
                const Prepared& d = data[order[k]];
                const FusionInputs in = prepare_fusion(*d.rec, d.enc, cfg, b, p);
                const DropoutMasks masks = sample_dropout(in.h_t.rows(), cfg.dropout, rng);
                const FusionTrace tr = fusion_forward(p, in.patch_embs, in.h_t, masks);
                const FusionGrads g = fusion_backward(tr, p, surrogate_grad(tr.h_fuse, d.q));
                add_into(gh, g.w_h);
                add_into(gt, g.w_t);
                add_into(gv, g.w_v);
                ++seen;
            }
            if ((bi + 1) % accum == 0 || bi + 1 == batches) {
                const double inv = 1.0 / static_cast<double>(seen);
                gh = scale(gh, inv);
                gt = scale(gt, inv);
                gv = scale(gv, inv);
                ParamSlot slots[] = {{"w_h", "default", &p.w_h.weights, &gh},
                                     {"w_t", "default", &p.w_t.weights, &gt},
                                     {"w_v", "default", &p.w_v.weights, &gv}};
                if (adamw_step(slots, res.optimizer, res.schedule)) ++p.version;
                reset();
            }
        }
        res.epoch_losses.push_back(dataset_loss(data, cfg, b, p));
    }
    return res;
}

}  // namespace hkidqg
