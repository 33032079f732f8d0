#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vacda/core/rng.hpp"
#include "vacda/core/tensor.hpp"
#include "vacda/kernels/kernels.hpp"
#include "vacda/model/netspec.hpp"

namespace vacda {

template <typename T>
struct Param {
    std::string name;
    Tensor<T> w;
    Tensor<T> g;
};

constexpr double kLogVarClampLo = -20.0;
constexpr double kLogVarClampHi = 20.0;

// Encoder output sample: z = mu + exp(0.5 * log_var) * eps with eps recorded,
// so the draw can be replayed and gradients flow to mu/log_var only.
template <typename T>
struct LatentSample {
    Tensor<T> mu;
    Tensor<T> log_var;
    Tensor<T> z;
    Tensor<T> eps;
};

template <typename T>
LatentSample<T> reparameterize_with_eps(const Tensor<T>& mu, const Tensor<T>& log_var,
                                        Tensor<T> eps) {
    LatentSample<T> s;
    s.mu = mu;
    s.log_var = log_var;
    for (auto& lv : s.log_var.v) {
        if (lv < static_cast<T>(kLogVarClampLo)) lv = static_cast<T>(kLogVarClampLo);
        if (lv > static_cast<T>(kLogVarClampHi)) lv = static_cast<T>(kLogVarClampHi);
    }
    s.eps = std::move(eps);
    s.z = s.mu;
    for (long long i = 0; i < s.z.numel(); ++i) {
        auto idx = static_cast<std::size_t>(i);
        s.z.v[idx] += std::exp(static_cast<T>(0.5) * s.log_var.v[idx]) * s.eps.v[idx];
    }
    return s;
}

template <typename T>
LatentSample<T> reparameterize(const Tensor<T>& mu, const Tensor<T>& log_var, Rng& rng) {
    Tensor<T> eps(mu.shape);
    for (auto& e : eps.v) e = static_cast<T>(rng.gaussian());
    return reparameterize_with_eps(mu, log_var, std::move(eps));
}

// dz -> accumulate into dmu, dlog_var.  eps carries no gradient.
template <typename T>
void reparameterize_backward(const LatentSample<T>& s, const Tensor<T>& dz,
                             Tensor<T>& dmu, Tensor<T>& dlog_var) {
    for (long long i = 0; i < dz.numel(); ++i) {
        auto idx = static_cast<std::size_t>(i);
        dmu.v[idx] += dz.v[idx];
        dlog_var.v[idx] += dz.v[idx] * s.eps.v[idx] * static_cast<T>(0.5) *
                           std::exp(static_cast<T>(0.5) * s.log_var.v[idx]);
    }
}

// Owns the parameters (with paired gradient buffers) of the encoder, decoder,
// projector and classifier, and implements their forward/backward passes on
// top of the shared kernels.
template <typename T>
class Model {
public:
    NetSpec spec;
    std::vector<Param<T>> enc, dec, proj, clf;

    explicit Model(NetSpec s) : spec(std::move(s)) {
        spec.validate();
        lens_ = spec.encoder_lengths();
        chans_ = spec.encoder_channels();
        const int n = static_cast<int>(spec.conv_blocks.size());
        const int flat = spec.flat_dim();
        for (int i = 0; i < n; ++i) {
            const auto& b = spec.conv_blocks[static_cast<std::size_t>(i)];
            add(enc, "enc.conv" + std::to_string(i) + ".w",
                {b.out_channels, chans_[static_cast<std::size_t>(i)], b.kernel});
            add(enc, "enc.conv" + std::to_string(i) + ".b", {b.out_channels});
        }
        add(enc, "enc.mu.w", {spec.latent_dim, flat});
        add(enc, "enc.mu.b", {spec.latent_dim});
        add(enc, "enc.logvar.w", {spec.latent_dim, flat});
        add(enc, "enc.logvar.b", {spec.latent_dim});

        add(dec, "dec.fc.w", {flat, spec.latent_dim});
        add(dec, "dec.fc.b", {flat});
        for (int i = n - 1; i >= 0; --i) {
            const auto& b = spec.conv_blocks[static_cast<std::size_t>(i)];
            // transposed conv weights are [in_ch][out_ch][k]
            add(dec, "dec.tconv" + std::to_string(i) + ".w",
                {chans_[static_cast<std::size_t>(i + 1)], chans_[static_cast<std::size_t>(i)],
                 b.kernel});
            add(dec, "dec.tconv" + std::to_string(i) + ".b",
                {chans_[static_cast<std::size_t>(i)]});
        }

        add(proj, "proj.fc1.w", {spec.latent_dim, spec.latent_dim});
        add(proj, "proj.fc1.b", {spec.latent_dim});
        add(proj, "proj.fc2.w", {spec.projection_dim, spec.latent_dim});
        add(proj, "proj.fc2.b", {spec.projection_dim});

        add(clf, "clf.fc1.w", {spec.classifier_hidden, spec.latent_dim});
        add(clf, "clf.fc1.b", {spec.classifier_hidden});
        add(clf, "clf.fc2.w", {spec.n_classes, spec.classifier_hidden});
        add(clf, "clf.fc2.b", {spec.n_classes});
    }

    // He-normal for hidden layers, smaller Xavier-like scale for output heads,
    // zero biases.  Draw order is the fixed parameter order, so a seed pins
    // the full initialization.
    void init_params(Rng& rng) {
        for (auto* group : {&enc, &dec, &proj, &clf})
            for (auto& p : *group) {
                if (p.w.rank() == 1) {
                    p.w.zero();
                    continue;
                }
                const bool head = is_head(p.name);
                long long fan_in = 1;
                for (int d = 1; d < p.w.rank(); ++d) fan_in *= p.w.dim(d);
                double std_dev = head ? std::sqrt(1.0 / static_cast<double>(fan_in))
                                      : std::sqrt(2.0 / static_cast<double>(fan_in));
                for (auto& v : p.w.v) v = static_cast<T>(rng.gaussian() * std_dev);
            }
    }

    void zero_grads() {
        for (auto* group : {&enc, &dec, &proj, &clf})
            for (auto& p : *group) p.g.zero();
    }

    // ---- encoder -----------------------------------------------------------

    struct EncoderCache {
        Tensor<T> input;
        std::vector<Tensor<T>> act;  // post-ReLU output of each block
        Tensor<T> flat;
        Tensor<T> log_var_raw;  // pre-clamp head output
    };

    void encode(const Tensor<T>& x, Tensor<T>& mu, Tensor<T>& log_var,
                EncoderCache& c) const {
        require_shape(x, {x.dim(0), spec.in_channels, spec.window_size}, "encode input");
        const int B = x.dim(0);
        c.input = x;
        c.act.clear();
        const Tensor<T>* cur = &c.input;
        for (std::size_t i = 0; i < spec.conv_blocks.size(); ++i) {
            const auto& b = spec.conv_blocks[i];
            Tensor<T> y({B, b.out_channels, lens_[i + 1]});
            kernels::conv1d_forward(cur->data(), enc[2 * i].w.data(), enc[2 * i + 1].w.data(),
                                    y.data(), B, chans_[i], lens_[i], b.out_channels,
                                    b.kernel, b.stride, b.kernel / 2, lens_[i + 1]);
            kernels::relu_forward(y.data(), y.data(), y.numel());
            c.act.push_back(std::move(y));
            cur = &c.act.back();
        }
        c.flat = *cur;
        c.flat.shape = {B, spec.flat_dim()};
        mu = Tensor<T>({B, spec.latent_dim});
        log_var = Tensor<T>({B, spec.latent_dim});
        const auto& mw = param(enc, "enc.mu.w"), &mb = param(enc, "enc.mu.b");
        const auto& lw = param(enc, "enc.logvar.w"), &lb = param(enc, "enc.logvar.b");
        kernels::linear_forward(c.flat.data(), mw.w.data(), mb.w.data(), mu.data(), B,
                                spec.flat_dim(), spec.latent_dim);
        kernels::linear_forward(c.flat.data(), lw.w.data(), lb.w.data(), log_var.data(), B,
                                spec.flat_dim(), spec.latent_dim);
        c.log_var_raw = log_var;
        for (auto& v : log_var.v) {
            if (v < static_cast<T>(kLogVarClampLo)) v = static_cast<T>(kLogVarClampLo);
            if (v > static_cast<T>(kLogVarClampHi)) v = static_cast<T>(kLogVarClampHi);
        }
    }

    void encode_backward(const Tensor<T>& dmu, Tensor<T> dlog_var, const EncoderCache& c,
                         Tensor<T>* dx = nullptr) {
        const int B = c.input.dim(0);
        const int flat = spec.flat_dim();
        // clamp mask
        for (long long i = 0; i < dlog_var.numel(); ++i) {
            T raw = c.log_var_raw.v[static_cast<std::size_t>(i)];
            if (raw <= static_cast<T>(kLogVarClampLo) || raw >= static_cast<T>(kLogVarClampHi))
                dlog_var.v[static_cast<std::size_t>(i)] = 0;
        }
        Tensor<T> dflat({B, flat});
        {
            auto& mw = param(enc, "enc.mu.w");
            auto& mb = param(enc, "enc.mu.b");
            auto& lw = param(enc, "enc.logvar.w");
            auto& lb = param(enc, "enc.logvar.b");
            kernels::linear_backward_filter(dmu.data(), c.flat.data(), mw.g.data(),
                                            mb.g.data(), B, flat, spec.latent_dim);
            kernels::linear_backward_filter(dlog_var.data(), c.flat.data(), lw.g.data(),
                                            lb.g.data(), B, flat, spec.latent_dim);
            kernels::linear_backward_data(dmu.data(), mw.w.data(), dflat.data(), B, flat,
                                          spec.latent_dim);
            Tensor<T> dflat2({B, flat});
            kernels::linear_backward_data(dlog_var.data(), lw.w.data(), dflat2.data(), B,
                                          flat, spec.latent_dim);
            for (long long i = 0; i < dflat.numel(); ++i)
                dflat.v[static_cast<std::size_t>(i)] += dflat2.v[static_cast<std::size_t>(i)];
        }
        const int n = static_cast<int>(spec.conv_blocks.size());
        Tensor<T> dcur = dflat;
        dcur.shape = {B, chans_[static_cast<std::size_t>(n)], lens_[static_cast<std::size_t>(n)]};
        for (int i = n - 1; i >= 0; --i) {
            const auto& b = spec.conv_blocks[static_cast<std::size_t>(i)];
            const auto& post = c.act[static_cast<std::size_t>(i)];
            kernels::relu_backward(dcur.data(), post.data(), dcur.data(), dcur.numel());
            const Tensor<T>& in =
                (i == 0) ? c.input : c.act[static_cast<std::size_t>(i - 1)];
            auto& w = enc[static_cast<std::size_t>(2 * i)];
            auto& bias = enc[static_cast<std::size_t>(2 * i + 1)];
            kernels::conv1d_backward_filter(
                dcur.data(), in.data(), w.g.data(), bias.g.data(), B,
                chans_[static_cast<std::size_t>(i)], lens_[static_cast<std::size_t>(i)],
                b.out_channels, b.kernel, b.stride, b.kernel / 2,
                lens_[static_cast<std::size_t>(i + 1)]);
            if (i > 0 || dx != nullptr) {
                Tensor<T> din({B, chans_[static_cast<std::size_t>(i)],
                               lens_[static_cast<std::size_t>(i)]});
                kernels::conv1d_backward_data(
                    dcur.data(), w.w.data(), din.data(), B,
                    chans_[static_cast<std::size_t>(i)], lens_[static_cast<std::size_t>(i)],
                    b.out_channels, b.kernel, b.stride, b.kernel / 2,
                    lens_[static_cast<std::size_t>(i + 1)]);
                dcur = std::move(din);
            }
        }
        if (dx != nullptr) *dx = std::move(dcur);
    }

    // ---- decoder -----------------------------------------------------------

    struct DecoderCache {
        Tensor<T> z;
        Tensor<T> fc_act;            // post-ReLU fc output, flat
        std::vector<Tensor<T>> act;  // post-activation output of each tconv, reverse order
    };

    Tensor<T> decode(const Tensor<T>& z, DecoderCache& c) const {
        require_shape(z, {z.dim(0), spec.latent_dim}, "decode input");
        const int B = z.dim(0);
        const int n = static_cast<int>(spec.conv_blocks.size());
        const int flat = spec.flat_dim();
        c.z = z;
        Tensor<T> h({B, flat});
        kernels::linear_forward(z.data(), param(dec, "dec.fc.w").w.data(),
                                param(dec, "dec.fc.b").w.data(), h.data(), B,
                                spec.latent_dim, flat);
        kernels::relu_forward(h.data(), h.data(), h.numel());
        c.fc_act = h;
        c.act.clear();
        Tensor<T> cur = h;
        cur.shape = {B, chans_[static_cast<std::size_t>(n)], lens_[static_cast<std::size_t>(n)]};
        for (int i = n - 1; i >= 0; --i) {
            const auto& b = spec.conv_blocks[static_cast<std::size_t>(i)];
            Tensor<T> y({B, chans_[static_cast<std::size_t>(i)],
                         lens_[static_cast<std::size_t>(i)]});
            const auto& w = param(dec, "dec.tconv" + std::to_string(i) + ".w");
            const auto& bias = param(dec, "dec.tconv" + std::to_string(i) + ".b");
            kernels::tconv1d_forward(cur.data(), w.w.data(), bias.w.data(), y.data(), B,
                                     chans_[static_cast<std::size_t>(i + 1)],
                                     lens_[static_cast<std::size_t>(i + 1)],
                                     chans_[static_cast<std::size_t>(i)], b.kernel, b.stride,
                                     b.kernel / 2, lens_[static_cast<std::size_t>(i)]);
            if (i > 0) kernels::relu_forward(y.data(), y.data(), y.numel());
            c.act.push_back(y);
            cur = std::move(y);
        }
        return cur;  // [B, in_channels, window]
    }

    // Returns dz.
    Tensor<T> decode_backward(const Tensor<T>& dxhat, const DecoderCache& c) {
        const int B = c.z.dim(0);
        const int n = static_cast<int>(spec.conv_blocks.size());
        const int flat = spec.flat_dim();
        Tensor<T> dcur = dxhat;
        for (int i = 0; i < n; ++i) {
            const auto& b = spec.conv_blocks[static_cast<std::size_t>(i)];
            // c.act is stored in application order (i = n-1 .. 0)
            const auto& post = c.act[static_cast<std::size_t>(n - 1 - i)];
            if (i > 0) kernels::relu_backward(dcur.data(), post.data(), dcur.data(), dcur.numel());
            const Tensor<T>* in;
            Tensor<T> reshaped;
            if (i == n - 1) {
                reshaped = c.fc_act;
                reshaped.shape = {B, chans_[static_cast<std::size_t>(n)],
                                  lens_[static_cast<std::size_t>(n)]};
                in = &reshaped;
            } else {
                in = &c.act[static_cast<std::size_t>(n - 2 - i)];
            }
            auto& w = param(dec, "dec.tconv" + std::to_string(i) + ".w");
            auto& bias = param(dec, "dec.tconv" + std::to_string(i) + ".b");
            kernels::tconv1d_backward_filter(
                dcur.data(), in->data(), w.g.data(), bias.g.data(), B,
                chans_[static_cast<std::size_t>(i + 1)], lens_[static_cast<std::size_t>(i + 1)],
                chans_[static_cast<std::size_t>(i)], b.kernel, b.stride, b.kernel / 2,
                lens_[static_cast<std::size_t>(i)]);
            Tensor<T> din({B, chans_[static_cast<std::size_t>(i + 1)],
                           lens_[static_cast<std::size_t>(i + 1)]});
            kernels::tconv1d_backward_data(
                dcur.data(), w.w.data(), din.data(), B,
                chans_[static_cast<std::size_t>(i + 1)], lens_[static_cast<std::size_t>(i + 1)],
                chans_[static_cast<std::size_t>(i)], b.kernel, b.stride, b.kernel / 2,
                lens_[static_cast<std::size_t>(i)]);
            dcur = std::move(din);
        }
        dcur.shape = {B, flat};
        kernels::relu_backward(dcur.data(), c.fc_act.data(), dcur.data(), dcur.numel());
        auto& fw = param(dec, "dec.fc.w");
        auto& fb = param(dec, "dec.fc.b");
        kernels::linear_backward_filter(dcur.data(), c.z.data(), fw.g.data(), fb.g.data(),
                                        B, spec.latent_dim, flat);
        Tensor<T> dz({B, spec.latent_dim});
        kernels::linear_backward_data(dcur.data(), fw.w.data(), dz.data(), B,
                                      spec.latent_dim, flat);
        return dz;
    }

    // ---- projector ---------------------------------------------------------

    struct ProjectorCache {
        Tensor<T> z;
        Tensor<T> h;    // post-ReLU hidden
        Tensor<T> pre;  // pre-normalization output
    };

    Tensor<T> project(const Tensor<T>& z, ProjectorCache& c) const {
        require_shape(z, {z.dim(0), spec.latent_dim}, "project input");
        const int B = z.dim(0);
        c.z = z;
        Tensor<T> h({B, spec.latent_dim});
        kernels::linear_forward(z.data(), param(proj, "proj.fc1.w").w.data(),
                                param(proj, "proj.fc1.b").w.data(), h.data(), B,
                                spec.latent_dim, spec.latent_dim);
        kernels::relu_forward(h.data(), h.data(), h.numel());
        c.h = h;
        Tensor<T> pre({B, spec.projection_dim});
        kernels::linear_forward(h.data(), param(proj, "proj.fc2.w").w.data(),
                                param(proj, "proj.fc2.b").w.data(), pre.data(), B,
                                spec.latent_dim, spec.projection_dim);
        c.pre = pre;
        Tensor<T> r = pre;
        for (int b = 0; b < B; ++b) {
            T n2 = 0;
            for (int d = 0; d < spec.projection_dim; ++d) n2 += pre.at(b, d) * pre.at(b, d);
            T m = std::sqrt(n2) + static_cast<T>(1e-12);
            for (int d = 0; d < spec.projection_dim; ++d) r.at(b, d) = pre.at(b, d) / m;
        }
        return r;
    }

    // Returns dz.
    Tensor<T> project_backward(const Tensor<T>& dr, const ProjectorCache& c) {
        const int B = c.z.dim(0);
        const int P = spec.projection_dim;
        Tensor<T> dpre({B, P});
        for (int b = 0; b < B; ++b) {
            T n2 = 0;
            for (int d = 0; d < P; ++d) n2 += c.pre.at(b, d) * c.pre.at(b, d);
            T norm = std::sqrt(n2);
            T safe = norm > static_cast<T>(1e-12) ? norm : static_cast<T>(1e-12);
            T m = norm + static_cast<T>(1e-12);
            T dot = 0;
            for (int d = 0; d < P; ++d) dot += dr.at(b, d) * c.pre.at(b, d);
            for (int d = 0; d < P; ++d)
                dpre.at(b, d) = dr.at(b, d) / m - c.pre.at(b, d) * dot / (safe * m * m);
        }
        auto& w2 = param(proj, "proj.fc2.w");
        auto& b2 = param(proj, "proj.fc2.b");
        kernels::linear_backward_filter(dpre.data(), c.h.data(), w2.g.data(), b2.g.data(),
                                        B, spec.latent_dim, P);
        Tensor<T> dh({B, spec.latent_dim});
        kernels::linear_backward_data(dpre.data(), w2.w.data(), dh.data(), B,
                                      spec.latent_dim, P);
        kernels::relu_backward(dh.data(), c.h.data(), dh.data(), dh.numel());
        auto& w1 = param(proj, "proj.fc1.w");
        auto& b1 = param(proj, "proj.fc1.b");
        kernels::linear_backward_filter(dh.data(), c.z.data(), w1.g.data(), b1.g.data(), B,
                                        spec.latent_dim, spec.latent_dim);
        Tensor<T> dz({B, spec.latent_dim});
        kernels::linear_backward_data(dh.data(), w1.w.data(), dz.data(), B,
                                      spec.latent_dim, spec.latent_dim);
        return dz;
    }

    // ---- classifier --------------------------------------------------------

    struct ClassifierCache {
        Tensor<T> z;
        Tensor<T> h;
    };

    Tensor<T> classify(const Tensor<T>& z, ClassifierCache& c) const {
        require_shape(z, {z.dim(0), spec.latent_dim}, "classify input");
        const int B = z.dim(0);
        c.z = z;
        Tensor<T> h({B, spec.classifier_hidden});
        kernels::linear_forward(z.data(), param(clf, "clf.fc1.w").w.data(),
                                param(clf, "clf.fc1.b").w.data(), h.data(), B,
                                spec.latent_dim, spec.classifier_hidden);
        kernels::relu_forward(h.data(), h.data(), h.numel());
        c.h = h;
        Tensor<T> logits({B, spec.n_classes});
        kernels::linear_forward(h.data(), param(clf, "clf.fc2.w").w.data(),
                                param(clf, "clf.fc2.b").w.data(), logits.data(), B,
                                spec.classifier_hidden, spec.n_classes);
        return logits;
    }

    // Returns dz.
    Tensor<T> classify_backward(const Tensor<T>& dlogits, const ClassifierCache& c) {
        const int B = c.z.dim(0);
        auto& w2 = param(clf, "clf.fc2.w");
        auto& b2 = param(clf, "clf.fc2.b");
        kernels::linear_backward_filter(dlogits.data(), c.h.data(), w2.g.data(),
                                        b2.g.data(), B, spec.classifier_hidden,
                                        spec.n_classes);
        Tensor<T> dh({B, spec.classifier_hidden});
        kernels::linear_backward_data(dlogits.data(), w2.w.data(), dh.data(), B,
                                      spec.classifier_hidden, spec.n_classes);
        kernels::relu_backward(dh.data(), c.h.data(), dh.data(), dh.numel());
        auto& w1 = param(clf, "clf.fc1.w");
        auto& b1 = param(clf, "clf.fc1.b");
        kernels::linear_backward_filter(dh.data(), c.z.data(), w1.g.data(), b1.g.data(), B,
                                        spec.latent_dim, spec.classifier_hidden);
        Tensor<T> dz({B, spec.latent_dim});
        kernels::linear_backward_data(dh.data(), w1.w.data(), dz.data(), B,
                                      spec.latent_dim, spec.classifier_hidden);
        return dz;
    }

    // ---- misc ---------------------------------------------------------------

    static Param<T>& param(std::vector<Param<T>>& group, const std::string& name) {
        for (auto& p : group)
            if (p.name == name) return p;
        throw Error("unknown parameter: " + name);
    }
    static const Param<T>& param(const std::vector<Param<T>>& group,
                                 const std::string& name) {
        for (const auto& p : group)
            if (p.name == name) return p;
        throw Error("unknown parameter: " + name);
    }

    std::vector<Param<T>*> all_params() {
        std::vector<Param<T>*> out;
        for (auto* group : {&enc, &dec, &proj, &clf})
            for (auto& p : *group) out.push_back(&p);
        return out;
    }

private:
    static bool is_head(const std::string& name) {
        return name == "enc.mu.w" || name == "enc.logvar.w" || name == "dec.tconv0.w" ||
               name == "proj.fc2.w" || name == "clf.fc2.w";
    }

    void add(std::vector<Param<T>>& group, std::string name, std::vector<int> shape) {
        Param<T> p;
        p.name = std::move(name);
        p.w = Tensor<T>(shape);
        p.g = Tensor<T>(std::move(shape));
        group.push_back(std::move(p));
    }

    std::vector<int> lens_;
    std::vector<int> chans_;
};

}  // namespace vacda
