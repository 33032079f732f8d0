#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vacda/core/errors.hpp"
#include "vacda/core/tensor.hpp"
#include "vacda/kernels/kernels.hpp"

// Training objectives.  Forward functions return scalars; backward functions
// ACCUMULATE into the supplied gradient buffers (several losses share the
// same upstream tensors, e.g. both contrastive losses touch the projections).

namespace vacda::losses {

enum class SupconForm { kPositiveFraction, kPaperLiteral };

template <typename T>
struct LossBreakdown {
    T recon = 0;
    T kl = 0;
    T con_self = 0;
    T con_sup = 0;
    T clf = 0;
    T total = 0;
    T recon_weight = 1;
    T temperature = 0;
};

// Mean over all elements of the squared reconstruction error.
template <typename T>
T recon_loss(const Tensor<T>& x, const Tensor<T>& x_hat) {
    if (!x.same_shape(x_hat)) throw ShapeError("recon_loss: x and x_hat shapes differ");
    const long long n = x.numel();
    T acc = 0;
    for (long long i = 0; i < n; ++i) {
        T d = x_hat.v[static_cast<std::size_t>(i)] - x.v[static_cast<std::size_t>(i)];
        acc += d * d;
    }
    return acc / static_cast<T>(n);
}

template <typename T>
void recon_loss_backward(const Tensor<T>& x, const Tensor<T>& x_hat, T upstream,
                         Tensor<T>& dx_hat) {
    const long long n = x.numel();
    const T c = upstream * static_cast<T>(2) / static_cast<T>(n);
    for (long long i = 0; i < n; ++i)
        dx_hat.v[static_cast<std::size_t>(i)] +=
            c * (x_hat.v[static_cast<std::size_t>(i)] - x.v[static_cast<std::size_t>(i)]);
}

// KL(N(mu, diag(exp(log_var))) || N(0, I)) averaged over the batch.
template <typename T>
T kl_loss(const Tensor<T>& mu, const Tensor<T>& log_var) {
    if (!mu.same_shape(log_var)) throw ShapeError("kl_loss: mu and log_var shapes differ");
    const int B = mu.dim(0), L = mu.dim(1);
    T acc = 0;
    for (int b = 0; b < B; ++b)
        for (int i = 0; i < L; ++i) {
            T m = mu.at(b, i), lv = log_var.at(b, i);
            acc += static_cast<T>(0.5) * (m * m + std::exp(lv) - static_cast<T>(1) - lv);
        }
    return acc / static_cast<T>(B);
}

template <typename T>
void kl_loss_backward(const Tensor<T>& mu, const Tensor<T>& log_var, T upstream,
                      Tensor<T>& dmu, Tensor<T>& dlog_var) {
    const int B = mu.dim(0), L = mu.dim(1);
    const T c = upstream / static_cast<T>(B);
    for (int b = 0; b < B; ++b)
        for (int i = 0; i < L; ++i) {
            dmu.at(b, i) += c * mu.at(b, i);
            dlog_var.at(b, i) +=
                c * static_cast<T>(0.5) * (std::exp(log_var.at(b, i)) - static_cast<T>(1));
        }
}

// L_ij = 1 iff labels[i] == labels[j]; diagonal kept at 0 since every use
// excludes self-pairs.
inline Tensor<unsigned char> pair_label_matrix(const std::vector<int>& labels) {
    const int n = static_cast<int>(labels.size());
    Tensor<unsigned char> m({n, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m.at(i, j) = (i != j && labels[i] == labels[j]) ? 1 : 0;
    return m;
}

namespace detail {

// log sum_{k != i} exp(s_ik / tau), computed with a max shift.
template <typename T>
T row_lse_excl_self(const T* srow, int n, int i, T tau) {
    T mx = -std::numeric_limits<T>::infinity();
    for (int k = 0; k < n; ++k)
        if (k != i && srow[k] / tau > mx) mx = srow[k] / tau;
    T sum = 0;
    for (int k = 0; k < n; ++k)
        if (k != i) sum += std::exp(srow[k] / tau - mx);
    return std::log(sum) + mx;
}

}  // namespace detail

// NT-Xent over 2N rows where row i and row (i+N) mod 2N are the two views of
// one instance.  Rows are expected unit-norm; similarity is the dot product.
template <typename T>
T ntxent_loss(const Tensor<T>& r, T temperature) {
    if (temperature <= 0) throw ConfigError("ntxent_loss: temperature must be > 0");
    const int n = r.dim(0), d = r.dim(1);
    if (n < 2 || n % 2 != 0) throw ShapeError("ntxent_loss: row count must be even and >= 2");
    const int half = n / 2;
    Tensor<T> sim({n, n});
    kernels::gram(r.data(), sim.data(), n, d);
    T acc = 0;
    for (int i = 0; i < n; ++i) {
        const int j = (i + half) % n;
        const T* row = sim.data() + static_cast<std::size_t>(i) * n;
        acc += detail::row_lse_excl_self(row, n, i, temperature) - row[j] / temperature;
    }
    return acc / static_cast<T>(n);
}

template <typename T>
void ntxent_loss_backward(const Tensor<T>& r, T temperature, T upstream, Tensor<T>& dr) {
    const int n = r.dim(0), d = r.dim(1);
    const int half = n / 2;
    Tensor<T> sim({n, n});
    kernels::gram(r.data(), sim.data(), n, d);
    Tensor<T> g({n, n});
    const T c = upstream / (temperature * static_cast<T>(n));
    for (int i = 0; i < n; ++i) {
        const int j = (i + half) % n;
        const T* row = sim.data() + static_cast<std::size_t>(i) * n;
        const T lse = detail::row_lse_excl_self(row, n, i, temperature);
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            T p = std::exp(row[k] / temperature - lse);
            g.at(i, k) = c * (p - (k == j ? static_cast<T>(1) : static_cast<T>(0)));
        }
    }
    Tensor<T> scratch({n, d});
    kernels::gram_backward(g.data(), r.data(), scratch.data(), n, d);
    for (long long i = 0; i < dr.numel(); ++i)
        dr.v[static_cast<std::size_t>(i)] += scratch.v[static_cast<std::size_t>(i)];
}

// Supervised contrastive loss over labelled rows.  The default form scores
// each anchor by the fraction of softmax mass on its positives; the literal
// form adds the negative-fraction log term as printed in some write-ups.
// Anchors without a positive (and, in the literal form, without a negative)
// are skipped; a batch where no anchor qualifies is an error.
template <typename T>
T supcon_loss(const Tensor<T>& r, const std::vector<int>& labels, T temperature,
              SupconForm form = SupconForm::kPositiveFraction) {
    if (temperature <= 0) throw ConfigError("supcon_loss: temperature must be > 0");
    const int n = r.dim(0), d = r.dim(1);
    if (n < 2) throw ShapeError("supcon_loss: need at least two rows");
    if (static_cast<int>(labels.size()) != n)
        throw ShapeError("supcon_loss: labels length must match row count");
    Tensor<T> sim({n, n});
    kernels::gram(r.data(), sim.data(), n, d);
    T acc = 0;
    int eligible = 0;
    for (int i = 0; i < n; ++i) {
        const T* row = sim.data() + static_cast<std::size_t>(i) * n;
        T mx = -std::numeric_limits<T>::infinity();
        for (int k = 0; k < n; ++k)
            if (k != i && row[k] / temperature > mx) mx = row[k] / temperature;
        T pos = 0, neg = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            T e = std::exp(row[k] / temperature - mx);
            if (labels[k] == labels[i])
                pos += e;
            else
                neg += e;
        }
        if (pos <= 0) continue;
        if (form == SupconForm::kPaperLiteral && neg <= 0) continue;
        T total = pos + neg;
        T term = std::log(total) - std::log(pos);
        if (form == SupconForm::kPaperLiteral) term += std::log(total) - std::log(neg);
        acc += term;
        ++eligible;
    }
    if (eligible == 0)
        throw DataError("supcon_loss: degenerate batch, no anchor has a positive pair");
    return acc / static_cast<T>(eligible);
}

template <typename T>
void supcon_loss_backward(const Tensor<T>& r, const std::vector<int>& labels,
                          T temperature, SupconForm form, T upstream, Tensor<T>& dr) {
    const int n = r.dim(0), d = r.dim(1);
    Tensor<T> sim({n, n});
    kernels::gram(r.data(), sim.data(), n, d);
    // first pass: count eligible anchors (the mean divisor)
    int eligible = 0;
    for (int i = 0; i < n; ++i) {
        bool has_pos = false, has_neg = false;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            (labels[k] == labels[i] ? has_pos : has_neg) = true;
        }
        if (has_pos && (form != SupconForm::kPaperLiteral || has_neg)) ++eligible;
    }
    if (eligible == 0)
        throw DataError("supcon_loss: degenerate batch, no anchor has a positive pair");
    Tensor<T> g({n, n});
    const T c = upstream / (temperature * static_cast<T>(eligible));
    for (int i = 0; i < n; ++i) {
        const T* row = sim.data() + static_cast<std::size_t>(i) * n;
        T mx = -std::numeric_limits<T>::infinity();
        for (int k = 0; k < n; ++k)
            if (k != i && row[k] / temperature > mx) mx = row[k] / temperature;
        T pos = 0, neg = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            T e = std::exp(row[k] / temperature - mx);
            if (labels[k] == labels[i])
                pos += e;
            else
                neg += e;
        }
        if (pos <= 0) continue;
        if (form == SupconForm::kPaperLiteral && neg <= 0) continue;
        const T total = pos + neg;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            T e = std::exp(row[k] / temperature - mx);
            bool is_pos = labels[k] == labels[i];
            // d/ds of [log total - log pos]; literal form adds d of
            // [log total - log neg]
            T grad = e / total - (is_pos ? e / pos : static_cast<T>(0));
            if (form == SupconForm::kPaperLiteral)
                grad += e / total - (is_pos ? static_cast<T>(0) : e / neg);
            g.at(i, k) = c * grad;
        }
    }
    Tensor<T> scratch({n, d});
    kernels::gram_backward(g.data(), r.data(), scratch.data(), n, d);
    for (long long i = 0; i < dr.numel(); ++i)
        dr.v[static_cast<std::size_t>(i)] += scratch.v[static_cast<std::size_t>(i)];
}

namespace detail {

template <typename T>
T softmax_xent_row(const T* logits, int n_classes, int label) {
    T mx = logits[0];
    for (int c = 1; c < n_classes; ++c)
        if (logits[c] > mx) mx = logits[c];
    T sum = 0;
    for (int c = 0; c < n_classes; ++c) sum += std::exp(logits[c] - mx);
    return std::log(sum) + mx - logits[label];
}

}  // namespace detail

// Eq-style two-view cross entropy: per instance the CE of the original view
// and the CE of the augmented view are summed, then averaged over the batch.
template <typename T>
T classifier_loss(const Tensor<T>& logits, const Tensor<T>& logits_aug,
                  const std::vector<int>& labels) {
    if (!logits.same_shape(logits_aug))
        throw ShapeError("classifier_loss: view logits shapes differ");
    const int B = logits.dim(0), C = logits.dim(1);
    if (static_cast<int>(labels.size()) != B)
        throw ShapeError("classifier_loss: labels length must match batch");
    T acc = 0;
    for (int b = 0; b < B; ++b) {
        if (labels[b] < 0 || labels[b] >= C)
            throw DataError("classifier_loss: label out of range: " +
                            std::to_string(labels[b]));
        acc += detail::softmax_xent_row(logits.data() + static_cast<std::size_t>(b) * C,
                                        C, labels[b]);
        acc += detail::softmax_xent_row(
            logits_aug.data() + static_cast<std::size_t>(b) * C, C, labels[b]);
    }
    return acc / static_cast<T>(B);
}

template <typename T>
void classifier_loss_backward(const Tensor<T>& logits, const Tensor<T>& logits_aug,
                              const std::vector<int>& labels, T upstream,
                              Tensor<T>& dlogits, Tensor<T>& dlogits_aug) {
    const int B = logits.dim(0), C = logits.dim(1);
    const T c0 = upstream / static_cast<T>(B);
    auto view = [&](const Tensor<T>& lg, Tensor<T>& dlg) {
        for (int b = 0; b < B; ++b) {
            const T* row = lg.data() + static_cast<std::size_t>(b) * C;
            T mx = row[0];
            for (int c = 1; c < C; ++c)
                if (row[c] > mx) mx = row[c];
            T sum = 0;
            for (int c = 0; c < C; ++c) sum += std::exp(row[c] - mx);
            for (int c = 0; c < C; ++c) {
                T p = std::exp(row[c] - mx) / sum;
                dlg.at(b, c) += c0 * (p - (c == labels[b] ? static_cast<T>(1) : static_cast<T>(0)));
            }
        }
    };
    view(logits, dlogits);
    view(logits_aug, dlogits_aug);
}

// Combines the pretraining parts and applies the ablation switch.  Throws if
// any part is non-finite, naming the offending component.
template <typename T>
LossBreakdown<T> total_pretrain_loss(T recon, T kl, T con_self, T con_sup,
                                     T recon_weight, T temperature,
                                     bool contrastive_on) {
    LossBreakdown<T> out;
    out.recon = recon;
    out.kl = kl;
    out.con_self = contrastive_on ? con_self : static_cast<T>(0);
    out.con_sup = contrastive_on ? con_sup : static_cast<T>(0);
    out.recon_weight = recon_weight;
    out.temperature = temperature;
    out.total = recon_weight * out.recon + out.kl + out.con_self + out.con_sup;
    const struct {
        const char* name;
        T value;
    } parts[] = {{"recon", out.recon},     {"kl", out.kl},
                 {"con_self", out.con_self}, {"con_sup", out.con_sup},
                 {"total", out.total}};
    for (const auto& p : parts)
        if (!std::isfinite(static_cast<double>(p.value)))
            throw NumericError(std::string("non-finite loss component: ") + p.name);
    return out;
}

}  // namespace vacda::losses
