#pragma once

#include <string>
#include <vector>

#include "vacda/core/errors.hpp"

namespace vacda {

struct ConvBlockSpec {
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
};

// Architecture description for all four networks.  The encoder is a stack of
// strided 1-D convolutions with two linear heads; the decoder mirrors it with
// transposed convolutions; projector and classifier are 2-layer MLPs.
struct NetSpec {
    int latent_dim = 64;
    int projection_dim = 32;
    std::vector<ConvBlockSpec> conv_blocks = {{32, 9, 2}, {64, 9, 2}, {128, 9, 2}};
    int classifier_hidden = 128;
    int n_classes = 0;
    int in_channels = 3;
    int window_size = 100;

    void validate() const {
        if (n_classes < 2) throw ConfigError("net.n_classes must be >= 2");
        if (latent_dim < 1 || projection_dim < 1 || classifier_hidden < 1 ||
            in_channels < 1 || window_size < 1)
            throw ConfigError("net: all dimensions must be >= 1");
        if (conv_blocks.empty()) throw ConfigError("net.conv_blocks must be non-empty");
        for (const auto& b : conv_blocks)
            if (b.out_channels < 1 || b.kernel < 1 || b.stride < 1)
                throw ConfigError("net.conv_blocks: channels, kernel, stride must be >= 1");
        encoder_lengths();  // throws if a block collapses the sequence
    }

    static int conv_out_len(int len, int kernel, int stride) {
        int pad = kernel / 2;
        return (len + 2 * pad - kernel) / stride + 1;
    }

    // Sequence lengths through the encoder: index 0 is the input window,
    // index i the output of block i-1.
    std::vector<int> encoder_lengths() const {
        std::vector<int> lens{window_size};
        for (const auto& b : conv_blocks) {
            int next = conv_out_len(lens.back(), b.kernel, b.stride);
            if (next < 1)
                throw ConfigError("net.conv_blocks: block reduces sequence length below 1 (window " +
                                  std::to_string(window_size) + ")");
            lens.push_back(next);
        }
        return lens;
    }

    // Channel counts: index 0 is in_channels, index i the output of block i-1.
    std::vector<int> encoder_channels() const {
        std::vector<int> ch{in_channels};
        for (const auto& b : conv_blocks) ch.push_back(b.out_channels);
        return ch;
    }

    int flat_dim() const {
        auto lens = encoder_lengths();
        return conv_blocks.back().out_channels * lens.back();
    }

    // Tiny configuration used throughout the test suites.
    static NetSpec tiny(int n_classes) {
        NetSpec s;
        s.latent_dim = 4;
        s.projection_dim = 4;
        s.conv_blocks = {{4, 3, 2}};
        s.classifier_hidden = 8;
        s.n_classes = n_classes;
        s.window_size = 16;
        return s;
    }
};

inline bool operator==(const ConvBlockSpec& a, const ConvBlockSpec& b) {
    return a.out_channels == b.out_channels && a.kernel == b.kernel && a.stride == b.stride;
}

inline bool operator==(const NetSpec& a, const NetSpec& b) {
    return a.latent_dim == b.latent_dim && a.projection_dim == b.projection_dim &&
           a.conv_blocks == b.conv_blocks && a.classifier_hidden == b.classifier_hidden &&
           a.n_classes == b.n_classes && a.in_channels == b.in_channels &&
           a.window_size == b.window_size;
}

}  // namespace vacda
