#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "vacda/core/errors.hpp"

namespace vacda {

// Dense row-major tensor of rank 1..3.  Deliberately minimal: the kernels
// operate on raw pointers; this type only owns storage and checks shapes.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(static_cast<std::size_t>(numel()), T{});
    }
    Tensor(std::initializer_list<int> s) : Tensor(std::vector<int>(s)) {}

    long long numel() const {
        long long n = 1;
        for (int d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }

    T* data() { return v.data(); }
    const T* data() const { return v.data(); }

    T& at(int i) { return v[static_cast<std::size_t>(i)]; }
    const T& at(int i) const { return v[static_cast<std::size_t>(i)]; }

    T& at(int i, int j) { return v[static_cast<std::size_t>(i) * shape[1] + j]; }
    const T& at(int i, int j) const {
        return v[static_cast<std::size_t>(i) * shape[1] + j];
    }

    T& at(int i, int j, int k) {
        return v[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    const T& at(int i, int j, int k) const {
        return v[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }

    void fill(T x) {
        for (auto& e : v) e = x;
    }
    void zero() { fill(T{}); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<int>& want, const char* what) {
    if (t.shape != want) {
        std::string msg = std::string("shape mismatch for ") + what + ": got [";
        for (std::size_t i = 0; i < t.shape.size(); ++i)
            msg += (i ? "," : "") + std::to_string(t.shape[i]);
        msg += "] want [";
        for (std::size_t i = 0; i < want.size(); ++i)
            msg += (i ? "," : "") + std::to_string(want[i]);
        msg += "]";
        throw ShapeError(msg);
    }
}

}  // namespace vacda
