// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense double-precision kernels behind the trainable judge (batched logits and
// gradient reductions) and the hashed-unigram cosine. Each kernel has a scalar
// reference and an AVX2+FMA variant; the variant is chosen once at startup from
// CPUID and can be pinned with PRUNER_SIMD=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace pruner::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the AVX2 translation unit was not built for this target.
const KernelTable* avx2_table() noexcept;

bool cpu_has_avx2() noexcept;

/// Table used by the free functions below.
const KernelTable& active() noexcept;
/// Pins the dispatch; falls back to scalar when the request cannot be honoured.
/// Returns the ISA actually selected.
Isa select(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

/// y += alpha * x over the common length.
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

}  // namespace pruner::kernels
