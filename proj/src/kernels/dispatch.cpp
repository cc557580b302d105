// Copyright (C) 2026 The Pruner Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "pruner/kernels.hpp"

namespace pruner::kernels {
namespace {

const KernelTable* initial_table() noexcept {
    const KernelTable* avx2 = avx2_table();
    const char* pinned = std::getenv("PRUNER_SIMD");
    if (pinned && std::string_view(pinned) == "scalar") return &scalar_table();
    if (avx2 && cpu_has_avx2()) return avx2;
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

Isa select(Isa isa) noexcept {
    const KernelTable* table = &scalar_table();
    if (isa == Isa::Avx2 && avx2_table() && cpu_has_avx2()) table = avx2_table();
    slot().store(table, std::memory_order_release);
    return table->isa;
}

}  // namespace pruner::kernels
