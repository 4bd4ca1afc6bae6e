// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "luxprobe/core.h"

namespace luxprobe::detail {

// Runs body(i) for i in [0, count) across worker_threads() threads using a
// static contiguous partition. Each index is processed by exactly one thread,
// so results never depend on the schedule as long as body(i) only writes
// state owned by index i.
template <typename Body>
void parallel_for(int count, Body&& body) {
    const int threads = static_cast<int>(std::min<unsigned>(worker_threads(), static_cast<unsigned>(std::max(count, 1))));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (int i = begin; i < end; ++i) body(i);
        });
    }
}

}  // namespace luxprobe::detail
