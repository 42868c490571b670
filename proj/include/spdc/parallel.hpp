#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace spdc {

// Thread count from an explicit request, else SPDC_THREADS, else 1.
int resolve_thread_count(int requested);

// Evaluates make(t) for t in [0, n) on up to `threads` workers and feeds the
// results to combine(t, result) strictly in index order. Results depend only
// on how work is split into tasks, never on the thread count.
template <class Make, class Combine>
void ordered_reduce(std::size_t n_tasks, int threads, Make&& make, Combine&& combine) {
    using Partial = decltype(make(std::size_t{0}));
    if (threads <= 1 || n_tasks <= 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) combine(t, make(t));
        return;
    }
    const std::size_t wave = static_cast<std::size_t>(threads);
    for (std::size_t base = 0; base < n_tasks; base += wave) {
        const std::size_t count = std::min(wave, n_tasks - base);
        std::vector<std::optional<Partial>> slots(count);
        std::vector<std::exception_ptr> errors(count);
        {
            std::vector<std::jthread> workers;
            workers.reserve(count);
            for (std::size_t j = 0; j < count; ++j)
                workers.emplace_back([&, j] {
                    try {
                        slots[j].emplace(make(base + j));
                    } catch (...) {
                        errors[j] = std::current_exception();
                    }
                });
        }
        for (std::size_t j = 0; j < count; ++j) {
            if (errors[j]) std::rethrow_exception(errors[j]);
            combine(base + j, std::move(*slots[j]));
        }
    }
}

// Index-parallel loop where every iteration writes its own output slot.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    ordered_reduce(
        n, threads,
        [&](std::size_t i) {
            body(i);
            return 0;
        },
        [](std::size_t, int) {});
}

}  // namespace spdc
