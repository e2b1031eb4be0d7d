#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace robust_scatter {

/// Worker count: explicit request, else ROBUST_SCATTER_THREADS, else 1.
inline std::size_t resolve_threads(std::size_t requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ROBUST_SCATTER_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value > 0) return static_cast<std::size_t>(value);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

/// Runs body(i) for i in [0, count). Each index must write only its own output
/// slot; the first exception thrown is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    threads = std::min(std::max<std::size_t>(threads, 1), std::max<std::size_t>(count, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Pairwise (tree) summation in a fixed order, independent of thread count.
inline double pairwise_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Mean and standard error of the mean (zero for a single value).
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(std::span<const double> values) {
    MeanStderr out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    out.mean = pairwise_sum(values) / n;
    if (values.size() < 2) return out;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    out.stderr_ = std::sqrt(var / n);
    return out;
}

}  // namespace robust_scatter
