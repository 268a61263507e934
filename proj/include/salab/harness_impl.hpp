#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>

namespace salab {

template <typename T>
std::vector<T> parallel_map(int count, int workers, const std::function<T(int)>& fn) {
    std::vector<std::optional<T>> slots(static_cast<std::size_t>(std::max(count, 0)));
    std::vector<std::exception_ptr> errors(slots.size());
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                slots[static_cast<std::size_t>(i)].emplace(fn(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int threads = std::clamp(workers, 1, std::max(count, 1));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    std::vector<T> out;
    out.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (errors[i]) {
            std::rethrow_exception(errors[i]);
        }
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

} // namespace salab
