#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fracheat {

/// Worker count resolution: explicit > FRACHEAT_WORKERS env > 1.
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FRACHEAT_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

template <typename R>
struct FarmOutcome {
    std::vector<std::optional<R>> results;  // indexed by replica
    long failed = 0;
    std::vector<std::string> failure_messages;
};

/// Runs `work(ctx, replica)` for replica = 0..replicas-1 on a small worker
/// pool. Results land in a replica-indexed vector, so any later reduction
/// is independent of the worker count and scheduling order. Per-replica
/// exceptions are recorded, not propagated.
template <typename R, typename MakeCtx, typename Work>
FarmOutcome<R> farm(long replicas, int workers, MakeCtx make_ctx, Work work) {
    FarmOutcome<R> out;
    out.results.resize(replicas);
    std::vector<std::string> errors(replicas);
    std::atomic<long> next{0};
    const int nw = std::min<long>(resolve_workers(workers), replicas);
    auto runner = [&]() {
        auto ctx = make_ctx();
        for (;;) {
            const long r = next.fetch_add(1);
            if (r >= replicas) break;
            try {
                out.results[r] = work(ctx, r);
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        }
    };
    if (nw <= 1) {
        runner();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nw);
        for (int i = 0; i < nw; ++i) pool.emplace_back(runner);
        for (auto& th : pool) th.join();
    }
    for (long r = 0; r < replicas; ++r) {
        if (!out.results[r]) {
            ++out.failed;
            if (!errors[r].empty() && out.failure_messages.size() < 8)
                out.failure_messages.push_back(errors[r]);
        }
    }
    return out;
}

}  // namespace fracheat
