// Worker pool: environment override, index coverage, exception relay.

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <set>
#include <stdexcept>
#include <vector>

#include "mhdlab/parallel.hpp"

using namespace mhdlab;

namespace {
struct EnvGuard {
    std::string saved;
    bool had = false;
    EnvGuard() {
        if (const char* v = std::getenv("MHDLAB_WORKERS")) {
            saved = v;
            had = true;
        }
    }
    ~EnvGuard() {
        if (had)
            ::setenv("MHDLAB_WORKERS", saved.c_str(), 1);
        else
            ::unsetenv("MHDLAB_WORKERS");
    }
};
}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("worker count honours the environment") {
    const EnvGuard guard;
    ::setenv("MHDLAB_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    ::setenv("MHDLAB_WORKERS", "1", 1);
    CHECK(worker_count() == 1);
    // capped at 64; non-positive values fall back to the hardware default
    ::setenv("MHDLAB_WORKERS", "100000", 1);
    CHECK(worker_count() == 64);
    ::setenv("MHDLAB_WORKERS", "0", 1);
    CHECK(worker_count() >= 1);
    // garbage falls back to a sane positive default
    ::setenv("MHDLAB_WORKERS", "carrots", 1);
    CHECK(worker_count() >= 1);
    ::unsetenv("MHDLAB_WORKERS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("every index runs exactly once") {
    const EnvGuard guard;
    for (const char* workers : {"1", "4"}) {
        ::setenv("MHDLAB_WORKERS", workers, 1);
        const std::size_t count = 257;
        std::vector<std::atomic<int>> hits(count);
        for (auto& h : hits) h.store(0);
        parallel_for(count, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (std::size_t i = 0; i < count; ++i) CHECK(hits[i].load() == 1);
    }
}

TEST_CASE("zero tasks is a no-op") {
    std::atomic<int> calls{0};
    parallel_for(0, [&](std::size_t) { calls.fetch_add(1); });
    CHECK(calls.load() == 0);
}

TEST_CASE("results are independent of the worker count") {
    const EnvGuard guard;
    const std::size_t count = 64;
    const auto compute = [&]() {
        std::vector<double> out(count, 0.0);
        parallel_for(count, [&](std::size_t i) {
            double acc = 0.0;
            for (int k = 1; k <= 1000; ++k) acc += 1.0 / (static_cast<double>(i) + k);
            out[i] = acc;
        });
        return out;
    };
    ::setenv("MHDLAB_WORKERS", "1", 1);
    const auto serial = compute();
    ::setenv("MHDLAB_WORKERS", "4", 1);
    const auto threaded = compute();
    for (std::size_t i = 0; i < count; ++i) CHECK(serial[i] == threaded[i]);
}

TEST_CASE("exceptions propagate to the caller") {
    const EnvGuard guard;
    for (const char* workers : {"1", "4"}) {
        ::setenv("MHDLAB_WORKERS", workers, 1);
        std::atomic<int> done{0};
        CHECK_THROWS_WITH_AS(
            parallel_for(100,
                         [&](std::size_t i) {
                             if (i == 37) throw std::runtime_error("task 37 failed");
                             done.fetch_add(1);
                         }),
            "task 37 failed", std::runtime_error);
        CHECK(done.load() <= 99);
    }
}

}  // TEST_SUITE
