#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace speccav {

/// Run body(i) for i in [0, count) on up to `workers` threads. Indices are
/// handed out in increasing order; after a failure no new index starts, and the
/// exception of the lowest failing index is rethrown.
template<class Body>
void parallel_for(std::size_t count, int workers, Body&& body)
{
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (std::size_t i = next++; i < count && !failed; i = next++)
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };

    std::size_t nthreads = workers > 1 ? static_cast<std::size_t>(workers) : 1;
    if (nthreads > count)
        nthreads = count;
    if (nthreads <= 1)
    {
        run();
    }
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (std::size_t t = 0; t < nthreads; ++t)
            pool.emplace_back(run);
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace speccav
