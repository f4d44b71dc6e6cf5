#ifndef SPDC_PARALLEL_HPP
#define SPDC_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace spdc
{

// Worker cap for parallel_for. 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index must write only its own output
// slot; reductions happen afterwards in index order, so results do not
// depend on the worker count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spdc

#endif  // SPDC_PARALLEL_HPP
