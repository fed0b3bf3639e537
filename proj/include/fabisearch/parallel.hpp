#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>

namespace fabisearch {

/// Stateless 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a master seed and a path of integers.
///
/// The mapping is a pure function of its arguments, so any work item can
/// compute its own seed regardless of which thread runs it or in what order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Resolves a thread hint: >0 is taken as is, 0 means FABISEARCH_THREADS or
/// the hardware concurrency.
unsigned resolve_threads(int hint) noexcept;

/// Runs body(i) for i in [0, n). Work items must write only to their own
/// slot of a preallocated output; calls nested inside another parallel_for
/// run serially. Exceptions from any item are rethrown (the one with the
/// lowest index wins).
void parallel_for(std::size_t n, int thread_hint, const std::function<void(std::size_t)>& body);

}  // namespace fabisearch
