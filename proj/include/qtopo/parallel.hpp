#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qtopo {

/// Number of worker threads: QTOPO_THREADS if set, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(chunk) for chunk in [0, n_chunks) on the worker pool. Chunk
/// boundaries are chosen by the caller, never by the thread count, so any
/// per-chunk result reduced in chunk order is bit-stable across thread counts.
void parallel_chunks(std::size_t n_chunks, const std::function<void(std::size_t)>& fn);

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> values);

/// Splits [0, n) into chunks of a fixed size and returns the per-chunk sums of
/// body(i), reduced pairwise. body must be thread-safe.
double parallel_sum(std::size_t n, std::size_t chunk, const std::function<double(std::size_t)>& body);

/// Deterministic 64-bit seed derivation (splitmix64 finalizer of seed ⊕ stream).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace qtopo
