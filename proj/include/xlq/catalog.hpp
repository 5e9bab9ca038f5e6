#ifndef XLQ_CATALOG_HPP
#define XLQ_CATALOG_HPP

#include <cstdint>
#include <string>

namespace xlq {

// Deterministic synthetic book catalog for benchmarking: books with year
// attributes, repeated authors, titles, terminal and mixed-content reviews,
// plus occasional book2 records so weakly distinct shapes are exercised.
std::string generate_catalog(size_t target_bytes, uint64_t seed = 7);

} // namespace xlq

#endif
