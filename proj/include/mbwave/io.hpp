#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace mbwave {

// Shortest-safe round-trip form: 17 significant digits.
std::string fmt17(double v);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

// MBWAVE_THREADS if set and positive, else hardware concurrency (at least 1).
unsigned worker_count();

// Runs body(i) for i in [0, count) on worker_count() threads. Each index runs exactly once;
// results must be written to per-index slots so the output does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mbwave
