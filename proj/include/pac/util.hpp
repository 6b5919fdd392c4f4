#pragma once

#include "pac/types.hpp"

#include <cstdio>
#include <functional>
#include <string>

namespace pac {

/// Thread budget for parallel fan-out: PARETO_AVGCOST_THREADS, where 0 or an
/// unset variable means hardware concurrency.
int thread_budget();

/// Runs f(i) for i in [0, n) across the thread budget. Chunks are assigned by
/// index, so writes into preallocated per-index slots merge deterministically.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

/// Locale-independent shortest-ish decimal formatting, stable across runs.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content);

}  // namespace pac
