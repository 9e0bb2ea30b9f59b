#pragma once

#include <cstddef>
#include <functional>

// Index-parallel loop for embarrassingly parallel work (sampling, per-case
// evaluation). Callers must make fn(i) independent of execution order; random
// work derives a fresh stream per index. PROBMOTION_THREADS caps the worker
// count (values <= 1 force serial execution).

namespace probmotion {

std::size_t thread_budget();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace probmotion
