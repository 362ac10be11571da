#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace ebl::scenario {

/// Applies fn to every input on a small jthread pool. Results keep the input
/// order; the first exception (by input index) is rethrown after all workers join.
template <class In, class Fn>
auto parallel_map(const std::vector<In>& inputs, Fn fn, unsigned workers = 0) {
  using Out = decltype(fn(inputs.front()));
  std::vector<std::optional<Out>> slots(inputs.size());
  std::vector<std::exception_ptr> errors(inputs.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, inputs.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < inputs.size(); i = next++) {
          try {
            slots[i].emplace(fn(inputs[i]));
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Out> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace ebl::scenario
