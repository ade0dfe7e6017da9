#include "cascade/log.hpp"

#include <iostream>
#include <mutex>

namespace cascade {
namespace {

std::mutex g_mutex;
WarningSink g_sink = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_mutex);
  WarningSink old = std::move(g_sink);
  g_sink = std::move(sink);
  return old;
}

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (g_sink) g_sink(message);
}

}  // namespace cascade
