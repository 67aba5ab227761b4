#include "clustervar/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace clustervar {

int workers_from_env() {
  const char* raw = std::getenv("CLUSTERVAR_THREADS");
  if (raw == nullptr) return 0;
  const std::string_view text(raw);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value <= 0) return 0;
  return value;
}

}  // namespace clustervar
