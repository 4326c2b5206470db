#include "lexkit/hashing.hpp"

#include <fmt/format.h>

namespace lexkit {

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace lexkit
