#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace velopref {

// FNV-1a 64-bit. Used for manifest digests and config fingerprints;
// reproducibility bookkeeping, not cryptography.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);

std::string digest_hex(std::uint64_t digest);

}  // namespace velopref
