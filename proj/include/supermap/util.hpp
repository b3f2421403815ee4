#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace supermap {

// FNV-1a 64-bit digest, hex-encoded. Used to fingerprint configs and
// serialized parameter blocks so artifacts can be matched to the run
// that produced them.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::string digest_hex(std::span<const unsigned char> bytes);
std::string digest_hex(const std::string& text);

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

// Raw little-endian byte view of a double vector (and back).
std::vector<unsigned char> doubles_to_bytes(std::span<const double> values);
std::vector<double> bytes_to_doubles(std::span<const unsigned char> bytes);

}  // namespace supermap
