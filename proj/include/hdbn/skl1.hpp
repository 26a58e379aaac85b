#pragma once

// SKL1 binary skeleton format:
//   "SKL1" | u32 M | u32 T | u32 V | u32 C | u32 label (0xFFFFFFFF = none)
//   | M*T*V*C float32 values in [m][t][v][c] order
// All integers and floats little-endian.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "hdbn/error.hpp"
#include "hdbn/skeleton.hpp"

namespace hdbn {

inline constexpr std::array<char, 4> kSkl1Magic = {'S', 'K', 'L', '1'};
inline constexpr std::uint32_t kSkl1NoLabel = 0xFFFFFFFFu;
inline constexpr std::size_t kSkl1HeaderBytes = 4 + 5 * 4;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_skl1(const SkeletonSequence& seq) {
  if (seq.data.size() != static_cast<std::size_t>(seq.persons) * seq.frames * seq.joints * seq.channels) {
    throw DimensionError("sequence payload does not match its shape");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kSkl1HeaderBytes + seq.data.size() * 4);
  out.insert(out.end(), kSkl1Magic.begin(), kSkl1Magic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(seq.persons));
  detail::put_u32(out, static_cast<std::uint32_t>(seq.frames));
  detail::put_u32(out, static_cast<std::uint32_t>(seq.joints));
  detail::put_u32(out, static_cast<std::uint32_t>(seq.channels));
  detail::put_u32(out, seq.label ? static_cast<std::uint32_t>(*seq.label) : kSkl1NoLabel);
  for (float x : seq.data) detail::put_u32(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

// Decodes one SKL1 record. The modality is not stored in the file, so the
// caller states what the payload holds.
inline SkeletonSequence decode_skl1(std::span<const std::uint8_t> bytes, Modality modality = Modality::J) {
  if (bytes.size() < kSkl1HeaderBytes) throw FormatError("SKL1 header truncated");
  if (std::memcmp(bytes.data(), kSkl1Magic.data(), kSkl1Magic.size()) != 0) throw FormatError("bad SKL1 magic");

  const std::uint8_t* p = bytes.data() + 4;
  const std::uint32_t m = detail::get_u32(p);
  const std::uint32_t t = detail::get_u32(p + 4);
  const std::uint32_t v = detail::get_u32(p + 8);
  const std::uint32_t c = detail::get_u32(p + 12);
  const std::uint32_t label = detail::get_u32(p + 16);

  if (m > 0x7FFFFFFF || t > 0x7FFFFFFF || v > 0x7FFFFFFF || c > 0x7FFFFFFF) {
    throw FormatError("SKL1 extent out of range");
  }
  // Multiply in 128 bits so hostile headers cannot wrap the size check.
  const unsigned __int128 count = static_cast<unsigned __int128>(m) * t * v * c;
  const unsigned __int128 expected = kSkl1HeaderBytes + count * 4;
  if (bytes.size() < expected) throw FormatError("SKL1 payload truncated");
  if (bytes.size() > expected) throw FormatError("SKL1 payload has trailing bytes");

  SkeletonSequence seq = SkeletonSequence::zeros(static_cast<int>(m), static_cast<int>(t), static_cast<int>(v),
                                                 static_cast<int>(c), modality);
  if (label != kSkl1NoLabel) seq.label = static_cast<int>(label);
  const std::uint8_t* payload = bytes.data() + kSkl1HeaderBytes;
  for (std::size_t i = 0; i < seq.data.size(); ++i) {
    seq.data[i] = std::bit_cast<float>(detail::get_u32(payload + 4 * i));
  }
  return seq;
}

inline void write_skl1(const std::string& path, const SkeletonSequence& seq) {
  const auto bytes = encode_skl1(seq);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline SkeletonSequence read_skl1(const std::string& path, Modality modality = Modality::J) {
  const auto bytes = read_file_bytes(path);
  SkeletonSequence seq = decode_skl1(bytes, modality);
  return seq;
}

}  // namespace hdbn
