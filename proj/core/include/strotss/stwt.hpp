#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "strotss/tensor.hpp"

// Reader/writer for the "STWT" portable tensor container.
//
// Layout (all integers little-endian):
//   "STWT" | u32 version (=1) | u32 entry count
//   per entry:
//     u16 name length | UTF-8 name | u8 dtype (0 = f32) | u8 ndim |
//     ndim x u32 dims | f32 data |
//     u8 ndim (=1) | u32 length | f32 data        (trailing vector)
//
// Weight files store a conv kernel [Cout,Cin,3,3] and its bias [Cout] per
// entry. Activation files store a [C,H,W] map with an empty trailing vector.
namespace strotss::stwt {

inline constexpr char kMagic[4] = {'S', 'T', 'W', 'T'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 0;

struct Entry {
  std::string name;
  Tensor tensor;
  std::vector<float> trailing;
};

std::vector<Entry> read(const std::filesystem::path& path);
std::vector<Entry> parse(const std::vector<std::uint8_t>& bytes);

void write(const std::filesystem::path& path, const std::vector<Entry>& entries);
std::vector<std::uint8_t> serialize(const std::vector<Entry>& entries);

}  // namespace strotss::stwt
