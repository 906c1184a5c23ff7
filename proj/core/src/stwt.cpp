#include "strotss/stwt.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace strotss::stwt {
namespace {

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw IoError(std::string("STWT stream truncated while reading ") + what +
                    " at offset " + std::to_string(pos_));
    }
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }

  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(k)];
    pos_ += 4;
    return v;
  }

  std::vector<float> floats(std::size_t count, const char* what) {
    if (count > (bytes_.size() - pos_) / 4) need(count * 4, what);
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = std::bit_cast<float>(u32(what));
    }
    return out;
  }

  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xff));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void floats(std::span<const float> values) {
    for (float f : values) u32(std::bit_cast<std::uint32_t>(f));
  }
  void text(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

}  // namespace

std::vector<Entry> parse(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const std::string magic = r.text(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw FormatError("bad STWT magic '" + magic + "'");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw FormatError("unsupported STWT version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("entry count");
  std::vector<Entry> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    Entry entry;
    const std::uint16_t name_len = r.u16("name length");
    entry.name = r.text(name_len, "name");
    const std::uint8_t dtype = r.u8("dtype");
    if (dtype != kDtypeF32) {
      throw FormatError("entry '" + entry.name + "' has unsupported dtype " +
                        std::to_string(dtype));
    }
    const std::uint8_t ndim = r.u8("ndim");
    if (ndim == 0) {
      throw FormatError("entry '" + entry.name + "' has rank 0");
    }
    Shape shape;
    for (std::uint8_t k = 0; k < ndim; ++k) {
      const std::uint32_t d = r.u32("dims");
      if (d == 0) throw FormatError("entry '" + entry.name + "' has a zero extent");
      shape.push_back(d);
    }
    auto data = r.floats(shape_size(shape), "tensor data");
    entry.tensor = Tensor(std::move(shape), std::move(data));
    const std::uint8_t tdim = r.u8("trailing ndim");
    if (tdim != 1) {
      throw FormatError("entry '" + entry.name +
                        "' trailing vector must have ndim 1, got " +
                        std::to_string(tdim));
    }
    const std::uint32_t tlen = r.u32("trailing length");
    entry.trailing = r.floats(tlen, "trailing data");
    entries.push_back(std::move(entry));
  }
  if (!r.done()) {
    throw FormatError("unexpected trailing bytes after entry " +
                      std::to_string(count) + " at offset " +
                      std::to_string(r.pos()));
  }
  return entries;
}

std::vector<Entry> read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse(bytes);
}

std::vector<std::uint8_t> serialize(const std::vector<Entry>& entries) {
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const Entry& e : entries) {
    if (e.name.size() > 0xffff) throw FormatError("entry name too long");
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.text(e.name);
    w.u8(kDtypeF32);
    w.u8(static_cast<std::uint8_t>(e.tensor.rank()));
    for (std::size_t d : e.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
    w.floats(e.tensor.data());
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(e.trailing.size()));
    w.floats(e.trailing);
  }
  return w.take();
}

void write(const std::filesystem::path& path, const std::vector<Entry>& entries) {
  const auto bytes = serialize(entries);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace strotss::stwt
