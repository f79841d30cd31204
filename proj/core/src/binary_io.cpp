#include "binary_io.hpp"

#include <fstream>
#include <iterator>

#include "noveltyrank/error.hpp"

namespace noveltyrank::detail {

std::uint64_t ByteReader::get(int width) {
  if (remaining() < static_cast<std::size_t>(width)) {
    throw ParseError("truncated data at byte " + std::to_string(pos_));
  }
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += width;
  return v;
}

std::string ByteReader::raw(std::size_t n) {
  if (remaining() < n) throw ParseError("truncated data at byte " + std::to_string(pos_));
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace noveltyrank::detail
