#include "tod/core/bytes.hpp"

namespace tod {

void ByteWriter::str16(std::string_view s) {
  if (s.size() > 0xFFFF) throw Error(ErrorCode::Oversize, "string longer than 65535 bytes");
  u16(static_cast<std::uint16_t>(s.size()));
  out_.insert(out_.end(), s.begin(), s.end());
}

void ByteReader::need(std::size_t n) const {
  if (data_.size() - pos_ < n) throw Error(underflow_, "read past end of buffer");
}

bool ByteReader::boolean() {
  const std::uint8_t v = u8();
  if (v > 1) throw Error(ErrorCode::InvalidField, "boolean byte out of range");
  return v == 1;
}

std::string ByteReader::str16() {
  const std::uint16_t n = u16();
  auto raw = take(n);
  return std::string(reinterpret_cast<const char*>(raw.data()), raw.size());
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  need(n);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

}  // namespace tod
