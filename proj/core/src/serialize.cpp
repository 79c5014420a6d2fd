#include "creatures/serialize.hpp"

#include <cstdio>
#include <stdexcept>

namespace creatures {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string double_str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CertWriter::indent() {
  for (int i = 0; i < depth_; ++i) out_ << "  ";
}

void CertWriter::kv(std::string_view key, std::string_view value) {
  indent();
  out_ << key << ": " << value << "\n";
}

void CertWriter::open(std::string_view key) {
  indent();
  out_ << key << ":\n";
  ++depth_;
}

void CertWriter::close() {
  if (depth_ == 0) throw std::logic_error("CertWriter::close without open");
  --depth_;
}

}  // namespace creatures
