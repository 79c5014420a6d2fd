#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "creatures/rational.hpp"

namespace creatures {

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// Stable double formatting for certificates (shortest round-trip form).
std::string double_str(double v);

// Indented key/value text builder. Every certificate and dump in the engine
// is rendered through this so that replays are byte-identical.
class CertWriter {
 public:
  void kv(std::string_view key, std::string_view value);
  void kv(std::string_view key, const char* value) { kv(key, std::string_view(value)); }
  void kv(std::string_view key, const std::string& value) { kv(key, std::string_view(value)); }
  void kv(std::string_view key, bool v) { kv(key, v ? "true" : "false"); }
  template <typename T,
            std::enable_if_t<std::is_integral_v<T> && !std::is_same_v<T, bool>, int> = 0>
  void kv(std::string_view key, T v) {
    kv(key, std::to_string(v));
  }
  void kv(std::string_view key, double v) { kv(key, double_str(v)); }
  void kv(std::string_view key, const Int& v) { kv(key, v.get_str()); }
  void kv(std::string_view key, const Rat& v) { kv(key, rat_str(v)); }
  void open(std::string_view key);
  void close();
  std::string str() const { return out_.str(); }
  std::uint64_t content_hash() const { return fnv1a64(out_.str()); }

 private:
  void indent();
  std::ostringstream out_;
  int depth_ = 0;
};

}  // namespace creatures
