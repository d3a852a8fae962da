#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace vfms::csv {

/// Shortest round-trip decimal; infinities print as `inf` / `-inf`.
inline std::string number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

/// `# key=value` comment lines that open every CSV the tools write.
class Header {
 public:
  Header& add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Header& add(std::string key, double value) { return add(std::move(key), number(value)); }
  Header& add(std::string key, std::uint64_t value) { return add(std::move(key), std::to_string(value)); }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << "# " << k << '=' << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace vfms::csv
