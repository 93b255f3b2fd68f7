#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace otac::csv {

// Shortest decimal text that round-trips the exact double.
inline std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad numeric field: '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad integer field: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void line(const std::string& s) {
    out_ << s << '\n';
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

// Reads all non-empty lines; the caller decides what to do with the header.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace otac::csv
