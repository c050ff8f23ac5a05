#include "nvmfp/text_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nvmfp/error.hpp"

namespace nvmfp::text {

namespace {

[[noreturn]] void bad_number(std::string_view s, std::size_t line) {
  std::string msg = "invalid number '" + std::string(s) + "'";
  if (line > 0) throw ParseError(msg, line);
  throw ParseError(msg);
}

template <typename T>
T parse_integral(std::string_view s, std::size_t line) {
  s = trim(s);
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) bad_number(s, line);
  return v;
}

}  // namespace

std::string fixed(double v, int decimals) {
  std::array<char, 128> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, decimals);
  if (ec != std::errc{}) return std::to_string(v);
  std::string out(buf.data(), ptr);
  if (out.starts_with("-") && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string sig(double v, int digits) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, digits);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.empty()) bad_number(s, line);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) bad_number(s, line);
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t line) {
  return parse_integral<std::int64_t>(s, line);
}

std::uint64_t parse_uint(std::string_view s, std::size_t line) {
  return parse_integral<std::uint64_t>(s, line);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> lines(std::string_view content) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t pos = content.find('\n', start);
    if (pos == std::string_view::npos) pos = content.size();
    std::string_view ln = content.substr(start, pos - start);
    if (!ln.empty() && ln.back() == '\r') ln.remove_suffix(1);
    out.emplace_back(ln);
    start = pos + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) throw IoError("'" + path.string() + "' is a directory");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failure on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace nvmfp::text
