#pragma once

// Line-format helpers shared by the task and checkpoint parsers.

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mtplab/error.hpp"

namespace mtplab::text {

struct Piece {
  std::string_view text;
  std::size_t offset = 0;  // into the original line
};

inline std::vector<Piece> split(Piece whole, std::string_view sep) {
  std::vector<Piece> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t hit = whole.text.find(sep, begin);
    if (hit == std::string_view::npos) {
      out.push_back({whole.text.substr(begin), whole.offset + begin});
      return out;
    }
    out.push_back({whole.text.substr(begin, hit - begin), whole.offset + begin});
    begin = hit + sep.size();
  }
}

// Splits at the first occurrence of sep; throws if it is missing.
inline std::pair<Piece, Piece> split_once(Piece whole, std::string_view sep) {
  const std::size_t hit = whole.text.find(sep);
  if (hit == std::string_view::npos) {
    throw ParseError(whole.offset, "missing separator '" + std::string(sep) + "'");
  }
  return {{whole.text.substr(0, hit), whole.offset},
          {whole.text.substr(hit + sep.size()), whole.offset + hit + sep.size()}};
}

template <typename Int>
Int parse_int(Piece p) {
  Int value{};
  const char* first = p.text.data();
  const char* last = first + p.text.size();
  if (p.text.empty()) throw ParseError(p.offset, "expected an integer, found nothing");
  if (p.text.front() == '+') throw ParseError(p.offset, "unexpected '+'");
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(p.offset, "expected an integer, found '" + std::string(p.text) + "'");
  }
  return value;
}

template <typename Int>
std::vector<Int> parse_int_list(Piece p, std::string_view sep = ",") {
  std::vector<Int> out;
  for (const Piece& item : split(p, sep)) out.push_back(parse_int<Int>(item));
  return out;
}

template <typename Range>
std::string join(const Range& values, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& v : values) {
    if (!first) out += sep;
    out += std::to_string(v);
    first = false;
  }
  return out;
}

// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, std::string_view what) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(Errc::parse, std::string(what) + ": bad number '" + std::string(s) + "'");
  }
  return x;
}

}  // namespace mtplab::text
