#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtplab {

enum class Errc {
  dimension,
  capacity,
  parse,
  singular_loss,
  evaluation,
  generation,
  encoding,
  integration,
  divergence,
  io,
  invalid_argument,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Parse failures carry the byte offset into the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error(Errc::parse, what + " (at column " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace mtplab
