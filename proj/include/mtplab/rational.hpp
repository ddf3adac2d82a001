#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace mtplab {

// Exact fraction over int64, always reduced with a positive denominator.
// Arithmetic throws Errc::evaluation on overflow or division by zero.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const;
  bool operator==(const Rational&) const = default;
  auto operator<=>(const Rational& other) const {
    return static_cast<__int128>(num_) * other.den_ <=> static_cast<__int128>(other.num_) * den_;
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

}  // namespace mtplab
