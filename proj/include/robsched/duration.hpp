#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace robsched {

// A task duration or point in time. Values that are exact multiples of 0.01 are kept
// as integer hundredths so that scenario data, replay arithmetic, and worst-case
// comparisons are exact; everything else falls back to a double with tolerance-based
// comparison. Sums/differences of exact values stay exact.
class Duration {
 public:
  Duration() : hund_(0), real_(0.0), exact_(true) {}

  static Duration exact_hundredths(int64_t h);
  static Duration from_tenths(int64_t t) { return exact_hundredths(t * 10); }
  static Duration from_real(double v);
  // Parses a decimal literal; at most two fractional digits yields an exact value.
  static Duration parse(const std::string& s);
  static Duration zero() { return Duration(); }

  bool exact() const { return exact_; }
  int64_t hundredths() const;  // throws unless exact()
  double value() const { return exact_ ? static_cast<double>(hund_) / 100.0 : real_; }

  Duration operator+(const Duration& o) const;
  Duration operator-(const Duration& o) const;
  Duration& operator+=(const Duration& o) { return *this = *this + o; }
  Duration& operator-=(const Duration& o) { return *this = *this - o; }

  bool operator==(const Duration& o) const;
  bool operator!=(const Duration& o) const { return !(*this == o); }
  bool operator<(const Duration& o) const;
  bool operator>(const Duration& o) const { return o < *this; }
  bool operator<=(const Duration& o) const { return !(o < *this); }
  bool operator>=(const Duration& o) const { return !(*this < o); }

  // Minimal decimal rendering: "3", "4.5", "4.75"; inexact values use shortest
  // round-trip formatting.
  std::string str() const;

 private:
  int64_t hund_;
  double real_;
  bool exact_;
};

using DurationVec = std::vector<Duration>;

Duration max_duration(const Duration& a, const Duration& b);
Duration min_duration(const Duration& a, const Duration& b);
Duration sum(const DurationVec& v);

std::vector<double> to_doubles(const DurationVec& v);
DurationVec durations_from_doubles(const std::vector<double>& v);

inline bool approx_equal(double a, double b, double tol = 1e-9) {
  double d = a - b;
  return (d < 0 ? -d : d) <= tol;
}

}  // namespace robsched
