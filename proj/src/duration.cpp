#include "robsched/duration.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "robsched/errors.hpp"

namespace robsched {

Duration Duration::exact_hundredths(int64_t h) {
  Duration d;
  d.hund_ = h;
  d.exact_ = true;
  d.real_ = 0.0;
  return d;
}

Duration Duration::from_real(double v) {
  // Snap to the hundredths grid when the value is (numerically) on it, so that
  // doubles produced by parsing or by exact integer arithmetic stay exact.
  double scaled = v * 100.0;
  double rounded = std::nearbyint(scaled);
  if (std::abs(scaled - rounded) <= 1e-7 * std::max(1.0, std::abs(scaled)) &&
      std::abs(rounded) < 9.0e15) {
    return exact_hundredths(static_cast<int64_t>(rounded));
  }
  Duration d;
  d.exact_ = false;
  d.real_ = v;
  d.hund_ = 0;
  return d;
}

Duration Duration::parse(const std::string& s) {
  if (s.empty()) throw InvalidInputError("empty duration literal");
  size_t pos = 0;
  bool neg = false;
  if (s[pos] == '-' || s[pos] == '+') {
    neg = s[pos] == '-';
    ++pos;
  }
  int64_t whole = 0, frac = 0;
  int frac_digits = 0;
  bool any = false;
  for (; pos < s.size() && s[pos] >= '0' && s[pos] <= '9'; ++pos) {
    whole = whole * 10 + (s[pos] - '0');
    any = true;
  }
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    for (; pos < s.size() && s[pos] >= '0' && s[pos] <= '9'; ++pos) {
      if (frac_digits < 2) {
        frac = frac * 10 + (s[pos] - '0');
        ++frac_digits;
      } else {
        // more than two fractional digits: not on the exact grid
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
          throw InvalidInputError("bad duration literal: " + s);
        return from_real(v);
      }
      any = true;
    }
  }
  if (!any || pos != s.size()) throw InvalidInputError("bad duration literal: " + s);
  if (frac_digits == 1) frac *= 10;
  int64_t h = whole * 100 + frac;
  return exact_hundredths(neg ? -h : h);
}

int64_t Duration::hundredths() const {
  if (!exact_) throw NumericalError("hundredths() on an inexact duration");
  return hund_;
}

Duration Duration::operator+(const Duration& o) const {
  if (exact_ && o.exact_) return exact_hundredths(hund_ + o.hund_);
  Duration d;
  d.exact_ = false;
  d.real_ = value() + o.value();
  d.hund_ = 0;
  return d;
}

Duration Duration::operator-(const Duration& o) const {
  if (exact_ && o.exact_) return exact_hundredths(hund_ - o.hund_);
  Duration d;
  d.exact_ = false;
  d.real_ = value() - o.value();
  d.hund_ = 0;
  return d;
}

bool Duration::operator==(const Duration& o) const {
  if (exact_ && o.exact_) return hund_ == o.hund_;
  return approx_equal(value(), o.value());
}

bool Duration::operator<(const Duration& o) const {
  if (exact_ && o.exact_) return hund_ < o.hund_;
  return value() < o.value() - 1e-9;
}

std::string Duration::str() const {
  if (exact_) {
    int64_t h = hund_;
    bool neg = h < 0;
    if (neg) h = -h;
    int64_t whole = h / 100, frac = h % 100;
    std::string out = (neg ? "-" : "") + std::to_string(whole);
    if (frac != 0) {
      if (frac % 10 == 0)
        out += "." + std::to_string(frac / 10);
      else {
        out += ".";
        if (frac < 10) out += "0";
        out += std::to_string(frac);
      }
    }
    return out;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", real_);
  return buf;
}

Duration max_duration(const Duration& a, const Duration& b) { return a < b ? b : a; }
Duration min_duration(const Duration& a, const Duration& b) { return b < a ? b : a; }

Duration sum(const DurationVec& v) {
  Duration s = Duration::zero();
  for (const auto& d : v) s += d;
  return s;
}

std::vector<double> to_doubles(const DurationVec& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& d : v) out.push_back(d.value());
  return out;
}

DurationVec durations_from_doubles(const std::vector<double>& v) {
  DurationVec out;
  out.reserve(v.size());
  for (double x : v) out.push_back(Duration::from_real(x));
  return out;
}

}  // namespace robsched
