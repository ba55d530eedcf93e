#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace hlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr const char* kVersion = "0.3.0";

struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline uint64_t binom(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  uint64_t v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

inline BigInt big_pow(const BigInt& b, uint64_t e) {
  BigInt result = 1, base = b;
  while (e) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

inline uint64_t factorial(int n) {
  uint64_t v = 1;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}

// k-subsets of {1..n} in colex order
inline std::vector<std::vector<int>> subsets_colex(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> a(k);
  for (int i = 0; i < k; ++i) a[i] = i + 1;
  while (true) {
    out.push_back(a);
    int i = 0;
    while (i < k && (i + 1 == k ? a[i] == n : a[i] + 1 == a[i + 1])) ++i;
    if (i == k) break;
    ++a[i];
    for (int j = 0; j < i; ++j) a[j] = j + 1;
  }
  if (k == 0) out.assign(1, {});
  return out;
}

// rank of a sorted 1-based subset in colex order
inline size_t colex_rank(const std::vector<int>& a) {
  size_t rank = 0;
  for (size_t i = 0; i < a.size(); ++i) rank += binom(a[i] - 1, static_cast<int>(i) + 1);
  return rank;
}

inline std::vector<int> mask_to_set(uint32_t mask) {
  std::vector<int> s;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1) s.push_back(i + 1);
  return s;
}

inline uint32_t set_to_mask(const std::vector<int>& s) {
  uint32_t m = 0;
  for (int x : s) m |= 1u << (x - 1);
  return m;
}

// restricted growth strings of length len, in lexicographic order
inline std::vector<std::vector<int>> set_partitions(int len) {
  std::vector<std::vector<int>> out;
  if (len == 0) return {{}};
  std::vector<int> a(len, 0);
  while (true) {
    out.push_back(a);
    int i = len - 1;
    for (; i > 0; --i) {
      int mx = *std::max_element(a.begin(), a.begin() + i);
      if (a[i] <= mx) break;
    }
    if (i == 0) break;
    ++a[i];
    for (int j = i + 1; j < len; ++j) a[j] = 0;
  }
  return out;
}

inline std::string rational_str(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline double to_double(const Rational& q) { return static_cast<double>(q); }

// parse a decimal or p/q string into an exact rational
inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational a = parse_rational(s.substr(0, slash)), b = parse_rational(s.substr(slash + 1));
    if (b == 0) throw std::invalid_argument("zero denominator: " + s);
    return a / b;
  }
  auto dot = s.find('.');
  std::string digits = s;
  BigInt den = 1;
  if (dot != std::string::npos) {
    digits = s.substr(0, dot) + s.substr(dot + 1);
    den = big_pow(10, s.size() - dot - 1);
  }
  if (digits.empty() || digits == "-") throw std::invalid_argument("bad number: " + s);
  for (size_t i = 0; i < digits.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(digits[i])) && !(i == 0 && digits[i] == '-'))
      throw std::invalid_argument("bad number: " + s);
  // cpp_int reads a leading 0 as octal
  bool neg = digits[0] == '-';
  size_t first = digits.find_first_not_of('0', neg ? 1 : 0);
  std::string mag = first == std::string::npos ? "0" : digits.substr(first);
  BigInt num(mag);
  return Rational(neg ? BigInt(-num) : num, den);
}

}  // namespace hlab
