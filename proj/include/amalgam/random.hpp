#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

#include "amalgam/matrix.hpp"

namespace amalgam {

/// 64-bit finalizer from splitmix64.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over bytes.
class Fnv1a {
 public:
  void add_bytes(const void* p, std::size_t n) noexcept {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(std::string_view s) noexcept { add_bytes(s.data(), s.size()); }
  void add(double x) noexcept { add_bytes(&x, sizeof x); }
  void add(std::uint64_t x) noexcept { add_bytes(&x, sizeof x); }
  void add(Complex z) noexcept {
    add(z.real());
    add(z.imag());
  }
  void add(const Matrix& m) noexcept {
    add(static_cast<std::uint64_t>(m.dim()));
    for (const auto& z : m.entries()) add(z);
  }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

/// Stream keyed by (seed, trial, purpose). Streams with different keys are
/// independent of the order in which they are created or consumed.
/// Uniforms and normals are built by hand so results do not depend on the
/// standard library's distribution implementations.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t trial, std::string_view purpose)
      : engine_(mix64(mix64(seed) ^ mix64(trial + 0x632be59bd9b4e019ULL) ^ mix64(tag_hash(purpose)))) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();  // in (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Complex Gaussian with E|z|^2 = 1.
  Complex complex_normal() { return Complex(normal(), normal()) * std::numbers::sqrt2 * 0.5; }

 private:
  static std::uint64_t tag_hash(std::string_view s) {
    Fnv1a h;
    h.add(s);
    return h.value();
  }

  std::mt19937_64 engine_;
};

}  // namespace amalgam
