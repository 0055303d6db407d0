#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace muxw {

using Vec = std::vector<double>;

// Queue backlogs in Mbit; kept as a plain vector, nonnegativity is enforced by
// the stepping rules rather than the type.
using QueueState = Vec;

// Binary link-activation vector u in {0,1}^l.
using ControlAction = std::vector<std::uint8_t>;

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdmissibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NormalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AuditError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix; small sizes only (queues x links), so no BLAS.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  // y = M * u for a binary activation vector.
  Vec apply(const ControlAction& u) const {
    if (u.size() != cols)
      throw StructuralError("matrix apply: activation length " +
                            std::to_string(u.size()) + " != cols " +
                            std::to_string(cols));
    Vec y(rows, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      if (!u[j]) continue;
      for (std::size_t i = 0; i < rows; ++i) y[i] += a[i * cols + j];
    }
    return y;
  }

  Vec apply(const Vec& v) const {
    if (v.size() != cols)
      throw StructuralError("matrix apply: vector length mismatch");
    Vec y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) y[i] += a[i * cols + j] * v[j];
    return y;
  }
};

inline double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw StructuralError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double l1_norm(const Vec& x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

inline double l2_norm(const Vec& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline bool all_zero(const Vec& x) {
  for (double v : x)
    if (v != 0.0) return false;
  return true;
}

// Seed + stream pair; the same pair always yields the same engine so that
// arrivals, policy randomization and audits draw from independent streams.
struct RngHandle {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::mt19937_64 engine() const {
    std::seed_seq ss{seed, stream, std::uint64_t{0x9e3779b97f4a7c15ULL}};
    return std::mt19937_64(ss);
  }
};

}  // namespace muxw
