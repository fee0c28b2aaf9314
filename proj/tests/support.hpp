#pragma once
#include <doctest.h>

#include <optional>

#include <Eigen/Dense>

#include "susyscat/errors.hpp"

namespace support {

/// Runs `fn` and returns the code of the susyscat::Error it throws, or nothing.
template <class Fn>
std::optional<susyscat::Errc> code_of(Fn&& fn) {
  try {
    fn();
  } catch (const susyscat::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Largest entry magnitude of a real or complex matrix expression.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace support
