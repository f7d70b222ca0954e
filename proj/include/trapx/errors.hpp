#pragma once
#include <stdexcept>
#include <string>

namespace trapx {

// Physics-domain failures map to CLI exit code 2, usage failures to 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class PhysicsError : public Error {
 public:
  using Error::Error;
};

// Designed omega_z^2 goes negative (trap transiently repulsive) without opt-in.
class AttractivityError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

// Resonant drive: depth formula singular at zero detuning.
class DetuningError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

// Out-of-domain evaluation: singular radius, non-positive scales, grid too small,
// boundary leakage past threshold.
class DomainError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

// Requested eigenlevel not among the bound grid states.
class SpectrumError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

// Iterative scheme (quadrature, relaxation, bisection) failed to converge.
class ConvergenceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Mismatched or malformed grids/plans.
class GridError : public UsageError {
 public:
  using UsageError::UsageError;
};

}  // namespace trapx
