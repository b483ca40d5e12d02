#pragma once

#include <stdexcept>
#include <string>

namespace qlindblad {

// Point outside the chart's manifold or on/behind the singularity.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent run parameters (lattice, time step, Fock truncation, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller violated an API precondition (time ordering, shape mismatch, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bohmian velocity requested where the configuration density vanishes.
class NodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A monitored invariant (trace, positivity, rate bound) broke during a run.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string invariant, const std::string& what)
      : std::runtime_error(what), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

}  // namespace qlindblad
