#pragma once

#include <stdexcept>
#include <string>

namespace strstab {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// IDM evaluated with a non-positive net gap to the leader.
class GapCollisionError : public Error {
 public:
  using Error::Error;
};

// No equilibrium exists at the requested speed (v_eq <= 0 or v_eq >= v_max).
class NoEquilibriumError : public Error {
 public:
  using Error::Error;
};

// Truncation box holds too little probability mass to rejection-sample.
class SamplingInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Two vehicles touched during a simulation run.
class CollisionError : public Error {
 public:
  CollisionError(const std::string& what, double time, int vehicle)
      : Error(what), time_(time), vehicle_(vehicle) {}
  double time() const { return time_; }
  int vehicle() const { return vehicle_; }

 private:
  double time_;
  int vehicle_;
};

// NaN/Inf in a simulation or a failed eigen decomposition.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Problem size outside what a routine supports.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Simulated annealing never found a feasible candidate.
class OptimizationFailedError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace strstab
