#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tagsep {

// Parameter outside the admissible model domain (rates, probabilities, MGF poles).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoActiveEventsError : public std::runtime_error {
 public:
  NoActiveEventsError() : std::runtime_error("event catalog has zero total rate") {}
};

// Thrown by the opt-in requirement check when a quantity needs m > w.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A regeneration cycle hit its event cap before the boundary returned to 0.
class TruncatedCycleError : public std::runtime_error {
 public:
  TruncatedCycleError(std::uint64_t events, double elapsed, int boundary, std::size_t completed)
      : std::runtime_error("regeneration cycle truncated after " + std::to_string(events) +
                           " events (elapsed " + std::to_string(elapsed) + ", boundary " +
                           std::to_string(boundary) + ", completed cycles " +
                           std::to_string(completed) + ")"),
        events_(events),
        elapsed_(elapsed),
        boundary_(boundary),
        completed_(completed) {}

  std::uint64_t events() const { return events_; }
  double elapsed() const { return elapsed_; }
  int boundary() const { return boundary_; }
  std::size_t completed_cycles() const { return completed_; }

 private:
  std::uint64_t events_;
  double elapsed_;
  int boundary_;
  std::size_t completed_;
};

class RadiusExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReducibleChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace tagsep
