#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vpc {

/// Precondition or domain violation (coincident points, empty inputs).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration: bad config text, violated invariant of an input type.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coordinate became NaN/Inf during time integration.
class IntegrationError : public std::runtime_error {
 public:
  enum class Body { particle, charge };

  IntegrationError(Body body, std::size_t index, double time)
      : std::runtime_error(describe(body, index, time)), body_(body), index_(index), time_(time) {}

  Body body() const noexcept { return body_; }
  std::size_t index() const noexcept { return index_; }
  double time() const noexcept { return time_; }

 private:
  static std::string describe(Body body, std::size_t index, double time) {
    return std::string("integration failure: non-finite ") +
           (body == Body::particle ? "particle " : "charge ") + std::to_string(index) +
           " at t=" + std::to_string(time);
  }

  Body body_;
  std::size_t index_;
  double time_;
};

}  // namespace vpc
