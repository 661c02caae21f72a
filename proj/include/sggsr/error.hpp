#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace sggsr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad config values, malformed files, violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or divergence during numeric work.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input that parses but breaks a structural invariant of the graph.
class GraphError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

namespace detail {
inline bool& warnings_enabled() {
  static bool enabled = true;
  return enabled;
}
}  // namespace detail

inline void set_warnings_enabled(bool on) { detail::warnings_enabled() = on; }

inline void warn(const std::string& msg) {
  if (detail::warnings_enabled()) std::cerr << "warning: " << msg << '\n';
}

}  // namespace sggsr
