#pragma once

#include <stdexcept>
#include <string>

namespace scenediff {

// Bad input data: malformed files, invalid scenes, inconsistent task sets.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

// Simulator could not place a scene within its retry budget.
class GenerationError : public DataError {
 public:
  using DataError::DataError;
};

// Classifier plugin failures. TransportError covers process exit and
// timeouts; ProtocolError covers well-delivered but invalid messages.
class PluginError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TransportError : public PluginError {
 public:
  using PluginError::PluginError;
};

class ProtocolError : public PluginError {
 public:
  using PluginError::PluginError;
};

}  // namespace scenediff
