#pragma once

#include <stdexcept>
#include <string>

namespace spintree {

/// Bad input to a builder or operation (unknown node, wrong topology, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure of the physical model during a run. The CLI maps these to exit code 3.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full-space oracle asked to handle more spins than it can store densely.
class UnsupportedSize : public ModelError {
 public:
  using ModelError::ModelError;
};

/// Full-space evolution left the vacuum + single-flip sector.
class SectorLeak : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A singlet link failed to reach (near) unit transfer amplitude.
class NoPerfectTransfer : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace spintree
