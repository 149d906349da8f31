#pragma once

#include <stdexcept>
#include <string>

namespace percept {

// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke a documented precondition (dimension mismatch, non-finite
// input, length mismatch). These indicate bugs in the calling code.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Input is structurally valid but mathematically unusable (zero-norm vector,
// zero-variance series). Raised loudly instead of returning a silent 0.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// User-supplied data is out of policy (wrong image size, negative factor,
// over-length prompt).
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or corrupt on-disk asset (checkpoint, vocabulary, context file).
class AssetError : public Error {
 public:
  using Error::Error;
};

// Unknown registry key; message lists what is registered.
class PromptLookupError : public Error {
 public:
  using Error::Error;
};

// Attempt to overwrite a registry entry without the overwrite flag.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Manifest/votes file failed validation; message itemizes the bad rows.
class IngestError : public Error {
 public:
  using Error::Error;
};

// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Cache entry exists but was written under a different fingerprint.
class StaleCacheError : public Error {
 public:
  using Error::Error;
};

}  // namespace percept
