#pragma once

#include <stdexcept>
#include <string>

namespace lexkit {

// Base of every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: invalid manifest, vocabulary, flag value or a violated
// precondition. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File system failures. Exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

// A scorer rejected a request or sent a response that breaks the wire
// contract. Exit code 2.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Scorer endpoint unreachable after all retries. Exit code 2.
class ConnectionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace lexkit
