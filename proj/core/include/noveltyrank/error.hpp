#pragma once

#include <stdexcept>
#include <string>

namespace noveltyrank {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text or binary data.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A referenced id (paper, embedding row, neighbor) does not resolve.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Feature vector and model were produced by different fusion recipes.
class RecipeMismatchError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace noveltyrank
