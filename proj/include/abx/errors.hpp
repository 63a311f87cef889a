#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace abx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid task specification, level list or option value.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Missing or unreadable file.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: everything that is neither a spec nor an I/O problem.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

class BoundsError : public DataError {
 public:
  BoundsError(std::size_t item, const std::string& what)
      : DataError(what), item_(item) {}
  std::size_t item() const noexcept { return item_; }

 private:
  std::size_t item_;
};

class EmptySegmentError : public DataError {
 public:
  EmptySegmentError(std::int64_t start, std::int64_t end, const std::string& what)
      : DataError(what), start_(start), end_(end) {}
  std::int64_t start() const noexcept { return start_; }
  std::int64_t end() const noexcept { return end_; }

 private:
  std::int64_t start_;
  std::int64_t end_;
};

class InvalidCellError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace abx
