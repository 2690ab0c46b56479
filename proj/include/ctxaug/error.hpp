#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxaug {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// process exit codes (see ExitCode).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `offset` is a byte offset when the parser knows it.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset = 0)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Cross-record inconsistency (dangling ids, mask/size mismatch, overlapping
/// instances...). `ids` lists the offending record ids when available.
class IntegrityError : public Error {
 public:
  IntegrityError(const std::string& what, std::vector<std::string> ids = {})
      : Error(what), ids_(std::move(ids)) {}
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

class UnsupportedMask : public Error {
 public:
  UnsupportedMask(const std::string& what, std::string annotation_id)
      : Error(what), annotation_id_(std::move(annotation_id)) {}
  const std::string& annotation_id() const noexcept { return annotation_id_; }

 private:
  std::string annotation_id_;
};

/// A box of the requested shape does not fit in the image.
class NoFit : public Error {
 public:
  using Error::Error;
};

class EmptyDistribution : public Error {
 public:
  using Error::Error;
};

class MissingMasks : public Error {
 public:
  using Error::Error;
};

class ScorerUnavailable : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, long long message_id = -1)
      : Error(what), message_id_(message_id) {}
  long long message_id() const noexcept { return message_id_; }

 private:
  long long message_id_;
};

enum class ExitCode : int {
  ok = 0,
  failure = 1,
  config = 2,
  scorer = 3,
  integrity = 4,
};

}  // namespace ctxaug
