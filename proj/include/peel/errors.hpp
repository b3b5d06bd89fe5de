#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace peel {

/// Caller passed a value outside an operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry with no extent where extent is required (zero-area mesh, coincident vertices).
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(std::filesystem::path path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(std::move(path)) {}

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

enum class ParseErrorKind {
  kMalformedHeader,
  kCountMismatch,
  kMalformedData,
  kUnsupported,
};

/// Malformed mesh, point cloud or image file.
class ParseError : public IoError {
 public:
  ParseError(ParseErrorKind kind, std::filesystem::path path, const std::string& what)
      : IoError(std::move(path), what), kind_(kind) {}

  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

enum class DecodeErrorKind {
  kMissingFile,
  kResolutionMismatch,
  kMalformedJson,
  kMalformedFile,
};

/// Failure to reconstruct a map set from its file family. path() names the offending file.
class DecodeError : public IoError {
 public:
  DecodeError(DecodeErrorKind kind, std::filesystem::path path, const std::string& what)
      : IoError(std::move(path), what), kind_(kind) {}

  DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

}  // namespace peel
