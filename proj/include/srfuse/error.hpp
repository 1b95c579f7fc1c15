#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace srfuse {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation (bad margin, bad weight, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two grids that must agree in shape do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ImageIoError : public Error {
 public:
  enum class Kind { MissingFile, UnsupportedFormat, CorruptStream, Unwritable };

  ImageIoError(Kind kind, std::string path, const std::string& detail)
      : Error(describe(kind) + ": " + path + (detail.empty() ? "" : " (" + detail + ")")),
        kind_(kind),
        path_(std::move(path)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& path() const noexcept { return path_; }

  static std::string describe(Kind kind) {
    switch (kind) {
      case Kind::MissingFile: return "missing file";
      case Kind::UnsupportedFormat: return "unsupported PNG format";
      case Kind::CorruptStream: return "corrupt PNG stream";
      case Kind::Unwritable: return "cannot write";
    }
    return "image i/o error";
  }

 private:
  Kind kind_;
  std::string path_;
};

/// Raised when the MSE-optimal weight is undefined because base == strong.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// HR/LR or output/truth id sets disagree. Carries the full lists.
class PairingError : public Error {
 public:
  PairingError(const std::string& what, std::vector<std::string> missing,
               std::vector<std::string> extra)
      : Error(what), missing_(std::move(missing)), extra_(std::move(extra)) {}

  const std::vector<std::string>& missing() const noexcept { return missing_; }
  const std::vector<std::string>& extra() const noexcept { return extra_; }

 private:
  std::vector<std::string> missing_;
  std::vector<std::string> extra_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace srfuse
