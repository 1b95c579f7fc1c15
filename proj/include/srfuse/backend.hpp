#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srfuse/error.hpp"
#include "srfuse/image.hpp"
#include "srfuse/resample.hpp"

namespace srfuse {

/// An image with a caller-chosen key. Keys double as file stems when a batch is
/// handed to an external process, so they must match [A-Za-z0-9._-]+.
struct NamedGrid {
  std::string id;
  PixelGrid grid;
};

/// How to invoke one black-box super-resolution model.
struct BackendSpec {
  enum class Kind { BuiltinNearest, BuiltinBicubic, External };

  std::string id;
  Kind kind = Kind::BuiltinBicubic;
  ScaleFactor scale{4};
  /// argv prefix for external backends; the protocol flags are appended.
  std::vector<std::string> command;
  /// Working directory of the external process (empty: inherit).
  std::filesystem::path workdir;
  bool deterministic = true;
  /// Allows concurrent invocations of the same external backend.
  bool reentrant = false;
  std::chrono::milliseconds timeout{std::chrono::seconds(600)};

  /// Throws ConfigError when the spec is unusable (empty id, external without command).
  void validate() const;

  static BackendSpec builtin_nearest(std::string id, ScaleFactor scale);
  static BackendSpec builtin_bicubic(std::string id, ScaleFactor scale);
  static BackendSpec external(std::string id, ScaleFactor scale, std::vector<std::string> command);
};

std::string to_string(BackendSpec::Kind kind);
/// Accepts "builtin-nearest", "builtin-bicubic", "external".
BackendSpec::Kind parse_backend_kind(const std::string& text);

class BackendError : public Error {
 public:
  enum class Kind { LaunchFailed, NonZeroExit, MissingOutput, CorruptOutput, WrongDimensions, Timeout };

  BackendError(Kind kind, std::string backend_id, std::string image_id, const std::string& detail,
               std::filesystem::path retained_dir = {});

  Kind kind() const noexcept { return kind_; }
  const std::string& backend_id() const noexcept { return backend_id_; }
  /// Offending image key, empty for whole-batch failures (exit code, timeout).
  const std::string& image_id() const noexcept { return image_id_; }
  /// Scratch directory kept for debugging, if any.
  const std::filesystem::path& retained_dir() const noexcept { return retained_dir_; }

 private:
  Kind kind_;
  std::string backend_id_;
  std::string image_id_;
  std::filesystem::path retained_dir_;
};

namespace backend {

/// Runs the model on one image. Output is exactly scale x the input.
PixelGrid run_backend(const BackendSpec& spec, const PixelGrid& lr);

/// Runs the model over many images; external backends get a single process
/// invocation for the whole batch. Results keep the input order.
std::vector<NamedGrid> run_backend_batch(const BackendSpec& spec, std::span<const NamedGrid> inputs);

/// Throws InvalidArgument for keys that are not safe file stems.
void check_image_key(const std::string& id);

}  // namespace backend
}  // namespace srfuse
