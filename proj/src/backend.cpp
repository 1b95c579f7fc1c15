#include "srfuse/backend.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

namespace srfuse {

namespace {

std::string describe(BackendError::Kind kind) {
  switch (kind) {
    case BackendError::Kind::LaunchFailed: return "launch failed";
    case BackendError::Kind::NonZeroExit: return "non-zero exit status";
    case BackendError::Kind::MissingOutput: return "missing output";
    case BackendError::Kind::CorruptOutput: return "unreadable output";
    case BackendError::Kind::WrongDimensions: return "wrong output dimensions";
    case BackendError::Kind::Timeout: return "timed out";
  }
  return "backend failure";
}

}  // namespace

BackendError::BackendError(Kind kind, std::string backend_id, std::string image_id,
                           const std::string& detail, std::filesystem::path retained_dir)
    : Error("backend '" + backend_id + "': " + describe(kind) +
            (image_id.empty() ? "" : " for image '" + image_id + "'") +
            (detail.empty() ? "" : ": " + detail) +
            (retained_dir.empty() ? "" : " [scratch kept at " + retained_dir.string() + "]")),
      kind_(kind),
      backend_id_(std::move(backend_id)),
      image_id_(std::move(image_id)),
      retained_dir_(std::move(retained_dir)) {}

void BackendSpec::validate() const {
  if (id.empty()) throw ConfigError("backend id must not be empty");
  if (kind == Kind::External && command.empty())
    throw ConfigError("external backend '" + id + "' needs a command");
  if (timeout.count() <= 0) throw ConfigError("backend '" + id + "' timeout must be positive");
}

BackendSpec BackendSpec::builtin_nearest(std::string id, ScaleFactor scale) {
  BackendSpec spec;
  spec.id = std::move(id);
  spec.kind = Kind::BuiltinNearest;
  spec.scale = scale;
  return spec;
}

BackendSpec BackendSpec::builtin_bicubic(std::string id, ScaleFactor scale) {
  BackendSpec spec;
  spec.id = std::move(id);
  spec.kind = Kind::BuiltinBicubic;
  spec.scale = scale;
  return spec;
}

BackendSpec BackendSpec::external(std::string id, ScaleFactor scale,
                                  std::vector<std::string> command) {
  BackendSpec spec;
  spec.id = std::move(id);
  spec.kind = Kind::External;
  spec.scale = scale;
  spec.command = std::move(command);
  spec.deterministic = false;
  return spec;
}

std::string to_string(BackendSpec::Kind kind) {
  switch (kind) {
    case BackendSpec::Kind::BuiltinNearest: return "builtin-nearest";
    case BackendSpec::Kind::BuiltinBicubic: return "builtin-bicubic";
    case BackendSpec::Kind::External: return "external";
  }
  return "unknown";
}

BackendSpec::Kind parse_backend_kind(const std::string& text) {
  if (text == "builtin-nearest") return BackendSpec::Kind::BuiltinNearest;
  if (text == "builtin-bicubic") return BackendSpec::Kind::BuiltinBicubic;
  if (text == "external") return BackendSpec::Kind::External;
  throw ConfigError("unknown backend kind '" + text + "'");
}

namespace backend {

namespace fs = std::filesystem;

void check_image_key(const std::string& id) {
  if (id.empty() || id == "." || id == "..")
    throw InvalidArgument("invalid image key '" + id + "'");
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) throw InvalidArgument("image key '" + id + "' contains '" + std::string(1, c) + "'");
  }
}

namespace {

// External backends that are not reentrant are serialized per id.
std::mutex& lock_for(const std::string& id) {
  static std::mutex registry_guard;
  static std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard guard(registry_guard);
  auto& slot = locks[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void check_output(const BackendSpec& spec, const NamedGrid& in, const PixelGrid& out,
                  const fs::path& scratch = {}) {
  const int s = spec.scale.value();
  if (out.width() != in.grid.width() * s || out.height() != in.grid.height() * s ||
      out.channels() != in.grid.channels()) {
    throw BackendError(BackendError::Kind::WrongDimensions, spec.id, in.id,
                       "expected " + std::to_string(in.grid.width() * s) + "x" +
                           std::to_string(in.grid.height() * s) + "x" +
                           std::to_string(in.grid.channels()) + ", got " +
                           std::to_string(out.width()) + "x" + std::to_string(out.height()) +
                           "x" + std::to_string(out.channels()),
                       scratch);
  }
}

PixelGrid run_builtin(const BackendSpec& spec, const PixelGrid& lr) {
  if (spec.kind == BackendSpec::Kind::BuiltinNearest)
    return resample::upscale_nearest(lr, spec.scale);
  return resample::upscale(lr, spec.scale);
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& backend_id) {
    std::string stem = "srfuse-";
    for (char c : backend_id) stem += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    std::string templ = (fs::temp_directory_path() / (stem + "-XXXXXX")).string();
    if (!::mkdtemp(templ.data()))
      throw BackendError(BackendError::Kind::LaunchFailed, backend_id, "",
                         std::string("mkdtemp: ") + std::strerror(errno));
    root_ = templ;
    fs::create_directory(input());
    fs::create_directory(output());
  }
  ~ScratchDir() {
    if (!keep_) {
      std::error_code ec;
      fs::remove_all(root_, ec);
    }
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  fs::path input() const { return root_ / "in"; }
  fs::path output() const { return root_ / "out"; }
  const fs::path& root() const { return root_; }
  void keep() { keep_ = true; }

 private:
  fs::path root_;
  bool keep_ = false;
};

// Returns the exit status, or nullopt on timeout (the process group is killed).
std::optional<int> run_process(const BackendSpec& spec, const std::vector<std::string>& argv,
                               const fs::path& scratch) {
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  // exec failures are reported through a close-on-exec pipe.
  int report[2];
  if (::pipe2(report, O_CLOEXEC) != 0)
    throw BackendError(BackendError::Kind::LaunchFailed, spec.id, "",
                       std::string("pipe: ") + std::strerror(errno), scratch);

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(report[0]);
    ::close(report[1]);
    throw BackendError(BackendError::Kind::LaunchFailed, spec.id, "",
                       std::string("fork: ") + std::strerror(errno), scratch);
  }
  if (pid == 0) {
    ::close(report[0]);
    ::setpgid(0, 0);
    // Model chatter goes to stderr so it cannot corrupt our stdout reports.
    ::dup2(STDERR_FILENO, STDOUT_FILENO);
    int err = 0;
    if (!spec.workdir.empty() && ::chdir(spec.workdir.c_str()) != 0) {
      err = errno;
    } else {
      ::execvp(cargv[0], cargv.data());
      err = errno;
    }
    [[maybe_unused]] auto n = ::write(report[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(report[1]);
  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(report[0], &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  ::close(report[0]);
  if (got > 0) {
    int ignored = 0;
    ::waitpid(pid, &ignored, 0);
    throw BackendError(BackendError::Kind::LaunchFailed, spec.id, "",
                       "cannot execute '" + argv.front() + "': " + std::strerror(exec_errno),
                       scratch);
  }
  ::setpgid(pid, pid);

  const auto deadline = std::chrono::steady_clock::now() + spec.timeout;
  int status = 0;
  while (true) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR)
      throw BackendError(BackendError::Kind::LaunchFailed, spec.id, "",
                         std::string("waitpid: ") + std::strerror(errno), scratch);
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return std::nullopt;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

std::vector<NamedGrid> run_external(const BackendSpec& spec, std::span<const NamedGrid> inputs) {
  std::unique_lock<std::mutex> serial;
  if (!spec.reentrant) serial = std::unique_lock(lock_for(spec.id));

  ScratchDir scratch(spec.id);
  try {
    for (const auto& in : inputs) save_image(in.grid, scratch.input() / (in.id + ".png"));

    std::vector<std::string> argv = spec.command;
    argv.insert(argv.end(), {"--input-dir", scratch.input().string(), "--output-dir",
                             scratch.output().string(), "--scale",
                             std::to_string(spec.scale.value())});
    const auto status = run_process(spec, argv, scratch.root());
    if (!status)
      throw BackendError(BackendError::Kind::Timeout, spec.id, "",
                         "exceeded " + std::to_string(spec.timeout.count()) + " ms",
                         scratch.root());
    if (*status != 0)
      throw BackendError(BackendError::Kind::NonZeroExit, spec.id, "",
                         "exit status " + std::to_string(*status), scratch.root());

    std::vector<NamedGrid> results;
    results.reserve(inputs.size());
    for (const auto& in : inputs) {
      const fs::path file = scratch.output() / (in.id + ".png");
      if (!fs::exists(file))
        throw BackendError(BackendError::Kind::MissingOutput, spec.id, in.id,
                           file.filename().string() + " not written", scratch.root());
      PixelGrid out;
      try {
        out = load_image(file);
      } catch (const ImageIoError& e) {
        throw BackendError(BackendError::Kind::CorruptOutput, spec.id, in.id, e.what(),
                           scratch.root());
      }
      check_output(spec, in, out, scratch.root());
      results.push_back({in.id, std::move(out)});
    }
    return results;
  } catch (...) {
    scratch.keep();
    throw;
  }
}

}  // namespace

PixelGrid run_backend(const BackendSpec& spec, const PixelGrid& lr) {
  const NamedGrid one{"image", lr};
  return run_backend_batch(spec, std::span(&one, 1)).front().grid;
}

std::vector<NamedGrid> run_backend_batch(const BackendSpec& spec,
                                         std::span<const NamedGrid> inputs) {
  spec.validate();
  std::set<std::string> seen;
  for (const auto& in : inputs) {
    check_image_key(in.id);
    if (!seen.insert(in.id).second)
      throw InvalidArgument("duplicate image key '" + in.id + "' in batch");
  }
  if (inputs.empty()) return {};

  if (spec.kind == BackendSpec::Kind::External) return run_external(spec, inputs);

  std::vector<NamedGrid> results;
  results.reserve(inputs.size());
  for (const auto& in : inputs) {
    PixelGrid out = run_builtin(spec, in.grid);
    check_output(spec, in, out);
    results.push_back({in.id, std::move(out)});
  }
  return results;
}

}  // namespace backend
}  // namespace srfuse
