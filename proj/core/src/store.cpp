#include "esas/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "esas/errors.hpp"

namespace fs = std::filesystem;

namespace esas {

namespace {

void check_relative(const std::string& path) {
  if (path.empty() || path.front() == '/' || path.find("..") != std::string::npos) {
    throw InvalidArgument("bad store path '" + path + "'");
  }
}

class FileLock final : public WriterLock {
 public:
  explicit FileLock(fs::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0600);
    if (fd_ < 0) {
      if (errno == EEXIST) {
        throw IoError("workspace is locked by another writer (remove " + path_.string() + " if stale)");
      }
      throw IoError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd_, pid.data(), pid.size());
  }
  ~FileLock() override {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

class FlagLock final : public WriterLock {
 public:
  explicit FlagLock(std::shared_ptr<bool> flag) : flag_(std::move(flag)) {
    if (*flag_) throw IoError("workspace is locked by another writer");
    *flag_ = true;
  }
  ~FlagLock() override { *flag_ = false; }

 private:
  std::shared_ptr<bool> flag_;
};

}  // namespace

std::string Store::require(const std::string& path) const {
  auto content = read(path);
  if (!content) throw IoError("missing workspace file " + path);
  return *std::move(content);
}

// --- DirectoryStore ---------------------------------------------------------

DirectoryStore::DirectoryStore(fs::path root) : root_(std::move(root)) {}

std::optional<std::string> DirectoryStore::read(const std::string& path) const {
  check_relative(path);
  const auto full = root_ / path;
  std::error_code ec;
  if (!fs::is_regular_file(full, ec)) return std::nullopt;
  std::ifstream in(full, std::ios::binary);
  if (!in) throw IoError("cannot read " + full.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + full.string());
  return ss.str();
}

void DirectoryStore::write(const std::string& path, std::string_view content, bool secret) {
  check_relative(path);
  const auto full = root_ / path;
  std::error_code ec;
  fs::create_directories(full.parent_path(), ec);
  if (ec) throw IoError("cannot create " + full.parent_path().string() + ": " + ec.message());

  auto tmp = full;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    if (secret) fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write, ec);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  if (ec) throw IoError("cannot restrict permissions of " + tmp.string() + ": " + ec.message());
  fs::rename(tmp, full, ec);
  if (ec) throw IoError("cannot replace " + full.string() + ": " + ec.message());
}

bool DirectoryStore::exists(const std::string& path) const {
  check_relative(path);
  std::error_code ec;
  return fs::is_regular_file(root_ / path, ec);
}

std::vector<std::string> DirectoryStore::list(const std::string& dir) const {
  check_relative(dir);
  std::vector<std::string> names;
  std::error_code ec;
  const auto full = root_ / dir;
  if (!fs::is_directory(full, ec)) return names;
  for (const auto& e : fs::directory_iterator(full, ec)) {
    if (!e.is_regular_file()) continue;
    auto name = e.path().filename().string();
    if (name.ends_with(".tmp")) continue;
    names.push_back(std::move(name));
  }
  if (ec) throw IoError("cannot list " + full.string() + ": " + ec.message());
  std::sort(names.begin(), names.end());
  return names;
}

bool DirectoryStore::empty() const {
  std::error_code ec;
  if (!fs::exists(root_, ec)) return true;
  if (!fs::is_directory(root_, ec)) return false;
  return fs::directory_iterator(root_, ec) == fs::directory_iterator();
}

std::unique_ptr<WriterLock> DirectoryStore::lock() {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoError("cannot create " + root_.string() + ": " + ec.message());
  return std::make_unique<FileLock>(root_ / kLockFile);
}

// --- MemoryStore ------------------------------------------------------------

std::optional<std::string> MemoryStore::read(const std::string& path) const {
  check_relative(path);
  if (auto it = files_.find(path); it != files_.end()) return it->second;
  return std::nullopt;
}

void MemoryStore::write(const std::string& path, std::string_view content, bool) {
  check_relative(path);
  files_[path] = std::string(content);
}

bool MemoryStore::exists(const std::string& path) const { return files_.contains(path); }

std::vector<std::string> MemoryStore::list(const std::string& dir) const {
  check_relative(dir);
  const std::string prefix = dir + "/";
  std::vector<std::string> names;
  for (auto it = files_.lower_bound(prefix); it != files_.end() && it->first.starts_with(prefix); ++it) {
    auto rest = it->first.substr(prefix.size());
    if (rest.find('/') == std::string::npos) names.push_back(std::move(rest));
  }
  return names;
}

std::unique_ptr<WriterLock> MemoryStore::lock() { return std::make_unique<FlagLock>(locked_); }

}  // namespace esas
