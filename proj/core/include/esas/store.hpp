#pragma once

// Key/value persistence behind a workspace. Paths are relative and use '/'
// separators ("csp/alice-000001.env").

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace esas {

// Held for the duration of a mutating operation.
class WriterLock {
 public:
  virtual ~WriterLock() = default;
};

class Store {
 public:
  virtual ~Store() = default;

  virtual std::optional<std::string> read(const std::string& path) const = 0;
  // Replaces the file atomically. `secret` files are readable by the owner only.
  virtual void write(const std::string& path, std::string_view content, bool secret = false) = 0;
  virtual bool exists(const std::string& path) const = 0;
  // Sorted file names (not paths) directly inside `dir`.
  virtual std::vector<std::string> list(const std::string& dir) const = 0;
  // True when the store holds no files at all.
  virtual bool empty() const = 0;

  // Throws IoError if another writer holds the lock.
  virtual std::unique_ptr<WriterLock> lock() = 0;

  // read() that throws IoError when the file is missing.
  std::string require(const std::string& path) const;
};

class DirectoryStore final : public Store {
 public:
  explicit DirectoryStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  std::optional<std::string> read(const std::string& path) const override;
  void write(const std::string& path, std::string_view content, bool secret = false) override;
  bool exists(const std::string& path) const override;
  std::vector<std::string> list(const std::string& dir) const override;
  bool empty() const override;
  std::unique_ptr<WriterLock> lock() override;

  static constexpr const char* kLockFile = ".lock";

 private:
  std::filesystem::path root_;
};

class MemoryStore final : public Store {
 public:
  std::optional<std::string> read(const std::string& path) const override;
  void write(const std::string& path, std::string_view content, bool secret = false) override;
  bool exists(const std::string& path) const override;
  std::vector<std::string> list(const std::string& dir) const override;
  bool empty() const override { return files_.empty(); }
  std::unique_ptr<WriterLock> lock() override;

  const std::map<std::string, std::string>& files() const noexcept { return files_; }

 private:
  std::map<std::string, std::string> files_;
  std::shared_ptr<bool> locked_ = std::make_shared<bool>(false);
};

}  // namespace esas
