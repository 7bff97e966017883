#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#ifndef SOCQ_FIXTURE_DIR
#define SOCQ_FIXTURE_DIR "data/fixtures"
#endif

namespace testutil {

inline std::string fixture(const std::string& name) { return std::string(SOCQ_FIXTURE_DIR) + "/" + name; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("socq_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream(path) << contents;
}

}  // namespace testutil
