#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <string_view>

namespace fixtures {

inline constexpr std::string_view kTriangle =
    "point A\npoint B\npoint C\nline a\nline b\nline c\n"
    "line_through(a, B, C)\nline_through(b, A, C)\nline_through(c, A, B)\n";

inline std::string triangle_with_circle() { return std::string(kTriangle) + "circle k\n"; }

inline std::filesystem::path data_dir() { return GEOSEARCH_DATA_DIR; }
inline std::filesystem::path seed_file() { return data_dir() / "corpus" / "seed.json"; }

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("geosearch-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
