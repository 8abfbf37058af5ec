#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace testutil {

// Fresh directory under the system temp dir, named after the running test.
inline std::filesystem::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "simptc_tests" /
             (std::string(info->test_suite_name()) + "." + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

}  // namespace testutil

#define EXPECT_ERROR_KIND(stmt, k)                         \
  do {                                                     \
    try {                                                  \
      stmt;                                                \
      ADD_FAILURE() << "expected " << #k << " from " #stmt; \
    } catch (const simptc::Error& e) {                     \
      EXPECT_EQ(e.kind(), simptc::ErrorKind::k) << e.what(); \
    }                                                      \
  } while (0)
