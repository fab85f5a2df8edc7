#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "mixsearch/error.hpp"

#define EXPECT_ERROR_CODE(statement, expected_code)                                   \
  do {                                                                               \
    try {                                                                            \
      statement;                                                                     \
      ADD_FAILURE() << "expected " << ::mixsearch::error_code_name(expected_code);   \
    } catch (const ::mixsearch::Error& e_) {                                         \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                              \
    }                                                                                \
  } while (0)

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mixsearch_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}
