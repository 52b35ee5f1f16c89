#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "viscon/error.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("viscon-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

template <class Fn>
viscon::Errc error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const viscon::Error& e) {
    return e.code();
  }
  FAIL("expected viscon::Error");
  return viscon::Errc::IoFailure;
}

}  // namespace testutil

#define CHECK_ERRC(expr, errc) CHECK(testutil::error_code_of([&] { (void)(expr); }) == (errc))
