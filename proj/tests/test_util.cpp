#include <doctest.h>

#include <cstdio>
#include <string>

#include <mem0/util.hpp>

using namespace mem0;

namespace {
std::string tmp_path(const std::string& name) {
  return std::string("/tmp/mem0_test_") + name;
}
}  // namespace

TEST_CASE("crc32 matches the standard check value") {
  const char* s = "123456789";
  CHECK(crc32(s, 9) == 0xCBF43926u);
  CHECK(crc32("", 0) == 0u);
}

TEST_CASE("crc32 seed chaining equals one-shot") {
  const char* s = "hello world";
  std::uint32_t whole = crc32(s, 11);
  std::uint32_t part = crc32(s, 5);
  part = crc32(s + 5, 6, part);
  CHECK(part == whole);
}

TEST_CASE("sha256 matches reference digests") {
  CHECK(sha256_hex("", 0) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc", 3) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("sha256_file_hex hashes file contents") {
  std::string p = tmp_path("sha");
  write_file(p, "abc");
  CHECK(sha256_file_hex(p) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::remove(p.c_str());
  CHECK_THROWS_AS(sha256_file_hex(p), IoError);
}

TEST_CASE("wilson interval matches closed form") {
  auto w = wilson_interval(80, 100);
  CHECK(w.lo == doctest::Approx(0.711169038073).epsilon(1e-9));
  CHECK(w.hi == doctest::Approx(0.866634077441).epsilon(1e-9));
  w = wilson_interval(50, 100);
  CHECK(w.lo == doctest::Approx(0.403829828590).epsilon(1e-9));
  CHECK(w.hi == doctest::Approx(0.596170171410).epsilon(1e-9));
}

TEST_CASE("wilson interval clamps at the unit interval") {
  auto w = wilson_interval(0, 10);
  CHECK(w.lo == 0.0);
  CHECK(w.hi == doctest::Approx(0.277540168767).epsilon(1e-9));
  w = wilson_interval(10, 10);
  CHECK(w.hi == 1.0);
  CHECK(w.lo == doctest::Approx(0.722459831233).epsilon(1e-9));
  w = wilson_interval(0, 0);
  CHECK(w.lo == 0.0);
  CHECK(w.hi == 1.0);
}

TEST_CASE("read_file round-trips binary content and reports missing files") {
  std::string p = tmp_path("rw");
  std::string payload("ab\0\ncd\xff", 7);
  write_file(p, payload);
  CHECK(read_file(p) == payload);
  std::remove(p.c_str());
  CHECK_THROWS_AS(read_file(p), IoError);
}
