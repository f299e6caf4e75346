#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mem0 {

// Violated precondition / invalid argument / schema contract. CLI exit code 1.
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / serialization / checksum failure. CLI exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file_hex(const std::string& path);

struct WilsonInterval {
  double lo;
  double hi;
};

// 95% score interval by default (z = 1.96).
WilsonInterval wilson_interval(int successes, int trials, double z = 1.96);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace mem0
