#pragma once

#include <memory>
#include <string>

namespace percept {

// Hex-encoded SHA-256, via OpenSSL.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

// Streaming digest for hashing large weight sets without buffering.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t size);
  void update(const std::string& data);
  std::string hex_final();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace percept
