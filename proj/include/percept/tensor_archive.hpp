#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "percept/errors.hpp"

namespace percept {

// Flat binary tensor container used for converted checkpoints and tuned
// prompt contexts. Layout (little-endian):
//   magic "PTARCH01" | u64 tensor count
//   per tensor: u16 name length | name | u8 dtype (1=f32, 2=f64)
//               u8 ndim | i64 dims[ndim] | raw payload
enum class Dtype : std::uint8_t { F32 = 1, F64 = 2 };

struct ArchiveTensor {
  Dtype dtype = Dtype::F32;
  std::vector<std::int64_t> shape;
  std::vector<float> f32;
  std::vector<double> f64;

  std::int64_t numel() const;

  // Shape/dtype-checked views. Matrices are row-major in the file, matching
  // the originating framework's layout.
  Eigen::MatrixXf matrix_f32() const;   // ndim must be 2
  Eigen::VectorXf vector_f32() const;   // ndim must be 1
  Eigen::MatrixXd matrix_f64() const;
  Eigen::VectorXd vector_f64() const;

  static ArchiveTensor from_matrix(const Eigen::MatrixXf& m);
  static ArchiveTensor from_vector(const Eigen::VectorXf& v);
  static ArchiveTensor from_matrix(const Eigen::MatrixXd& m);
  static ArchiveTensor from_vector(const Eigen::VectorXd& v);
};

class TensorArchive {
 public:
  void put(const std::string& name, ArchiveTensor tensor);
  bool contains(const std::string& name) const;
  const ArchiveTensor& get(const std::string& name) const;
  void erase(const std::string& name);
  std::vector<std::string> names() const;
  std::size_t size() const { return tensors_.size(); }

  void save(const std::string& path) const;
  static TensorArchive load(const std::string& path);

 private:
  std::map<std::string, ArchiveTensor> tensors_;
};

}  // namespace percept
