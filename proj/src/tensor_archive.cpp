#include "percept/tensor_archive.hpp"

#include <cstring>
#include <fstream>

namespace percept {

namespace {

constexpr char kMagic[8] = {'P', 'T', 'A', 'R', 'C', 'H', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw AssetError("truncated tensor archive: " + path);
  return v;
}

using RowMajorMatF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMajorMatD =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

std::int64_t ArchiveTensor::numel() const {
  std::int64_t n = 1;
  for (const auto d : shape) n *= d;
  return n;
}

Eigen::MatrixXf ArchiveTensor::matrix_f32() const {
  if (dtype != Dtype::F32 || shape.size() != 2) {
    throw AssetError("tensor is not a 2-d f32 matrix");
  }
  return Eigen::Map<const RowMajorMatF>(f32.data(), shape[0], shape[1]);
}

Eigen::VectorXf ArchiveTensor::vector_f32() const {
  if (dtype != Dtype::F32 || shape.size() != 1) {
    throw AssetError("tensor is not a 1-d f32 vector");
  }
  return Eigen::Map<const Eigen::VectorXf>(f32.data(), shape[0]);
}

Eigen::MatrixXd ArchiveTensor::matrix_f64() const {
  if (dtype != Dtype::F64 || shape.size() != 2) {
    throw AssetError("tensor is not a 2-d f64 matrix");
  }
  return Eigen::Map<const RowMajorMatD>(f64.data(), shape[0], shape[1]);
}

Eigen::VectorXd ArchiveTensor::vector_f64() const {
  if (dtype != Dtype::F64 || shape.size() != 1) {
    throw AssetError("tensor is not a 1-d f64 vector");
  }
  return Eigen::Map<const Eigen::VectorXd>(f64.data(), shape[0]);
}

ArchiveTensor ArchiveTensor::from_matrix(const Eigen::MatrixXf& m) {
  ArchiveTensor t;
  t.dtype = Dtype::F32;
  t.shape = {m.rows(), m.cols()};
  t.f32.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<RowMajorMatF>(t.f32.data(), m.rows(), m.cols()) = m;
  return t;
}

ArchiveTensor ArchiveTensor::from_vector(const Eigen::VectorXf& v) {
  ArchiveTensor t;
  t.dtype = Dtype::F32;
  t.shape = {v.size()};
  t.f32.assign(v.data(), v.data() + v.size());
  return t;
}

ArchiveTensor ArchiveTensor::from_matrix(const Eigen::MatrixXd& m) {
  ArchiveTensor t;
  t.dtype = Dtype::F64;
  t.shape = {m.rows(), m.cols()};
  t.f64.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<RowMajorMatD>(t.f64.data(), m.rows(), m.cols()) = m;
  return t;
}

ArchiveTensor ArchiveTensor::from_vector(const Eigen::VectorXd& v) {
  ArchiveTensor t;
  t.dtype = Dtype::F64;
  t.shape = {v.size()};
  t.f64.assign(v.data(), v.data() + v.size());
  return t;
}

void TensorArchive::put(const std::string& name, ArchiveTensor tensor) {
  const std::size_t expected = static_cast<std::size_t>(tensor.numel());
  const std::size_t actual =
      tensor.dtype == Dtype::F32 ? tensor.f32.size() : tensor.f64.size();
  if (expected != actual) {
    throw ContractViolation("tensor '" + name + "': payload size " +
                            std::to_string(actual) + " does not match shape");
  }
  tensors_[name] = std::move(tensor);
}

bool TensorArchive::contains(const std::string& name) const {
  return tensors_.count(name) > 0;
}

const ArchiveTensor& TensorArchive::get(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw AssetError("tensor '" + name + "' not present in archive");
  }
  return it->second;
}

void TensorArchive::erase(const std::string& name) { tensors_.erase(name); }

std::vector<std::string> TensorArchive::names() const {
  std::vector<std::string> out;
  out.reserve(tensors_.size());
  for (const auto& [name, _] : tensors_) out.push_back(name);
  return out;
}

void TensorArchive::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AssetError("cannot write archive: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, static_cast<std::uint64_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    if (name.size() > 65535) throw ContractViolation("tensor name too long");
    write_pod(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<std::uint8_t>(t.dtype));
    write_pod(out, static_cast<std::uint8_t>(t.shape.size()));
    for (const auto d : t.shape) write_pod(out, d);
    if (t.dtype == Dtype::F32) {
      out.write(reinterpret_cast<const char*>(t.f32.data()),
                static_cast<std::streamsize>(t.f32.size() * sizeof(float)));
    } else {
      out.write(reinterpret_cast<const char*>(t.f64.data()),
                static_cast<std::streamsize>(t.f64.size() * sizeof(double)));
    }
  }
  if (!out) throw AssetError("write failed: " + path);
}

TensorArchive TensorArchive::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AssetError("cannot open archive: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw AssetError("not a tensor archive (bad magic): " + path);
  }
  const auto count = read_pod<std::uint64_t>(in, path);
  TensorArchive archive;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint16_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw AssetError("truncated tensor archive: " + path);
    ArchiveTensor t;
    const auto dtype = read_pod<std::uint8_t>(in, path);
    if (dtype != 1 && dtype != 2) {
      throw AssetError("unknown dtype " + std::to_string(dtype) + " in " + path);
    }
    t.dtype = static_cast<Dtype>(dtype);
    const auto ndim = read_pod<std::uint8_t>(in, path);
    t.shape.resize(ndim);
    for (int d = 0; d < ndim; ++d) {
      t.shape[d] = read_pod<std::int64_t>(in, path);
      if (t.shape[d] < 0) throw AssetError("negative dim in " + path);
    }
    const std::int64_t n = t.numel();
    if (t.dtype == Dtype::F32) {
      t.f32.resize(static_cast<std::size_t>(n));
      in.read(reinterpret_cast<char*>(t.f32.data()),
              static_cast<std::streamsize>(n * sizeof(float)));
    } else {
      t.f64.resize(static_cast<std::size_t>(n));
      in.read(reinterpret_cast<char*>(t.f64.data()),
              static_cast<std::streamsize>(n * sizeof(double)));
    }
    if (!in) throw AssetError("truncated tensor payload in " + path);
    archive.put(name, std::move(t));
  }
  return archive;
}

}  // namespace percept
