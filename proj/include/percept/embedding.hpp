#pragma once

#include <Eigen/Dense>
#include <utility>

#include "percept/errors.hpp"

namespace percept {

// A point in the shared image/text feature space. Entries must be finite;
// the norm may be anything positive (zero-norm vectors are rejected when two
// embeddings are compared, not at construction).
class Embedding {
 public:
  Embedding() = default;

  explicit Embedding(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() < 1) {
      throw ContractViolation("embedding must have dim >= 1");
    }
    if (!values_.allFinite()) {
      throw ContractViolation("embedding contains NaN/Inf entries");
    }
  }

  static Embedding from_float(const Eigen::VectorXf& v) {
    return Embedding(v.cast<double>());
  }

  int dim() const { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  double norm() const { return values_.norm(); }

 private:
  Eigen::VectorXd values_;
};

}  // namespace percept
