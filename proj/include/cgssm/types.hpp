#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cgssm {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using RowVector = RowVectorX<double>;

/// Failure categories; each maps to a process exit code in the CLI.
enum class ErrorKind {
  Dimension,
  Numerical,
  Config,
  Data,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::Dimension, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

/// Prediction-error covariance could not be factorized even after jitter.
class SingularInnovationError : public NumericalError {
 public:
  SingularInnovationError(Index t, const std::string& where)
      : NumericalError(where + ": singular innovation covariance at t=" +
                       std::to_string(t)),
        t_(t) {}
  Index time() const noexcept { return t_; }

 private:
  Index t_;
};

/// A projection or regression matrix lost rank.
class RankError : public NumericalError {
 public:
  explicit RankError(const std::string& what) : NumericalError(what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

}  // namespace cgssm
