#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace etlalm {

using Vec = std::vector<double>;

/// Dense row-major matrix. Rows index agents when used as a stacked iterate
/// (n x m), or nodes when used as an n x n operator.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Invalid parameters or an infeasible configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulator phase ran on data that was not synchronized for it.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterate became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t agent, std::size_t round)
      : std::runtime_error("non-finite iterate at agent " + std::to_string(agent) +
                           ", round " + std::to_string(round)),
        agent_(agent),
        round_(round) {}
  std::size_t agent() const { return agent_; }
  std::size_t round() const { return round_; }

 private:
  std::size_t agent_;
  std::size_t round_;
};

/// An iterative numerical routine failed to converge.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  std::size_t iterations() const { return iterations_; }

 private:
  std::size_t iterations_;
};

namespace vec {

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
/// Euclidean distance computed with scaling so tiny differences never underflow to 0.
double distance(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> a);

}  // namespace vec

}  // namespace etlalm
