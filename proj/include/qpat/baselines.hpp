#pragma once

// Clustering baselines (K-means, Gaussian mixture EM) and a two-component PCA
// projection, all written against a small dense row-major matrix.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qpat/quality_filter.hpp"

namespace qpat {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_features(std::span<const Pattern> patterns);
  static Matrix from_features(std::span<const ScoredPattern> patterns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct ClusterAssignment {
  std::vector<int> labels;  // cluster index per input row
  Matrix centers;           // cluster count x dims
  int iterations = 0;
  bool converged = false;
  /// K-means: within-cluster sum of squares after each center update.
  /// GMM: log-likelihood after each E-step.
  std::vector<double> trace;

  std::vector<std::size_t> counts(int clusters) const;
};

struct KMeansOptions {
  int max_iterations = 300;
};

/// Lloyd iteration from k-means++ seeding. Empty clusters are moved to the
/// point farthest from its own center (and left empty when every point sits
/// on its center). Throws TooFewPoints when rows < k.
ClusterAssignment kmeans(const Matrix& x, int k, std::uint64_t seed, const KMeansOptions& options = {});

struct GmmOptions {
  double ridge = 1e-6;
  double tolerance = 1e-6;
  int max_iterations = 200;
};

struct GmmResult {
  ClusterAssignment assignment;  // hard labels by max responsibility
  std::vector<double> weights;
  std::vector<Matrix> covariances;
};

/// Full-covariance EM started from a K-means run with the same seed. Throws
/// TooFewPoints when rows < 2 * components and SingularCovariance when a
/// component's regularized covariance is not positive definite.
GmmResult gmm_em(const Matrix& x, int components, std::uint64_t seed, const GmmOptions& options = {});

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& a);

struct Projection2D {
  std::vector<std::array<double, 2>> coordinates;
  std::array<double, 2> explained_variance{};
  std::array<std::vector<double>, 2> components;
  std::vector<double> mean;
  bool degenerate_rank = false;  // second singular value < 1e-12 * first
};

/// Top-two principal directions from the covariance eigendecomposition. Each
/// component is signed so its largest-magnitude entry is positive.
Projection2D pca_project(const Matrix& x);

/// Applies an existing projection (mean + components) to new rows.
std::vector<std::array<double, 2>> project(const Projection2D& basis, const Matrix& x);

struct BalanceRow {
  std::string method;
  std::size_t buys = 0;
  std::size_t sells = 0;
  double ratio = 0.0;
};

/// min/max of the two counts; 0 when either side is empty.
double balance_ratio(std::size_t a, std::size_t b);

BalanceRow make_balance_row(std::string method, std::size_t buys, std::size_t sells);

/// Maps each cluster to Buy or Sell by majority of the true labels inside it
/// (ties go to Buy) and returns the resulting Buy/Sell sizes.
std::pair<std::size_t, std::size_t> cluster_label_counts(const ClusterAssignment& assignment,
                                                         std::span<const Pattern> patterns);

std::vector<BalanceRow> balance_report(const FilteredLibrary& entropy_library,
                                       const ClusterAssignment& kmeans_result,
                                       const ClusterAssignment& gmm_result,
                                       std::span<const Pattern> raw);

std::string format_balance_table(std::span<const BalanceRow> rows);

}  // namespace qpat
