#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alphascreen/error.hpp"

namespace alphascreen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexSet = std::vector<int>;  // sorted, 0-based entity indices

// Library-wide numerical tolerances.
struct NumericSettings {
  // Smallest admissible singular value relative to the largest.
  double rank_tolerance = 1e-10;
  // Admissible ||S - S^T||_F / ||S||_F for symmetric eigenproblems.
  double symmetry_tolerance = 1e-10;
};

// Process-wide settings; read by every routine that takes no explicit
// NumericSettings argument.
NumericSettings& numeric_settings();

// p x n matrix of excess returns: one row per entity, one column per period.
class ReturnPanel {
 public:
  ReturnPanel() = default;
  // Validates p >= 1, n >= 4, strictly increasing periods, finite values.
  ReturnPanel(Matrix values, std::vector<std::string> entity_ids,
              std::vector<std::int64_t> time_index);
  // Entity ids e1..ep and periods 1..n.
  explicit ReturnPanel(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& entity_ids() const noexcept { return ids_; }
  const std::vector<std::int64_t>& time_index() const noexcept { return time_; }
  Eigen::Index entities() const noexcept { return values_.rows(); }
  Eigen::Index periods() const noexcept { return values_.cols(); }

  // Columns [first, first + count).
  ReturnPanel slice_periods(Eigen::Index first, Eigen::Index count) const;

 private:
  Matrix values_;
  std::vector<std::string> ids_;
  std::vector<std::int64_t> time_;
};

// n x r_o matrix of observed factor realizations.
class FactorPanel {
 public:
  FactorPanel() = default;
  // Validates n > r_o + 1, strictly increasing periods, finite values and
  // full column rank after demeaning.
  FactorPanel(Matrix values, std::vector<std::string> names,
              std::vector<std::int64_t> time_index);
  explicit FactorPanel(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::int64_t>& time_index() const noexcept { return time_; }
  Eigen::Index periods() const noexcept { return values_.rows(); }
  Eigen::Index count() const noexcept { return values_.cols(); }

  FactorPanel slice_periods(Eigen::Index first, Eigen::Index count) const;

 private:
  Matrix values_;
  std::vector<std::string> names_;
  std::vector<std::int64_t> time_;
};

// Throws DimensionError naming the first mismatching period when the two
// panels do not share the same time index.
void require_aligned(const ReturnPanel& returns, const FactorPanel& factors);

// Orthogonal projection onto span(basis) or onto its orthogonal complement.
// Applied through a thin orthonormal basis; the n x n matrix is never formed.
class Projector {
 public:
  enum class Kind { onto, complement };

  Projector(const Matrix& basis, Kind kind,
            const NumericSettings& settings = numeric_settings());

  // Applies the projector to every column of m (m has n rows).
  Matrix apply(const Matrix& m) const;
  Vector apply(const Vector& v) const;

  Kind kind() const noexcept { return kind_; }
  const Matrix& orthonormal_basis() const noexcept { return q_; }

 private:
  Matrix q_;
  Kind kind_;
};

// Q(1_n) M: subtracts the column mean from every column.
Matrix demean_columns(const Matrix& m);

// Coefficients minimizing ||response - design * coef||_F, via Householder QR.
// Throws SingularityError when the design is (numerically) rank deficient.
Matrix least_squares(const Matrix& design, const Matrix& response,
                     const NumericSettings& settings = numeric_settings());

struct EigenPairs {
  Vector values;   // descending
  Matrix vectors;  // m x k, orthonormal columns
};

// Leading k eigenpairs of a symmetric matrix.
EigenPairs top_eigenpairs(const Matrix& s, Eigen::Index k,
                          const NumericSettings& settings = numeric_settings());

}  // namespace alphascreen
