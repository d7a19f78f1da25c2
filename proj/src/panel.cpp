#include "alphascreen/panel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace alphascreen {

NumericSettings& numeric_settings() {
  static NumericSettings settings;
  return settings;
}

namespace {

std::vector<std::int64_t> default_periods(Eigen::Index n) {
  std::vector<std::int64_t> t(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = i + 1;
  return t;
}

std::vector<std::string> default_entity_ids(Eigen::Index p) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) ids.push_back("e" + std::to_string(i + 1));
  return ids;
}

void require_increasing(const std::vector<std::int64_t>& t) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] <= t[i - 1]) {
      std::ostringstream msg;
      msg << "time index not strictly increasing at position " << i + 1
          << " (" << t[i - 1] << " then " << t[i] << ")";
      throw DimensionError(msg.str());
    }
  }
}

void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j))) {
        std::ostringstream msg;
        msg << what << " value at (" << i + 1 << ", " << j + 1
            << ") is not finite";
        throw ContractError(msg.str());
      }
    }
  }
}

// Singular values of the design through its R factor.
Vector singular_values_of(const Matrix& design) {
  Eigen::HouseholderQR<Matrix> qr(design);
  const Eigen::Index k = design.cols();
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return Eigen::JacobiSVD<Matrix>(r).singularValues();
}

double condition_from(const Vector& sv) {
  if (sv.size() == 0) return 1.0;
  const double hi = sv.maxCoeff();
  const double lo = sv.minCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

ReturnPanel::ReturnPanel(Matrix values, std::vector<std::string> entity_ids,
                         std::vector<std::int64_t> time_index)
    : values_(std::move(values)), ids_(std::move(entity_ids)),
      time_(std::move(time_index)) {
  if (values_.rows() < 1) throw DimensionError("return panel has no entities");
  if (values_.cols() < 4) {
    throw DimensionError("return panel needs at least 4 periods, got " +
                         std::to_string(values_.cols()));
  }
  if (static_cast<Eigen::Index>(ids_.size()) != values_.rows()) {
    throw DimensionError("entity id count does not match panel rows");
  }
  if (static_cast<Eigen::Index>(time_.size()) != values_.cols()) {
    throw DimensionError("time index length does not match panel columns");
  }
  require_increasing(time_);
  require_finite(values_, "return");
}

ReturnPanel::ReturnPanel(Matrix values)
    : ReturnPanel(values, default_entity_ids(values.rows()),
                  default_periods(values.cols())) {}

ReturnPanel ReturnPanel::slice_periods(Eigen::Index first,
                                       Eigen::Index count) const {
  if (first < 0 || count < 0 || first + count > periods()) {
    throw DimensionError("period slice out of range");
  }
  std::vector<std::int64_t> t(time_.begin() + first,
                              time_.begin() + first + count);
  return ReturnPanel(values_.middleCols(first, count), ids_, std::move(t));
}

FactorPanel::FactorPanel(Matrix values, std::vector<std::string> names,
                         std::vector<std::int64_t> time_index)
    : values_(std::move(values)), names_(std::move(names)),
      time_(std::move(time_index)) {
  if (values_.rows() <= values_.cols() + 1) {
    throw DimensionError("factor panel needs more than r_o + 1 periods");
  }
  if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
    throw DimensionError("factor name count does not match panel columns");
  }
  if (static_cast<Eigen::Index>(time_.size()) != values_.rows()) {
    throw DimensionError("time index length does not match factor rows");
  }
  require_increasing(time_);
  require_finite(values_, "factor");
  if (values_.cols() > 0) {
    const Vector sv = singular_values_of(demean_columns(values_));
    const double cond = condition_from(sv);
    if (!(sv.minCoeff() > numeric_settings().rank_tolerance * sv.maxCoeff())) {
      throw SingularityError(
          "demeaned factors are not of full column rank", cond);
    }
  }
}

FactorPanel::FactorPanel(Matrix values)
    : FactorPanel(values,
                  [&] {
                    std::vector<std::string> n;
                    for (Eigen::Index j = 0; j < values.cols(); ++j) {
                      n.push_back("f" + std::to_string(j + 1));
                    }
                    return n;
                  }(),
                  default_periods(values.rows())) {}

FactorPanel FactorPanel::slice_periods(Eigen::Index first,
                                       Eigen::Index count) const {
  if (first < 0 || count < 0 || first + count > periods()) {
    throw DimensionError("period slice out of range");
  }
  std::vector<std::int64_t> t(time_.begin() + first,
                              time_.begin() + first + count);
  return FactorPanel(values_.middleRows(first, count), names_, std::move(t));
}

void require_aligned(const ReturnPanel& returns, const FactorPanel& factors) {
  const auto& a = returns.time_index();
  const auto& b = factors.time_index();
  const std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (a[i] != b[i]) {
      std::ostringstream msg;
      msg << "returns and factors are misaligned at period " << a[i]
          << " (factors have " << b[i] << ")";
      throw DimensionError(msg.str());
    }
  }
  if (a.size() != b.size()) {
    std::ostringstream msg;
    if (a.size() > b.size()) {
      msg << "factors are missing period " << a[common];
    } else {
      msg << "returns are missing period " << b[common];
    }
    throw DimensionError(msg.str());
  }
}

Projector::Projector(const Matrix& basis, Kind kind,
                     const NumericSettings& settings)
    : kind_(kind) {
  if (basis.rows() == 0) throw DimensionError("empty projector basis");
  if (basis.cols() > basis.rows()) {
    throw DimensionError("projector basis has more columns than rows");
  }
  if (basis.cols() > 0) {
    const Vector sv = singular_values_of(basis);
    if (!(sv.minCoeff() > settings.rank_tolerance * sv.maxCoeff())) {
      throw SingularityError("projector basis is rank deficient",
                             condition_from(sv));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(basis);
  q_ = qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
}

Matrix Projector::apply(const Matrix& m) const {
  if (m.rows() != q_.rows()) {
    throw DimensionError("projector applied to matrix of wrong height");
  }
  Matrix onto = q_ * (q_.transpose() * m);
  if (kind_ == Kind::onto) return onto;
  return m - onto;
}

Vector Projector::apply(const Vector& v) const {
  return apply(Matrix(v)).col(0);
}

Matrix demean_columns(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw DimensionError("cannot demean an empty matrix");
  }
  return m.rowwise() - m.colwise().mean();
}

Matrix least_squares(const Matrix& design, const Matrix& response,
                     const NumericSettings& settings) {
  if (design.rows() != response.rows()) {
    throw DimensionError("design and response have different row counts");
  }
  if (design.cols() == 0 || design.rows() < design.cols()) {
    throw DimensionError("least squares needs rows >= columns >= 1");
  }
  Eigen::HouseholderQR<Matrix> qr(design);
  const Eigen::Index k = design.cols();
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Vector sv = Eigen::JacobiSVD<Matrix>(r).singularValues();
  if (!(sv.minCoeff() > settings.rank_tolerance * sv.maxCoeff())) {
    const double cond = condition_from(sv);
    std::ostringstream msg;
    msg << "rank-deficient design (condition estimate " << cond << ")";
    throw SingularityError(msg.str(), cond);
  }
  return qr.solve(response);
}

EigenPairs top_eigenpairs(const Matrix& s, Eigen::Index k,
                          const NumericSettings& settings) {
  if (s.rows() != s.cols()) throw DimensionError("matrix is not square");
  if (k < 1 || k > s.rows()) {
    throw ContractError("eigenpair count must lie in [1, m]");
  }
  const double scale = s.norm();
  if ((s - s.transpose()).norm() > settings.symmetry_tolerance * scale) {
    throw ContractError("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) throw Error("eigen decomposition failed");
  // Eigen returns ascending order.
  EigenPairs out;
  out.values = es.eigenvalues().tail(k).reverse();
  out.vectors = es.eigenvectors().rightCols(k).rowwise().reverse();
  return out;
}

}  // namespace alphascreen
