#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "opideal/exponent.hpp"

namespace opideal {

using cdouble = std::complex<double>;
/// Vectorized element: a coordinate vector, or an n x n matrix in column-major order.
using Element = Eigen::VectorXcd;
using SparseColumns = Eigen::SparseMatrix<cdouble, Eigen::ColMajor>;

enum class SpaceKind { Sequence, Schatten };

/// l_u^n or S_u^n.
struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::Sequence;
  std::size_t dim = 1;
  Exponent exponent;

  static SpaceDescriptor sequence(std::size_t n, Exponent u);
  static SpaceDescriptor schatten(std::size_t n, Exponent u);
  /// "l2:16", "linf:8", "S4/3:8", "Sinf:32".
  static SpaceDescriptor parse(std::string_view text);

  /// Length of a vectorized element (n or n^2).
  std::size_t element_size() const noexcept { return kind == SpaceKind::Sequence ? dim : dim * dim; }
  bool is_hilbert() const noexcept { return exponent == Exponent::two(); }
  SpaceDescriptor with_exponent(Exponent u) const { return {kind, dim, u}; }
  bool same_shape(const SpaceDescriptor& other) const noexcept {
    return kind == other.kind && dim == other.dim;
  }
  std::string to_string() const;

  friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;
};

/// Route used to obtain singular values inside Schatten norms.
///  Accurate: bidiagonal SVD.  Gram: eigenvalues of M*M (faster, absolute
///  error of order sqrt(eps)*||M|| on the smallest values).
enum class SvdRoute { Accurate, Gram };

/// l_p norm of a vector of nonnegative magnitudes, computed with scaling.
double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& magnitudes, Exponent p);

/// Singular values in descending order; values below 1e-12 * s_1 are clamped to 0.
Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXcd>& m,
                                SvdRoute route = SvdRoute::Accurate);
Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                SvdRoute route = SvdRoute::Accurate);

double element_norm(const Eigen::Ref<const Eigen::VectorXcd>& x, const SpaceDescriptor& d,
                    SvdRoute route = SvdRoute::Accurate);
double element_norm(const Eigen::Ref<const Eigen::VectorXd>& x, const SpaceDescriptor& d,
                    SvdRoute route = SvdRoute::Accurate);

/// ||id : X_u^n -> X_v^n|| = n^max(0, 1/v - 1/u) for both kinds.
double inclusion_norm(Exponent u, Exponent v, std::size_t n, SpaceKind kind);

/// A linear map between two descriptors. The identity (possibly scaled) is
/// kept implicit so that n^2 x n^2 Schatten maps are never materialized.
class SpaceMap {
 public:
  static SpaceMap identity(const SpaceDescriptor& domain, const SpaceDescriptor& codomain,
                           cdouble scale = 1.0);
  SpaceMap(const SpaceDescriptor& domain, const SpaceDescriptor& codomain, Eigen::MatrixXcd matrix);

  const SpaceDescriptor& domain() const noexcept { return domain_; }
  const SpaceDescriptor& codomain() const noexcept { return codomain_; }
  bool is_identity() const noexcept { return !matrix_.has_value(); }
  cdouble scale() const noexcept { return scale_; }
  /// Dense matrix of the map (materializes the identity).
  Eigen::MatrixXcd matrix() const;

  SpaceMap scaled(cdouble t) const;
  /// T * V for a square matrix V acting on the domain.
  SpaceMap compose_right(const Eigen::MatrixXcd& v) const;

  Element apply(const Eigen::Ref<const Element>& x) const;
  SparseColumns apply(const SparseColumns& columns) const;
  double frobenius_norm() const;

 private:
  SpaceMap(const SpaceDescriptor& domain, const SpaceDescriptor& codomain,
           std::optional<Eigen::MatrixXcd> matrix, cdouble scale);

  SpaceDescriptor domain_;
  SpaceDescriptor codomain_;
  std::optional<Eigen::MatrixXcd> matrix_;
  cdouble scale_ = 1.0;
};

}  // namespace opideal
