#include "opideal/space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "opideal/errors.hpp"

namespace opideal {

namespace {

constexpr double kSvdClamp = 1e-12;

void clamp_descending(Eigen::VectorXd& s) {
  if (s.size() == 0) return;
  const double cutoff = kSvdClamp * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) < cutoff) s(i) = 0.0;
  }
}

template <class Matrix>
Eigen::VectorXd gram_singular_values(const Matrix& m) {
  using Scalar = typename Matrix::Scalar;
  using Square = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Square gram = m.rows() >= m.cols() ? Square(m.adjoint() * m) : Square(m * m.adjoint());
  Eigen::SelfAdjointEigenSolver<Square> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();  // ascending
  Eigen::VectorXd s(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    s(i) = std::sqrt(std::max(0.0, ev(ev.size() - 1 - i)));
  }
  return s;
}

template <class Matrix>
Eigen::VectorXd svd_values(const Matrix& m, SvdRoute route) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::VectorXd s;
  if (route == SvdRoute::Gram) {
    s = gram_singular_values(m);
  } else {
    using Dense = Eigen::Matrix<typename Matrix::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::BDCSVD<Dense> svd(m);
    if (svd.info() != Eigen::Success) throw std::logic_error("SVD failed to converge");
    s = svd.singularValues();
  }
  clamp_descending(s);
  return s;
}

template <class Vector>
double element_norm_impl(const Vector& x, const SpaceDescriptor& d, SvdRoute route) {
  if (static_cast<std::size_t>(x.size()) != d.element_size()) {
    throw DomainError("element of length " + std::to_string(x.size()) + " does not conform to " +
                      d.to_string());
  }
  if (d.kind == SpaceKind::Sequence) {
    return lp_norm(x.cwiseAbs(), d.exponent);
  }
  const auto n = static_cast<Eigen::Index>(d.dim);
  using Scalar = typename Vector::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Map<const Dense> m(x.data(), n, n);
  if (d.is_hilbert()) return m.norm();
  if (route == SvdRoute::Gram && d.exponent.recip() == 0.25) {
    // ||M||_4^4 = ||M^* M||_F^2
    return std::sqrt((m.adjoint() * m).norm());
  }
  return lp_norm(svd_values(m, route), d.exponent);
}

}  // namespace

SpaceDescriptor SpaceDescriptor::sequence(std::size_t n, Exponent u) {
  if (n == 0) throw DomainError("space dimension must be positive");
  return {SpaceKind::Sequence, n, u};
}

SpaceDescriptor SpaceDescriptor::schatten(std::size_t n, Exponent u) {
  if (n == 0) throw DomainError("space dimension must be positive");
  return {SpaceKind::Schatten, n, u};
}

SpaceDescriptor SpaceDescriptor::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (text.empty() || colon == std::string_view::npos || colon < 2) {
    throw DomainError("space must look like l2:16 or S4/3:8, got '" + std::string(text) + "'");
  }
  SpaceKind kind;
  switch (text.front()) {
    case 'l':
    case 'L': kind = SpaceKind::Sequence; break;
    case 's':
    case 'S': kind = SpaceKind::Schatten; break;
    default: throw DomainError("unknown space prefix in '" + std::string(text) + "'");
  }
  const Exponent u = Exponent::parse(text.substr(1, colon - 1));
  std::size_t n = 0;
  const auto dims = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(dims.data(), dims.data() + dims.size(), n);
  if (ec != std::errc() || ptr != dims.data() + dims.size() || n == 0) {
    throw DomainError("invalid dimension in '" + std::string(text) + "'");
  }
  return {kind, n, u};
}

std::string SpaceDescriptor::to_string() const {
  return std::string(kind == SpaceKind::Sequence ? "l" : "S") + exponent.to_string() + ":" +
         std::to_string(dim);
}

double lp_norm(const Eigen::Ref<const Eigen::VectorXd>& a, Exponent p) {
  if (a.size() == 0) return 0.0;
  const double top = a.maxCoeff();
  if (top == 0.0) return 0.0;
  if (p.is_infinite()) return top;
  if (p == Exponent::one()) return a.sum();
  if (p == Exponent::two()) return top * (a / top).norm();
  const double q = p.value();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += std::pow(a(i) / top, q);
  return top * std::pow(acc, p.recip());
}

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXcd>& m, SvdRoute route) {
  return svd_values(m, route);
}

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m, SvdRoute route) {
  return svd_values(m, route);
}

double element_norm(const Eigen::Ref<const Eigen::VectorXcd>& x, const SpaceDescriptor& d,
                    SvdRoute route) {
  return element_norm_impl(x, d, route);
}

double element_norm(const Eigen::Ref<const Eigen::VectorXd>& x, const SpaceDescriptor& d,
                    SvdRoute route) {
  return element_norm_impl(x, d, route);
}

double inclusion_norm(Exponent u, Exponent v, std::size_t n, SpaceKind /*kind*/) {
  // Schatten inclusions reduce to the sequence case on singular values.
  const double exponent = std::max(0.0, v.recip() - u.recip());
  return exponent == 0.0 ? 1.0 : std::pow(static_cast<double>(n), exponent);
}

// ---------------------------------------------------------------------------

SpaceMap::SpaceMap(const SpaceDescriptor& domain, const SpaceDescriptor& codomain,
                   std::optional<Eigen::MatrixXcd> matrix, cdouble scale)
    : domain_(domain), codomain_(codomain), matrix_(std::move(matrix)), scale_(scale) {}

SpaceMap SpaceMap::identity(const SpaceDescriptor& domain, const SpaceDescriptor& codomain, cdouble scale) {
  if (!domain.same_shape(codomain)) {
    throw DomainError("identity needs matching kind and dimension: " + domain.to_string() + " -> " +
                      codomain.to_string());
  }
  return SpaceMap(domain, codomain, std::nullopt, scale);
}

SpaceMap::SpaceMap(const SpaceDescriptor& domain, const SpaceDescriptor& codomain, Eigen::MatrixXcd matrix)
    : domain_(domain), codomain_(codomain) {
  if (static_cast<std::size_t>(matrix.rows()) != codomain.element_size() ||
      static_cast<std::size_t>(matrix.cols()) != domain.element_size()) {
    throw DomainError("map matrix is " + std::to_string(matrix.rows()) + "x" + std::to_string(matrix.cols()) +
                      ", expected " + std::to_string(codomain.element_size()) + "x" +
                      std::to_string(domain.element_size()));
  }
  matrix_ = std::move(matrix);
}

Eigen::MatrixXcd SpaceMap::matrix() const {
  const auto d = static_cast<Eigen::Index>(domain_.element_size());
  if (!matrix_) return scale_ * Eigen::MatrixXcd::Identity(d, d);
  return scale_ * *matrix_;
}

SpaceMap SpaceMap::scaled(cdouble t) const { return SpaceMap(domain_, codomain_, matrix_, scale_ * t); }

SpaceMap SpaceMap::compose_right(const Eigen::MatrixXcd& v) const {
  const auto d = static_cast<Eigen::Index>(domain_.element_size());
  if (v.rows() != d || v.cols() != d) throw DomainError("right factor must be square on the domain");
  if (!matrix_) return SpaceMap(domain_, codomain_, Eigen::MatrixXcd(v), scale_);
  return SpaceMap(domain_, codomain_, Eigen::MatrixXcd(*matrix_ * v), scale_);
}

Element SpaceMap::apply(const Eigen::Ref<const Element>& x) const {
  if (static_cast<std::size_t>(x.size()) != domain_.element_size()) {
    throw DomainError("element does not conform to the map domain " + domain_.to_string());
  }
  if (!matrix_) return scale_ * x;
  return scale_ * (*matrix_ * x);
}

SparseColumns SpaceMap::apply(const SparseColumns& columns) const {
  if (static_cast<std::size_t>(columns.rows()) != domain_.element_size()) {
    throw DomainError("family does not conform to the map domain " + domain_.to_string());
  }
  if (!matrix_) {
    if (scale_ == cdouble(1.0)) return columns;
    return SparseColumns(scale_ * columns);
  }
  const Eigen::MatrixXcd dense = scale_ * (*matrix_ * columns);
  return dense.sparseView();
}

double SpaceMap::frobenius_norm() const {
  if (!matrix_) return std::abs(scale_) * std::sqrt(static_cast<double>(domain_.element_size()));
  return std::abs(scale_) * matrix_->norm();
}

}  // namespace opideal
