#include "opideal/family.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "opideal/errors.hpp"

namespace opideal {

std::string_view to_string(FamilyStructure s) noexcept {
  switch (s) {
    case FamilyStructure::Generic: return "generic";
    case FamilyStructure::DisjointSupport: return "disjoint";
    case FamilyStructure::RankOne: return "rank-one";
  }
  return "generic";
}

namespace {

using Position = std::pair<std::size_t, std::size_t>;

template <class Fn>
void for_each_nonzero(const SparseColumns& cols, Eigen::Index c, Fn&& fn) {
  for (SparseColumns::InnerIterator it(cols, c); it; ++it) {
    if (it.value() != cdouble(0.0)) fn(static_cast<std::size_t>(it.row()), it.value());
  }
}

// Largest singular value of the synthesis matrix via its m x m Gram matrix.
double synthesis_spectral_norm(const SparseColumns& cols) {
  if (cols.cols() == 0) return 0.0;
  const Eigen::MatrixXcd gram = Eigen::MatrixXcd(cols.adjoint() * cols);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

// Exponent-clamped surrogate so the ascent sees a differentiable objective.
double surrogate_exponent(Exponent u) {
  if (u.is_infinite()) return 64.0;
  return std::clamp(u.value(), 1.02, 64.0);
}

double lp_value_and_dual(const Eigen::VectorXcd& y, double q, Eigen::VectorXcd* dual) {
  const Eigen::VectorXd mag = y.cwiseAbs();
  const double top = mag.maxCoeff();
  if (top == 0.0) {
    if (dual) dual->setZero(y.size());
    return 0.0;
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mag.size(); ++i) acc += std::pow(mag(i) / top, q);
  const double norm = top * std::pow(acc, 1.0 / q);
  if (dual) {
    dual->resize(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double r = mag(i) / norm;
      (*dual)(i) = mag(i) > 0.0 ? y(i) / mag(i) * std::pow(r, q - 1.0) : cdouble(0.0);
    }
  }
  return norm;
}

NormEstimate generic_ascent(const VectorSystem& family, const AscentConfig& cfg) {
  const auto& space = family.space();
  const SparseColumns& cols = family.columns();
  const double q = surrogate_exponent(space.exponent);
  const auto n = static_cast<Eigen::Index>(space.dim);

  SmoothObjective smooth = [&](const Eigen::VectorXcd& a, Eigen::VectorXcd* grad) -> double {
    const Eigen::VectorXcd y = cols * a;
    if (space.kind == SpaceKind::Sequence) {
      Eigen::VectorXcd dual;
      const double v = lp_value_and_dual(y, q, grad ? &dual : nullptr);
      if (grad) *grad = cols.adjoint() * dual;
      return v;
    }
    const Eigen::Map<const Eigen::MatrixXcd> m(y.data(), n, n);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, grad ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0);
    const Eigen::VectorXcd s = svd.singularValues().cast<cdouble>();
    Eigen::VectorXcd ds;
    const double v = lp_value_and_dual(s, q, grad ? &ds : nullptr);
    if (grad) {
      const Eigen::MatrixXcd g = svd.matrixU() * ds.real().asDiagonal() * svd.matrixV().adjoint();
      const Eigen::Map<const Eigen::VectorXcd> gv(g.data(), g.size());
      *grad = cols.adjoint() * gv;
    }
    return v;
  };
  ExactObjective exact = [&](const Eigen::VectorXcd& a) { return element_norm(Element(cols * a), space); };

  const AscentResult best = sphere_ascent(family.size(), smooth, exact, cfg);
  return NormEstimate::heuristic(best.value, "weak-l2 ascent")
      .with_witness({family.description(), best.argmax});
}

}  // namespace

// ---------------------------------------------------------------------------

VectorSystem::VectorSystem(const SpaceDescriptor& space, SparseColumns columns, FamilyStructure structure,
                           std::string description)
    : space_(space), columns_(std::move(columns)), structure_(structure), description_(std::move(description)) {
  columns_.prune(cdouble(0.0));
  columns_.makeCompressed();
  validate();
}

VectorSystem VectorSystem::from_elements(const SpaceDescriptor& space, const std::vector<Element>& elements,
                                         FamilyStructure structure, std::string description) {
  const auto rows = static_cast<Eigen::Index>(space.element_size());
  std::vector<Eigen::Triplet<cdouble>> triplets;
  for (std::size_t c = 0; c < elements.size(); ++c) {
    if (elements[c].size() != rows) {
      throw DomainError("family element " + std::to_string(c) + " does not conform to " + space.to_string());
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (elements[c](r) != cdouble(0.0)) triplets.emplace_back(r, static_cast<Eigen::Index>(c), elements[c](r));
    }
  }
  SparseColumns cols(rows, static_cast<Eigen::Index>(elements.size()));
  cols.setFromTriplets(triplets.begin(), triplets.end());
  return VectorSystem(space, std::move(cols), structure, std::move(description));
}

void VectorSystem::validate() const {
  if (static_cast<std::size_t>(columns_.rows()) != space_.element_size()) {
    throw DomainError("family rows do not conform to " + space_.to_string());
  }
  const auto n = space_.dim;
  switch (structure_) {
    case FamilyStructure::Generic: return;
    case FamilyStructure::DisjointSupport: {
      std::vector<char> used_rows(space_.kind == SpaceKind::Sequence ? space_.element_size() : n, 0);
      std::vector<char> used_cols(n, 0);
      for (Eigen::Index c = 0; c < columns_.cols(); ++c) {
        std::set<std::size_t> rows, cols;
        for_each_nonzero(columns_, c, [&](std::size_t idx, cdouble) {
          if (space_.kind == SpaceKind::Sequence) {
            rows.insert(idx);
          } else {
            rows.insert(idx % n);
            cols.insert(idx / n);
          }
        });
        for (auto r : rows) {
          if (used_rows[r]) throw DomainError("family tagged disjoint has overlapping supports");
          used_rows[r] = 1;
        }
        for (auto k : cols) {
          if (used_cols[k]) throw DomainError("family tagged disjoint has overlapping column supports");
          used_cols[k] = 1;
        }
      }
      return;
    }
    case FamilyStructure::RankOne: {
      if (space_.kind != SpaceKind::Schatten) throw DomainError("rank-one families live in Schatten spaces");
      std::vector<char> used(space_.element_size(), 0);
      for (Eigen::Index c = 0; c < columns_.cols(); ++c) {
        std::size_t count = 0;
        for_each_nonzero(columns_, c, [&](std::size_t idx, cdouble) {
          ++count;
          if (used[idx]) throw DomainError("rank-one family repeats a matrix unit");
          used[idx] = 1;
        });
        if (count != 1) throw DomainError("rank-one family element is not a single matrix unit");
      }
      return;
    }
  }
}

Element VectorSystem::element(std::size_t i) const {
  if (i >= size()) throw DomainError("family index out of range");
  return Element(columns_.col(static_cast<Eigen::Index>(i)));
}

VectorSystem VectorSystem::reweighted(const Eigen::VectorXd& weights) const {
  if (static_cast<std::size_t>(weights.size()) != size()) throw DomainError("weight count mismatch");
  SparseColumns scaled = columns_ * weights.cast<cdouble>().asDiagonal();
  return VectorSystem(space_, std::move(scaled), structure_, description_);
}

VectorSystem VectorSystem::mapped(const SpaceMap& map) const {
  if (!map.domain().same_shape(space_)) throw DomainError("family does not live in the map domain");
  return VectorSystem(map.codomain(), map.apply(columns_), FamilyStructure::Generic, description_);
}

VectorSystem VectorSystem::in_space(const SpaceDescriptor& other) const {
  if (!other.same_shape(space_)) throw DomainError("in_space needs the same kind and dimension");
  return VectorSystem(other, columns_, structure_, description_);
}

VectorSystem VectorSystem::embedded(const SpaceDescriptor& larger) const {
  if (larger.kind != space_.kind || larger.dim < space_.dim) {
    throw DomainError("embedding needs the same kind and a dimension at least " + std::to_string(space_.dim));
  }
  const std::size_t n = space_.dim;
  std::vector<Eigen::Triplet<cdouble>> triplets;
  for (Eigen::Index c = 0; c < columns_.outerSize(); ++c) {
    for (SparseColumns::InnerIterator it(columns_, c); it; ++it) {
      auto row = static_cast<std::size_t>(it.row());
      if (space_.kind == SpaceKind::Schatten) row = row % n + (row / n) * larger.dim;
      triplets.emplace_back(static_cast<Eigen::Index>(row), c, it.value());
    }
  }
  SparseColumns cols(static_cast<Eigen::Index>(larger.element_size()), columns_.cols());
  cols.setFromTriplets(triplets.begin(), triplets.end());
  return VectorSystem(larger, std::move(cols), structure_, description_);
}

// ---------------------------------------------------------------------------

namespace families {

VectorSystem coordinate_basis(const SpaceDescriptor& space) {
  if (space.kind != SpaceKind::Sequence) throw DomainError("coordinate basis is defined for sequence spaces");
  return disjoint_blocks(space, space.dim);
}

VectorSystem disjoint_blocks(const SpaceDescriptor& space, std::size_t k) {
  const std::size_t n = space.dim;
  if (k == 0 || k > n) throw DomainError("block count must lie in [1, n]");
  std::vector<Eigen::Triplet<cdouble>> triplets;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t begin = b * n / k;
    const std::size_t end = (b + 1) * n / k;
    for (std::size_t j = begin; j < end; ++j) {
      const std::size_t row = space.kind == SpaceKind::Sequence ? j : j + j * n;
      triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(b), 1.0);
    }
  }
  SparseColumns cols(static_cast<Eigen::Index>(space.element_size()), static_cast<Eigen::Index>(k));
  cols.setFromTriplets(triplets.begin(), triplets.end());
  const std::string desc = k == n && space.kind == SpaceKind::Sequence ? "coordinate basis"
                                                                       : "blocks-" + std::to_string(k);
  return VectorSystem(space, std::move(cols), FamilyStructure::DisjointSupport, desc);
}

VectorSystem matrix_units(const SpaceDescriptor& space, const std::vector<Position>& pattern,
                          std::string description) {
  if (space.kind != SpaceKind::Schatten) throw DomainError("matrix units live in Schatten spaces");
  const std::size_t n = space.dim;
  std::vector<Eigen::Triplet<cdouble>> triplets;
  for (std::size_t c = 0; c < pattern.size(); ++c) {
    const auto [j, k] = pattern[c];
    if (j >= n || k >= n) throw DomainError("matrix unit position out of range");
    triplets.emplace_back(static_cast<Eigen::Index>(j + k * n), static_cast<Eigen::Index>(c), 1.0);
  }
  SparseColumns cols(static_cast<Eigen::Index>(space.element_size()), static_cast<Eigen::Index>(pattern.size()));
  cols.setFromTriplets(triplets.begin(), triplets.end());
  return VectorSystem(space, std::move(cols), FamilyStructure::RankOne, std::move(description));
}

VectorSystem grid_units(const SpaceDescriptor& space) {
  std::vector<Position> pattern;
  pattern.reserve(space.dim * space.dim);
  for (std::size_t k = 0; k < space.dim; ++k)
    for (std::size_t j = 0; j < space.dim; ++j) pattern.emplace_back(j, k);
  return matrix_units(space, pattern, "grid units");
}

VectorSystem row_units(const SpaceDescriptor& space) {
  std::vector<Position> pattern;
  for (std::size_t k = 0; k < space.dim; ++k) pattern.emplace_back(0, k);
  return matrix_units(space, pattern, "row units");
}

VectorSystem diagonal_units(const SpaceDescriptor& space) {
  std::vector<Position> pattern;
  for (std::size_t j = 0; j < space.dim; ++j) pattern.emplace_back(j, j);
  return matrix_units(space, pattern, "diagonal units");
}

}  // namespace families

// ---------------------------------------------------------------------------

std::size_t term_rank(const std::vector<Position>& pattern, std::size_t n) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [j, k] : pattern) adj.at(j).push_back(k);
  std::vector<std::ptrdiff_t> match_col(n, -1);
  std::vector<char> seen;
  std::function<bool(std::size_t)> augment = [&](std::size_t row) {
    for (auto col : adj[row]) {
      if (seen[col]) continue;
      seen[col] = 1;
      if (match_col[col] < 0 || augment(static_cast<std::size_t>(match_col[col]))) {
        match_col[col] = static_cast<std::ptrdiff_t>(row);
        return true;
      }
    }
    return false;
  };
  std::size_t size = 0;
  for (std::size_t row = 0; row < n; ++row) {
    seen.assign(n, 0);
    if (augment(row)) ++size;
  }
  return size;
}

namespace {

NormEstimate disjoint_closed_form(const VectorSystem& family) {
  const auto& space = family.space();
  Eigen::VectorXd weights(static_cast<Eigen::Index>(family.size()));
  for (std::size_t i = 0; i < family.size(); ++i) {
    weights(static_cast<Eigen::Index>(i)) = element_norm(family.element(i), space);
  }
  const double r = space.exponent.recip();
  if (r <= 0.5) return NormEstimate::exact(lp_norm(weights, Exponent::infinity()), "weak-l2 disjoint (u>=2)");
  // sup_{|a|_2=1} |(a_i c_i)|_u = |c|_s with 1/s = 1/u - 1/2 (Hoelder).
  return NormEstimate::exact(lp_norm(weights, Exponent::from_recip(r - 0.5)), "weak-l2 disjoint (u<2)");
}

NormEstimate rank_one_closed_form(const VectorSystem& family) {
  const auto& space = family.space();
  const std::size_t n = space.dim;
  std::vector<Position> pattern;
  std::vector<double> magnitude;
  const SparseColumns& cols = family.columns();
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    for_each_nonzero(cols, c, [&](std::size_t idx, cdouble v) {
      pattern.emplace_back(idx % n, idx / n);
      magnitude.push_back(std::abs(v));
    });
  }
  if (pattern.empty()) return NormEstimate::exact(0.0, "weak-l2 rank-one (empty)");
  const double top = *std::max_element(magnitude.begin(), magnitude.end());
  const double r = space.exponent.recip();
  if (r <= 0.5) return NormEstimate::exact(top, "weak-l2 rank-one (u>=2)");

  // rank(A) <= term rank of its support, and |A|_{S_u} <= rank^{1/u-1/2} |A|_F.
  const std::size_t tau = term_rank(pattern, n);
  std::vector<Position> extremal;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (magnitude[i] >= top * (1.0 - 1e-12)) extremal.push_back(pattern[i]);
  }
  const std::size_t tau_top = term_rank(extremal, n);
  const double value = top * std::pow(static_cast<double>(tau), r - 0.5);
  if (tau_top == tau) return NormEstimate::exact(value, "weak-l2 rank-one (u<2, matching attained)");
  return NormEstimate::upper(value, "weak-l2 rank-one (u<2, term-rank bound)");
}

}  // namespace

NormEstimate weak_l2_norm(const VectorSystem& family, const AscentConfig& ascent) {
  if (family.size() == 0) return NormEstimate::exact(0.0, "weak-l2 empty family");
  switch (family.structure()) {
    case FamilyStructure::DisjointSupport: return disjoint_closed_form(family);
    case FamilyStructure::RankOne: return rank_one_closed_form(family);
    case FamilyStructure::Generic: break;
  }
  if (family.space().is_hilbert()) {
    return NormEstimate::exact(synthesis_spectral_norm(family.columns()), "weak-l2 spectral norm");
  }
  return generic_ascent(family, ascent);
}

NormEstimate weak_l2_upper(const VectorSystem& family) {
  if (family.structure() != FamilyStructure::Generic || family.space().is_hilbert() || family.size() == 0) {
    return weak_l2_norm(family);
  }
  const auto& space = family.space();
  const double factor = inclusion_norm(Exponent::two(), space.exponent, space.dim, space.kind);
  return NormEstimate::upper(factor * synthesis_spectral_norm(family.columns()), "weak-l2 inclusion bound");
}

}  // namespace opideal
