#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "opideal/ascent.hpp"
#include "opideal/norm_estimate.hpp"
#include "opideal/space.hpp"

namespace opideal {

/// Structure tags that admit closed-form weak-l2 norms.
///  DisjointSupport: sequence elements with pairwise disjoint supports, or
///    Schatten elements with pairwise disjoint row sets and column sets.
///  RankOne: Schatten elements c * e_j e_k^*, each at a distinct (j, k).
enum class FamilyStructure { Generic, DisjointSupport, RankOne };

std::string_view to_string(FamilyStructure s) noexcept;

/// A finite family x_1..x_m of elements of one space, stored as sparse columns.
class VectorSystem {
 public:
  VectorSystem(const SpaceDescriptor& space, SparseColumns columns, FamilyStructure structure,
               std::string description = {});
  static VectorSystem from_elements(const SpaceDescriptor& space, const std::vector<Element>& elements,
                                    FamilyStructure structure, std::string description = {});

  const SpaceDescriptor& space() const noexcept { return space_; }
  const SparseColumns& columns() const noexcept { return columns_; }
  FamilyStructure structure() const noexcept { return structure_; }
  const std::string& description() const noexcept { return description_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(columns_.cols()); }
  Element element(std::size_t i) const;

  /// Multiplies element i by weights(i); the structure tag is preserved.
  VectorSystem reweighted(const Eigen::VectorXd& weights) const;
  /// Images T x_i in T's codomain (tagged Generic).
  VectorSystem mapped(const SpaceMap& map) const;
  /// Same family viewed in another exponent of the same shape.
  VectorSystem in_space(const SpaceDescriptor& other) const;
  /// Zero-padded copy in a space of the same kind and exponent with dim >= this one.
  VectorSystem embedded(const SpaceDescriptor& larger) const;

 private:
  void validate() const;

  SpaceDescriptor space_;
  SparseColumns columns_;
  FamilyStructure structure_;
  std::string description_;
};

namespace families {

/// e_1..e_n of l_u^n.
VectorSystem coordinate_basis(const SpaceDescriptor& space);
/// k indicator vectors of contiguous near-equal blocks (sequence), or k
/// block-diagonal identities (Schatten). Requires 1 <= k <= n.
VectorSystem disjoint_blocks(const SpaceDescriptor& space, std::size_t k);
/// Matrix units e_j e_k^* at the listed positions.
VectorSystem matrix_units(const SpaceDescriptor& space, const std::vector<std::pair<std::size_t, std::size_t>>& pattern,
                          std::string description = "units");
/// All n^2 matrix units.
VectorSystem grid_units(const SpaceDescriptor& space);
/// e_1 e_k^*, k = 1..n: spans an isometric copy of l_2^n in every S_u^n.
VectorSystem row_units(const SpaceDescriptor& space);
/// e_j e_j^*, j = 1..n.
VectorSystem diagonal_units(const SpaceDescriptor& space);

}  // namespace families

/// Size of a maximum matching in the bipartite support pattern (rows vs columns).
std::size_t term_rank(const std::vector<std::pair<std::size_t, std::size_t>>& pattern, std::size_t n);

/// Norm of the synthesis map l_2^m -> E, a -> sum a_i x_i.
///  Hilbert E or structured families: closed form (Exact, or CertifiedUpper
///  for rank-one patterns whose extremal matching is not attained).
///  Generic otherwise: Heuristic value from ascent over the l_2 sphere.
NormEstimate weak_l2_norm(const VectorSystem& family, const AscentConfig& ascent = {8, 200, 0.1, 1e-8, 0, 1});

/// Certified upper bound on the weak-l2 norm for every family. Generic
/// non-Hilbert families use ||id: l_2 -> E|| * ||synthesis||_{2->2}.
NormEstimate weak_l2_upper(const VectorSystem& family);

}  // namespace opideal
