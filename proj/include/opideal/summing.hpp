#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "opideal/ascent.hpp"
#include "opideal/exponent.hpp"
#include "opideal/family.hpp"
#include "opideal/norm_estimate.hpp"
#include "opideal/sampling.hpp"
#include "opideal/space.hpp"
#include "opideal/systems.hpp"

namespace opideal {

/// l(T) = (E ||T g||^2)^{1/2} for a standard Gaussian vector g in a Hilbert
/// domain. Exact (Frobenius norm) for Hilbert codomains unless sampling is
/// forced; Sampled otherwise.
NormEstimate ell_norm_mc(const SpaceMap& t, const SamplingConfig& cfg);

/// second_moment(system, T x) / weak_l2(x): CertifiedLower when the numerator
/// bounds from below and the denominator from above, Heuristic otherwise.
NormEstimate pi_b_lower(const SpaceMap& t, const OrthonormalSystem& system, const VectorSystem& family);

struct SearchConfig {
  /// Coordinate-ascent sweeps over per-element weights; 0 keeps the best seed.
  std::size_t weight_sweeps = 1;
  /// Families longer than this are not reweighted.
  std::size_t max_weighted_family = 4;
  /// Include the subgroup kernel family for character systems.
  bool kernel_family = true;
};

/// Seed families tried by pi_b_search for a domain and system.
std::vector<VectorSystem> seed_families(const SpaceDescriptor& domain, const OrthonormalSystem& system,
                                        const SearchConfig& cfg = {});

struct SearchOutcome {
  NormEstimate estimate;
  VectorSystem family;  ///< the (reweighted) family attaining the estimate
};

/// Best certified lower bound over the seed families, any extra families
/// supplied by the caller, and their reweightings.
SearchOutcome pi_b_search_detailed(const SpaceMap& t, const OrthonormalSystem& system, const SearchConfig& cfg = {},
                                   const std::vector<VectorSystem>& extra_families = {});
NormEstimate pi_b_search(const SpaceMap& t, const OrthonormalSystem& system, const SearchConfig& cfg = {});

enum class Ideal { Pi2, PiGamma };

std::string_view to_string(Ideal i) noexcept;

struct MapDescription {
  SpaceKind kind = SpaceKind::Sequence;
  Exponent u;
  Exponent v;
  std::size_t n = 1;
};

enum class ConstantStatus { Exact, OrderOnly };

/// Known value (or growth order) of an ideal norm of id: X_u^n -> X_v^n.
struct ReferenceValue {
  Ideal ideal = Ideal::PiGamma;
  MapDescription map;
  double exponent = 0.0;            ///< growth exponent in n
  ConstantStatus status = ConstantStatus::OrderOnly;
  std::optional<double> value;      ///< present for Exact entries
  std::string provenance;
};

/// Throws DomainError for maps outside the registered table.
ReferenceValue reference_norm(Ideal ideal, const MapDescription& map);

/// Upper bound for an identity through the chain route[0] -> ... -> route[k].
/// The leg route[pivot] -> route[pivot + 1] carries `base` (a bound on the
/// ideal norm of that leg); the other legs contribute their inclusion norms.
NormEstimate factorization_upper(const SpaceMap& t, const std::vector<SpaceDescriptor>& route, std::size_t pivot,
                                 const NormEstimate& base);

/// K_v(Lambda) m^{1/v} for v > 2, using the best K_v lower estimate found.
/// Heuristic: it is a template value, not a certified bound.
NormEstimate kv_bound(const CharacterSet& cset, Exponent v, std::size_t m, const AscentConfig& cfg = {});

}  // namespace opideal
