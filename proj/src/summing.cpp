#include "opideal/summing.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "opideal/errors.hpp"
#include "opideal/limit_order.hpp"

namespace opideal {

NormEstimate ell_norm_mc(const SpaceMap& t, const SamplingConfig& cfg) {
  if (!t.domain().is_hilbert()) throw DomainError("the l-norm needs a Hilbert domain, got " + t.domain().to_string());
  if (t.codomain().is_hilbert() && !cfg.force_sampling) {
    return NormEstimate::exact(t.frobenius_norm(), "l-norm (Hilbert closed form)");
  }
  const auto& codomain = t.codomain();
  const std::size_t dim = t.domain().element_size();
  MomentSummary summary;
  if (t.is_identity() && cfg.gaussian == GaussianKind::Real && t.scale().imag() == 0.0) {
    const double s = t.scale().real();
    summary = gaussian_mean(cfg, dim, [&](const Eigen::VectorXcd& g) {
      const Eigen::VectorXd z = s * g.real();
      const double nz = element_norm(z, codomain, SvdRoute::Gram);
      return nz * nz;
    });
  } else {
    summary = gaussian_mean(cfg, dim, [&](const Eigen::VectorXcd& g) {
      const double nz = element_norm(t.apply(g), codomain, SvdRoute::Gram);
      return nz * nz;
    });
  }
  const auto [value, se] = root_of_mean(summary);
  return NormEstimate::sampled(value, se, "l-norm (Monte Carlo)");
}

NormEstimate pi_b_lower(const SpaceMap& t, const OrthonormalSystem& system, const VectorSystem& family) {
  if (!family.space().same_shape(t.domain())) throw DomainError("family does not live in the map domain");
  const VectorSystem in_domain = family.in_space(t.domain());
  const NormEstimate den = weak_l2_norm(in_domain);
  if (!(den.value > 0.0)) throw DomainError("family has zero weak-l2 norm");
  const NormEstimate num = second_moment(system, in_domain.mapped(t));
  const double value = num.value / den.value;
  std::optional<double> se;
  if (num.std_error) se = *num.std_error / den.value;
  const std::string method = "second moment / weak-l2 (" + std::string(to_string(num.cert)) + " / " +
                             std::string(to_string(den.cert)) + ")";
  const bool den_upper = den.cert == Certification::Exact || den.cert == Certification::CertifiedUpper;
  NormEstimate out = num.bounds_below() && den_upper ? NormEstimate::lower(value, method, se)
                                                     : NormEstimate::heuristic(value, method, se);
  return std::move(out).with_witness({family.description(), {}});
}

std::vector<VectorSystem> seed_families(const SpaceDescriptor& domain, const OrthonormalSystem& system,
                                        const SearchConfig& cfg) {
  const std::size_t n = domain.dim;
  const std::size_t cap = system.capacity();
  std::vector<VectorSystem> out;
  std::vector<std::size_t> block_counts;
  for (std::size_t k = 1; k < n; k *= 2) block_counts.push_back(k);
  block_counts.push_back(n);
  if (domain.kind == SpaceKind::Sequence) {
    for (std::size_t k : block_counts)
      if (k <= cap) out.push_back(families::disjoint_blocks(domain, k));
    if (cfg.kernel_family && !system.is_gaussian() && domain.is_hilbert()) {
      const auto& cset = system.character_set();
      if (cset.group().factors().size() == 1 && n <= cset.group().order() && cset.size() > 0) {
        out.push_back(subgroup_kernel_family(domain, cset));
      }
    }
    return out;
  }
  for (std::size_t k : block_counts)
    if (k < n && k <= cap) out.push_back(families::disjoint_blocks(domain, k));
  if (n <= cap) {
    out.push_back(families::diagonal_units(domain));
    out.push_back(families::row_units(domain));
  }
  if (n * n <= cap) out.push_back(families::grid_units(domain));
  return out;
}

namespace {

std::string weights_suffix(const Eigen::VectorXd& w) {
  std::string s = " weights=[";
  char buf[32];
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.4g", i ? "," : "", w(i));
    s += buf;
  }
  return s + "]";
}

bool better(const NormEstimate& a, const std::optional<NormEstimate>& b) {
  return a.cert == Certification::CertifiedLower && (!b || a.value > b->value);
}

}  // namespace

SearchOutcome pi_b_search_detailed(const SpaceMap& t, const OrthonormalSystem& system, const SearchConfig& cfg,
                                   const std::vector<VectorSystem>& extra_families) {
  std::optional<SearchOutcome> best;
  auto consider = [&](NormEstimate est, const VectorSystem& fam) {
    if (better(est, best ? std::optional<NormEstimate>(best->estimate) : std::nullopt)) {
      best.emplace(SearchOutcome{std::move(est), fam});
    }
  };
  std::vector<VectorSystem> candidates = seed_families(t.domain(), system, cfg);
  for (const auto& extra : extra_families) {
    if (extra.size() <= system.capacity()) candidates.push_back(extra.in_space(t.domain()));
  }
  for (const auto& seed : candidates) {
    NormEstimate base = pi_b_lower(t, system, seed);
    consider(base, seed);
    if (cfg.weight_sweeps == 0 || seed.size() < 2 || seed.size() > cfg.max_weighted_family) continue;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(seed.size()));
    NormEstimate current = base;
    std::optional<VectorSystem> current_family;
    for (std::size_t sweep = 0; sweep < cfg.weight_sweeps; ++sweep) {
      bool improved = false;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        for (double factor : {2.0, 0.5}) {
          Eigen::VectorXd trial = w;
          trial(i) *= factor;
          const std::string& base_desc = seed.description();
          VectorSystem fam(seed.space(), seed.reweighted(trial).columns(), seed.structure(),
                           base_desc.substr(0, base_desc.find(" weights=")) + weights_suffix(trial));
          NormEstimate est = pi_b_lower(t, system, fam);
          if (est.cert == Certification::CertifiedLower && est.value > current.value) {
            current = std::move(est);
            current_family = std::move(fam);
            w = trial;
            improved = true;
          }
        }
      }
      if (!improved) break;
    }
    if (current_family) consider(current, *current_family);
  }
  if (!best) throw DomainError("no seed family produced a certified lower bound");
  best->estimate.method = "family search: " + best->estimate.method;
  return *best;
}

NormEstimate pi_b_search(const SpaceMap& t, const OrthonormalSystem& system, const SearchConfig& cfg) {
  return pi_b_search_detailed(t, system, cfg).estimate;
}

std::string_view to_string(Ideal i) noexcept { return i == Ideal::Pi2 ? "pi2" : "pigamma"; }

ReferenceValue reference_norm(Ideal ideal, const MapDescription& map) {
  if (map.n == 0) throw DomainError("dimension must be positive");
  ReferenceValue r;
  r.ideal = ideal;
  r.map = map;
  const double n = static_cast<double>(map.n);
  const bool schatten = map.kind == SpaceKind::Schatten;
  if (ideal == Ideal::Pi2) {
    if (map.v.recip() < 0.5) throw DomainError("pi2 reference values are registered only for v <= 2");
    if (schatten) {
      r.exponent = map.v.recip() + std::min(0.5, 1.0 - map.u.recip());
      r.status = ConstantStatus::Exact;
      r.value = std::pow(n, r.exponent);
      r.provenance = "2-summing norm of Schatten identities, v <= 2";
    } else {
      r.exponent = gamma_limit_order(map.u, map.v).value;
      r.status = ConstantStatus::OrderOnly;
      r.provenance = "2-summing and Gaussian limit orders agree for v <= 2";
    }
    return r;
  }
  if (map.u == Exponent::two() && map.v == Exponent::two()) {
    r.exponent = schatten ? 1.0 : 0.5;
    r.status = ConstantStatus::Exact;
    r.value = std::pow(n, r.exponent);
    r.provenance = "Hilbert-Schmidt norm of a Hilbert identity";
    return r;
  }
  if (schatten) {
    r.exponent = theorem2_exponent(map.u, map.v);
    r.provenance = "Gaussian-summing norm of Schatten identities (order)";
  } else {
    r.exponent = gamma_limit_order(map.u, map.v).value;
    r.provenance = "Gaussian limit order of l identities";
  }
  r.status = ConstantStatus::OrderOnly;
  return r;
}

NormEstimate factorization_upper(const SpaceMap& t, const std::vector<SpaceDescriptor>& route, std::size_t pivot,
                                 const NormEstimate& base) {
  if (!t.is_identity()) throw DomainError("factorization bounds are implemented for identities");
  if (route.size() < 2) throw DomainError("a route needs at least two spaces");
  if (pivot + 1 >= route.size()) throw DomainError("pivot leg out of range");
  if (!(route.front() == t.domain()) || !(route.back() == t.codomain())) {
    throw DomainError("route endpoints must be the map domain and codomain");
  }
  for (const auto& s : route)
    if (!s.same_shape(t.domain())) throw DomainError("route spaces must share kind and dimension");
  double factor = std::abs(t.scale());
  std::string method = "factorization";
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    method += (i ? " -> " : " ") + route[i].to_string();
    if (i == pivot) continue;
    factor *= inclusion_norm(route[i].exponent, route[i + 1].exponent, t.domain().dim, t.domain().kind);
  }
  method += " -> " + route.back().to_string();
  std::optional<double> se;
  if (base.std_error) se = *base.std_error * factor;
  const double value = base.value * factor;
  return base.bounds_above() ? NormEstimate::upper(value, method, se) : NormEstimate::heuristic(value, method, se);
}

NormEstimate kv_bound(const CharacterSet& cset, Exponent v, std::size_t m, const AscentConfig& cfg) {
  if (v.recip() >= 0.5) throw DomainError("the K_v template needs v > 2");
  if (m == 0) throw DomainError("m must be positive");
  const NormEstimate k = kp_constant_lower(cset, v, cfg);
  return NormEstimate::heuristic(k.value * std::pow(static_cast<double>(m), v.recip()), "K_v m^(1/v) template");
}

}  // namespace opideal
