#include "opideal/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "opideal/errors.hpp"
#include "opideal/parallel.hpp"

namespace opideal {

namespace {

constexpr std::size_t kPointChunk = 4096;

std::int64_t positive_mod(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

CharacterGroup CharacterGroup::cyclic(std::int64_t order) { return product({order}); }

CharacterGroup CharacterGroup::product(std::vector<std::int64_t> factors) {
  if (factors.empty()) throw DomainError("a character group needs at least one factor");
  CharacterGroup g;
  g.order_ = 1;
  for (auto f : factors) {
    if (f < 1) throw DomainError("cyclic factors must be positive");
    g.order_ *= static_cast<std::size_t>(f);
  }
  g.factors_ = std::move(factors);
  return g;
}

std::vector<std::int64_t> CharacterGroup::point(std::size_t index) const {
  if (index >= order_) throw DomainError("group point index out of range");
  std::vector<std::int64_t> x(factors_.size());
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    const auto f = static_cast<std::size_t>(factors_[j]);
    x[j] = static_cast<std::int64_t>(index % f);
    index /= f;
  }
  return x;
}

Frequency CharacterGroup::reduce(const Frequency& k) const {
  if (k.size() != factors_.size()) throw DomainError("frequency tuple length does not match the group");
  Frequency r(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) r[j] = positive_mod(k[j], factors_[j]);
  return r;
}

cdouble CharacterGroup::character(const Frequency& k, std::size_t point_index) const {
  const auto x = point(point_index);
  const Frequency kr = reduce(k);
  double turns = 0.0;
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    const std::int64_t t = (kr[j] * x[j]) % factors_[j];
    turns += static_cast<double>(t) / static_cast<double>(factors_[j]);
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * turns);
}

// ---------------------------------------------------------------------------

CharacterSet::CharacterSet(CharacterGroup group, std::vector<Frequency> freqs) : group_(std::move(group)) {
  std::set<Frequency> seen;
  freqs_.reserve(freqs.size());
  for (const auto& k : freqs) {
    Frequency r = group_.reduce(k);
    if (!seen.insert(r).second) throw DomainError("character frequencies must be distinct in the group");
    freqs_.push_back(std::move(r));
  }
  const auto order = group_.order();
  auto table = std::make_shared<Eigen::MatrixXcd>(static_cast<Eigen::Index>(freqs_.size()),
                                                  static_cast<Eigen::Index>(order));
  if (group_.factors().size() == 1) {
    const std::int64_t n = group_.factors()[0];
    std::vector<cdouble> roots(static_cast<std::size_t>(n));
    for (std::int64_t t = 0; t < n; ++t) {
      roots[static_cast<std::size_t>(t)] =
          std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n));
    }
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
      const std::int64_t k = freqs_[i][0];
      for (std::int64_t x = 0; x < n; ++x) {
        (*table)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x)) = roots[static_cast<std::size_t>((k * x) % n)];
      }
    }
  } else {
    for (std::size_t i = 0; i < freqs_.size(); ++i)
      for (std::size_t x = 0; x < order; ++x)
        (*table)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x)) = group_.character(freqs_[i], x);
  }
  table_ = std::move(table);
}

CharacterSet CharacterSet::cyclic(std::int64_t order, const std::vector<std::int64_t>& freqs) {
  std::vector<Frequency> f;
  f.reserve(freqs.size());
  for (auto k : freqs) f.push_back({k});
  return CharacterSet(CharacterGroup::cyclic(order), std::move(f));
}

CharacterSet CharacterSet::lacunary(std::size_t m, std::int64_t order) {
  if (m >= 63) throw DomainError("lacunary set too long for 64-bit frequencies");
  std::vector<std::int64_t> f;
  for (std::size_t k = 0; k < m; ++k) {
    const std::int64_t freq = std::int64_t{1} << k;
    if (freq >= order) throw DomainError("lacunary frequency 2^" + std::to_string(k) + " aliases in Z_" + std::to_string(order));
    f.push_back(freq);
  }
  return cyclic(order, f);
}

CharacterSet CharacterSet::full(std::int64_t order) {
  std::vector<std::int64_t> f(static_cast<std::size_t>(order));
  for (std::int64_t k = 0; k < order; ++k) f[static_cast<std::size_t>(k)] = k;
  return cyclic(order, f);
}

CharacterSet CharacterSet::prefix(std::size_t m) const {
  if (m > freqs_.size()) throw DomainError("prefix longer than the character set");
  return CharacterSet(group_, std::vector<Frequency>(freqs_.begin(), freqs_.begin() + static_cast<std::ptrdiff_t>(m)));
}

std::string CharacterSet::to_string() const {
  std::ostringstream os;
  os << "Z";
  for (std::size_t j = 0; j < group_.factors().size(); ++j) os << (j ? "x" : "_") << group_.factors()[j];
  os << ":{";
  for (std::size_t i = 0; i < freqs_.size(); ++i) {
    if (i) os << ",";
    if (freqs_[i].size() == 1) {
      os << freqs_[i][0];
    } else {
      os << "(";
      for (std::size_t j = 0; j < freqs_[i].size(); ++j) os << (j ? "," : "") << freqs_[i][j];
      os << ")";
    }
  }
  os << "}";
  return os.str();
}

Eigen::VectorXcd SpanElement::values() const {
  if (static_cast<std::size_t>(coeffs.size()) != cset.size()) throw DomainError("coefficient count mismatch");
  return cset.table().transpose() * coeffs;
}

double lp_norm_of_span(const CharacterSet& cset, const Eigen::VectorXcd& coeffs, Exponent p) {
  if (static_cast<std::size_t>(coeffs.size()) != cset.size()) throw DomainError("coefficient count mismatch");
  const Eigen::VectorXd mag = (cset.table().transpose() * coeffs).cwiseAbs();
  // Normalized counting measure: scale the counting l_p norm by |G|^{-1/p}.
  const double scale = std::pow(static_cast<double>(cset.group().order()), -p.recip());
  return scale * lp_norm(mag, p);
}

double lp_norm_of_span(const SpanElement& f, Exponent p) { return lp_norm_of_span(f.cset, f.coeffs, p); }

// ---------------------------------------------------------------------------

OrthonormalSystem OrthonormalSystem::gaussian(SamplingConfig sampling) { return OrthonormalSystem(sampling); }

OrthonormalSystem OrthonormalSystem::characters(CharacterSet cset, unsigned threads) {
  return OrthonormalSystem(Characters{std::move(cset), threads});
}

const SamplingConfig& OrthonormalSystem::sampling() const {
  if (!is_gaussian()) throw DomainError("character systems have no sampling configuration");
  return std::get<SamplingConfig>(kind_);
}

const CharacterSet& OrthonormalSystem::character_set() const {
  if (is_gaussian()) throw DomainError("the Gaussian system has no character set");
  return std::get<Characters>(kind_).cset;
}

unsigned OrthonormalSystem::threads() const noexcept {
  return is_gaussian() ? std::get<SamplingConfig>(kind_).threads : std::get<Characters>(kind_).threads;
}

std::size_t OrthonormalSystem::capacity() const noexcept {
  return is_gaussian() ? static_cast<std::size_t>(-1) : std::get<Characters>(kind_).cset.size();
}

std::string OrthonormalSystem::to_string() const {
  if (is_gaussian()) {
    const auto& s = sampling();
    return std::string("gaussian(") + (s.gaussian == GaussianKind::Real ? "real" : "complex") + ")";
  }
  return "characters(" + character_set().to_string() + ")";
}

namespace {

NormEstimate character_second_moment(const CharacterSet& cset, unsigned threads, const VectorSystem& images) {
  const auto& codomain = images.space();
  const auto m = static_cast<Eigen::Index>(images.size());
  const auto order = cset.group().order();
  const std::size_t chunks = (order + kPointChunk - 1) / kPointChunk;
  const Eigen::MatrixXcd& table = cset.table();
  const SparseColumns& y = images.columns();
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kPointChunk;
    const std::size_t end = std::min(order, begin + kPointChunk);
    double acc = 0.0;
    Eigen::VectorXcd z;
    for (std::size_t x = begin; x < end; ++x) {
      z = y * table.col(static_cast<Eigen::Index>(x)).head(m);
      const double nz = element_norm(z, codomain);
      acc += nz * nz;
    }
    partial[c] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return NormEstimate::exact(std::sqrt(total / static_cast<double>(order)), "group average");
}

bool purely_real(const SparseColumns& y) {
  for (Eigen::Index k = 0; k < y.outerSize(); ++k)
    for (SparseColumns::InnerIterator it(y, k); it; ++it)
      if (it.value().imag() != 0.0) return false;
  return true;
}

NormEstimate gaussian_second_moment(const SamplingConfig& cfg, const VectorSystem& images) {
  const auto& codomain = images.space();
  const SparseColumns& y = images.columns();
  if (codomain.is_hilbert() && !cfg.force_sampling) {
    // E||sum g_i y_i||^2 = sum ||y_i||^2 for independent unit-variance g_i.
    return NormEstimate::exact(y.norm(), "gaussian second moment (Hilbert closed form)");
  }
  MomentSummary summary;
  if (cfg.gaussian == GaussianKind::Real && purely_real(y)) {
    const Eigen::SparseMatrix<double> yr = y.real();
    summary = gaussian_mean(cfg, images.size(), [&](const Eigen::VectorXcd& g) {
      const Eigen::VectorXd z = yr * g.real();
      const double nz = element_norm(z, codomain, SvdRoute::Gram);
      return nz * nz;
    });
  } else {
    summary = gaussian_mean(cfg, images.size(), [&](const Eigen::VectorXcd& g) {
      const Eigen::VectorXcd z = y * g;
      const double nz = element_norm(z, codomain, SvdRoute::Gram);
      return nz * nz;
    });
  }
  const auto [value, se] = root_of_mean(summary);
  return NormEstimate::sampled(value, se, "gaussian second moment (Monte Carlo)");
}

}  // namespace

NormEstimate second_moment(const OrthonormalSystem& system, const VectorSystem& images) {
  if (images.size() > system.capacity()) {
    throw DomainError("family of " + std::to_string(images.size()) + " elements exceeds the " +
                      std::to_string(system.capacity()) + " characters available");
  }
  if (images.size() == 0) return NormEstimate::exact(0.0, "empty family");
  if (system.is_gaussian()) return gaussian_second_moment(system.sampling(), images);
  return character_second_moment(system.character_set(), system.threads(), images);
}

// ---------------------------------------------------------------------------

namespace {

/// L_q norm (normalized measure) of y and, optionally, its real gradient with
/// respect to the coefficients through X^H = conj(table) / |G|.
double lq_with_gradient(const Eigen::MatrixXcd& table, const Eigen::VectorXcd& y, double q,
                        Eigen::VectorXcd* grad) {
  const double g = static_cast<double>(y.size());
  const Eigen::VectorXd mag = y.cwiseAbs();
  const double top = mag.maxCoeff();
  if (top == 0.0) {
    if (grad) grad->setZero(table.rows());
    return 0.0;
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mag.size(); ++i) acc += std::pow(mag(i) / top, q);
  const double norm = top * std::pow(acc / g, 1.0 / q);
  if (grad) {
    Eigen::VectorXcd w(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      w(i) = mag(i) > 0.0 ? (y(i) / mag(i)) * std::pow(mag(i) / top, q - 1.0) : cdouble(0.0);
    }
    *grad = (table.conjugate() * w) * (std::pow(top / norm, q - 1.0) / g);
  }
  return norm;
}

}  // namespace

NormEstimate kp_constant_lower(const CharacterSet& cset, Exponent p, const AscentConfig& cfg) {
  if (cset.size() == 0) throw DomainError("K_p of an empty character set is undefined");
  if (p.recip() > 0.5) throw DomainError("K_p is defined for p >= 2");
  if (p == Exponent::two()) return NormEstimate::exact(1.0, "K_2 = 1 (Parseval)");
  const Eigen::MatrixXcd& table = cset.table();
  const double q = p.is_infinite() ? kInfinitySurrogate : p.value();

  SmoothObjective smooth = [&](const Eigen::VectorXcd& a, Eigen::VectorXcd* grad) {
    return lq_with_gradient(table, table.transpose() * a, q, grad);
  };
  ExactObjective exact;
  if (p.is_infinite()) {
    exact = [&](const Eigen::VectorXcd& a) { return (table.transpose() * a).cwiseAbs().maxCoeff(); };
  }
  const AscentResult best = sphere_ascent(cset.size(), smooth, exact, cfg);
  // Re-evaluate the exact ratio at the reported point; ||f||_2 = |alpha|_2 = 1.
  const double value = lp_norm_of_span(cset, best.argmax, p) / best.argmax.norm();
  return NormEstimate::lower(value, "K_p ascent").with_witness({cset.to_string(), best.argmax});
}

NormEstimate sidon_constant_lower(const CharacterSet& cset, const AscentConfig& cfg) {
  if (cset.size() == 0) throw DomainError("the Sidon constant of an empty set is undefined");
  const Eigen::MatrixXcd& table = cset.table();
  const double q = kInfinitySurrogate;

  SmoothObjective smooth = [&](const Eigen::VectorXcd& a, Eigen::VectorXcd* grad) {
    const double l1 = a.cwiseAbs().sum();
    Eigen::VectorXcd dgrad;
    const double d = lq_with_gradient(table, table.transpose() * a, q, grad ? &dgrad : nullptr);
    if (d == 0.0) return 0.0;
    if (grad) {
      Eigen::VectorXcd ngrad(a.size());
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double r = std::abs(a(i));
        ngrad(i) = r > 0.0 ? a(i) / r : cdouble(0.0);
      }
      *grad = ngrad / d - (l1 / (d * d)) * dgrad;
    }
    return l1 / d;
  };
  ExactObjective exact = [&](const Eigen::VectorXcd& a) {
    const double sup = (table.transpose() * a).cwiseAbs().maxCoeff();
    return sup > 0.0 ? a.cwiseAbs().sum() / sup : 0.0;
  };
  const AscentResult best = sphere_ascent(cset.size(), smooth, exact, cfg);
  return NormEstimate::lower(exact(best.argmax), "Sidon ascent").with_witness({cset.to_string(), best.argmax});
}

std::vector<KpProfileRow> kp_growth_profile(const CharacterSet& cset, const std::vector<Exponent>& p_grid,
                                            const AscentConfig& cfg) {
  std::vector<KpProfileRow> rows;
  rows.reserve(p_grid.size());
  for (const auto& p : p_grid) {
    KpProfileRow row{p, kp_constant_lower(cset, p, cfg), 0.0};
    row.ratio_to_sqrt_p = p.is_infinite() ? 0.0 : row.estimate.value / std::sqrt(p.value());
    rows.push_back(std::move(row));
  }
  return rows;
}

VectorSystem subgroup_kernel_family(const SpaceDescriptor& space, const CharacterSet& cset) {
  if (space.kind != SpaceKind::Sequence) throw DomainError("kernel family is defined on sequence spaces");
  if (cset.group().factors().size() != 1) throw DomainError("kernel family needs a cyclic group");
  const auto order = cset.group().order();
  const std::size_t n = space.dim;
  if (n > order) throw DomainError("kernel family needs n <= |G|");
  const std::size_t step = order / n;
  const Eigen::MatrixXcd& table = cset.table();
  SparseColumns cols(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cset.size()));
  std::vector<Eigen::Triplet<cdouble>> triplets;
  for (std::size_t i = 0; i < cset.size(); ++i)
    for (std::size_t j = 0; j < n; ++j)
      triplets.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i),
                            std::conj(table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j * step))));
  cols.setFromTriplets(triplets.begin(), triplets.end());
  return VectorSystem(space, std::move(cols), FamilyStructure::Generic, "subgroup kernel");
}

}  // namespace opideal
