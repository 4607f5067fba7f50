#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace pathlift {

/// Shared sample of the base measure nu. Ensembles over the same base hold a
/// pointer to one LabelSet, and compatibility is checked by fingerprint.
class LabelSet {
public:
  LabelSet(std::size_t dim, std::vector<double> labels);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return labels_.size() / dim_; }
  std::span<const double> values() const noexcept { return labels_; }
  std::span<const double> label(std::size_t i) const noexcept { return {labels_.data() + i * dim_, dim_}; }
  /// Order-sensitive FNV-1a hash over the raw label bytes.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

private:
  std::size_t dim_;
  std::vector<double> labels_;
  std::uint64_t fingerprint_;
};

/// Particles T(y_i) indexed by the labels y_i of a shared base sample.
class ParticleEnsemble {
public:
  /// Throws InvalidInput if positions do not match the label count and dim.
  ParticleEnsemble(std::shared_ptr<const LabelSet> labels, std::vector<double> positions);

  std::size_t dim() const noexcept { return labels_->dim(); }
  std::size_t size() const noexcept { return labels_->size(); }
  const LabelSet& labels() const noexcept { return *labels_; }
  const std::shared_ptr<const LabelSet>& label_ptr() const noexcept { return labels_; }
  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const double> position(std::size_t i) const noexcept {
    return {positions_.data() + i * dim(), dim()};
  }

  bool shares_labels_with(const ParticleEnsemble& other) const noexcept;

private:
  std::shared_ptr<const LabelSet> labels_;
  std::vector<double> positions_;
};

/// ((1/N) sum_i |a_i - b_i|^p)^{1/p}. Throws InvalidInput on label mismatch
/// or p < 1.
double w_p_nu(const ParticleEnsemble& a, const ParticleEnsemble& b, double p);
double w_p_nu_pp(const ParticleEnsemble& a, const ParticleEnsemble& b, double p);

/// Positions (1 - t) a_i + t b_i. Throws InvalidInput unless t in [0, 1] and
/// the labels agree.
ParticleEnsemble generalized_geodesic(const ParticleEnsemble& a, const ParticleEnsemble& b, double t);

}  // namespace pathlift
