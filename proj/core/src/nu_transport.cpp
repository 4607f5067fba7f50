#include "pathlift/nu_transport.hpp"

#include <cmath>
#include <cstring>

#include "pathlift/error.hpp"
#include "pathlift/power.hpp"

namespace pathlift {

namespace {

std::uint64_t fnv1a(std::span<const double> values, std::size_t dim) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const unsigned char* bytes, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t d = dim;
  mix(reinterpret_cast<const unsigned char*>(&d), sizeof d);
  for (double v : values) {
    unsigned char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof v);
    mix(buf, sizeof buf);
  }
  return h;
}

void require_same_labels(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (!a.shares_labels_with(b)) throw InvalidInput("ensembles do not share a label set");
}

}  // namespace

LabelSet::LabelSet(std::size_t dim, std::vector<double> labels) : dim_(dim), labels_(std::move(labels)) {
  if (dim_ == 0) throw InvalidInput("label dimension must be positive");
  if (labels_.empty() || labels_.size() % dim_ != 0) throw InvalidInput("label array does not match dimension");
  for (double v : labels_)
    if (!std::isfinite(v)) throw InvalidInput("labels must be finite");
  fingerprint_ = fnv1a(labels_, dim_);
}

ParticleEnsemble::ParticleEnsemble(std::shared_ptr<const LabelSet> labels, std::vector<double> positions)
    : labels_(std::move(labels)), positions_(std::move(positions)) {
  if (!labels_) throw InvalidInput("ensemble needs a label set");
  if (positions_.size() != labels_->values().size())
    throw InvalidInput("ensemble positions do not match the label count and dimension");
  for (double v : positions_)
    if (!std::isfinite(v)) throw InvalidInput("positions must be finite");
}

bool ParticleEnsemble::shares_labels_with(const ParticleEnsemble& other) const noexcept {
  if (labels_ == other.labels_) return true;
  return labels_->dim() == other.labels_->dim() && labels_->size() == other.labels_->size() &&
         labels_->fingerprint() == other.labels_->fingerprint();
}

double w_p_nu_pp(const ParticleEnsemble& a, const ParticleEnsemble& b, double p) {
  require_same_labels(a, b);
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("w_p_nu needs finite p >= 1");
  const std::size_t n = a.size();
  const std::size_t d = a.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = a.position(i);
    const auto y = b.position(i);
    double d2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = x[c] - y[c];
      d2 += diff * diff;
    }
    s += pow_half_p(d2, p);
  }
  return s / static_cast<double>(n);
}

double w_p_nu(const ParticleEnsemble& a, const ParticleEnsemble& b, double p) {
  return std::pow(w_p_nu_pp(a, b, p), 1.0 / p);
}

ParticleEnsemble generalized_geodesic(const ParticleEnsemble& a, const ParticleEnsemble& b, double t) {
  require_same_labels(a, b);
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("geodesic time must lie in [0, 1]");
  const auto pa = a.positions();
  const auto pb = b.positions();
  std::vector<double> out(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) out[i] = (1.0 - t) * pa[i] + t * pb[i];
  return ParticleEnsemble(a.label_ptr(), std::move(out));
}

}  // namespace pathlift
