#pragma once

// Finite weighted measure spaces and the L^2(X) / L^2(X,H) geometry over them.
// A space is a list of labelled atoms with strictly positive masses; the
// counting measure (all weights one) gives the discrete setting.

#include <memory>
#include <string>
#include <vector>

#include "ckframe/linalg.hpp"

namespace ckframe {

class MeasureSpace {
 public:
  const std::vector<std::string>& labels() const { return labels_; }
  const RealVector& weights() const { return weights_; }
  Index size() const { return weights_.size(); }
  double total_mass() const { return weights_.sum(); }

  /// Structural identity: spaces with the same labels and weights are equal.
  friend bool operator==(const MeasureSpace& a, const MeasureSpace& b) {
    return a.labels_ == b.labels_ && a.weights_.size() == b.weights_.size() && a.weights_ == b.weights_;
  }

 private:
  MeasureSpace(std::vector<std::string> labels, RealVector weights)
      : labels_(std::move(labels)), weights_(std::move(weights)) {}

  friend std::shared_ptr<const MeasureSpace> make_measure_space(std::vector<std::string>, std::vector<double>);

  std::vector<std::string> labels_;
  RealVector weights_;
};

using SpaceRef = std::shared_ptr<const MeasureSpace>;

inline SpaceRef make_measure_space(std::vector<std::string> labels, std::vector<double> weights) {
  if (labels.empty() && weights.empty()) throw Error(ErrorCode::EmptySpace, "measure space needs at least one atom");
  if (labels.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(labels.size()) + " labels but " +
                                               std::to_string(weights.size()) + " weights");
  }
  RealVector w(static_cast<Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || !(weights[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveWeight, "weight[" + std::to_string(i) + "] = " + std::to_string(weights[i]));
    }
    w(static_cast<Index>(i)) = weights[i];
  }
  if (!std::isfinite(w.sum())) throw Error(ErrorCode::NonFinite, "total mass overflows");
  return SpaceRef(new MeasureSpace(std::move(labels), std::move(w)));
}

/// Counting measure on atoms labelled x0, x1, ...
inline SpaceRef counting_measure(Index n) {
  std::vector<std::string> labels;
  for (Index i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
  return make_measure_space(std::move(labels), std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

inline SpaceRef weighted_space(const std::vector<double>& weights) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < weights.size(); ++i) labels.push_back("x" + std::to_string(i));
  return make_measure_space(std::move(labels), weights);
}

inline bool same_space(const SpaceRef& a, const SpaceRef& b) { return a == b || (a && b && *a == *b); }

/// Element of L^2(X): one complex value per atom.
class ScalarField {
 public:
  ScalarField(SpaceRef space, Vector values) : space_(std::move(space)), values_(std::move(values)) {
    if (values_.size() != space_->size()) {
      throw Error(ErrorCode::LengthMismatch, "scalar field has " + std::to_string(values_.size()) +
                                                 " values for " + std::to_string(space_->size()) + " atoms");
    }
    if (!all_finite(values_)) throw Error(ErrorCode::NonFinite, "scalar field has non-finite entries");
  }

  static ScalarField zero(SpaceRef space) {
    const Index n = space->size();
    return ScalarField(std::move(space), Vector::Zero(n));
  }

  const SpaceRef& space() const { return space_; }
  const Vector& values() const { return values_; }

 private:
  SpaceRef space_;
  Vector values_;
};

/// A map f: X -> H with dim H = dim(), stored column-per-atom.
class SampleField {
 public:
  SampleField(SpaceRef space, OperatorMatrix samples) : space_(std::move(space)), samples_(std::move(samples)) {
    if (samples_.cols() != space_->size()) {
      throw Error(ErrorCode::LengthMismatch, "sample field has " + std::to_string(samples_.cols()) +
                                                 " samples for " + std::to_string(space_->size()) + " atoms");
    }
    if (samples_.rows() < 1) throw Error(ErrorCode::DimMismatch, "sample dimension must be positive");
    if (!all_finite(samples_)) throw Error(ErrorCode::NonFinite, "sample field has non-finite entries");
  }

  const SpaceRef& space() const { return space_; }
  Index dim() const { return samples_.rows(); }
  Index atoms() const { return samples_.cols(); }
  /// dim x atoms; column i is f(x_i).
  const OperatorMatrix& samples() const { return samples_; }
  auto sample(Index i) const { return samples_.col(i); }

 private:
  SpaceRef space_;
  OperatorMatrix samples_;
};

inline void require_same_space(const SpaceRef& a, const SpaceRef& b) {
  if (!same_space(a, b)) throw Error(ErrorCode::SpaceMismatch, "fields live on different measure spaces");
}

/// <phi, psi> = sum_i w_i phi_i conj(psi_i). Linear in the first argument.
inline Complex l2_inner(const ScalarField& phi, const ScalarField& psi) {
  require_same_space(phi.space(), psi.space());
  const RealVector& w = phi.space()->weights();
  Complex acc{0.0, 0.0};
  for (Index i = 0; i < w.size(); ++i) acc += w(i) * phi.values()(i) * std::conj(psi.values()(i));
  return acc;
}

inline double l2_norm(const ScalarField& phi) { return std::sqrt(std::max(0.0, l2_inner(phi, phi).real())); }

/// <f, g> in L^2(X,H) = sum_i w_i <f_i, g_i>_H.
inline Complex field_l2_inner(const SampleField& f, const SampleField& g) {
  require_same_space(f.space(), g.space());
  if (f.dim() != g.dim()) throw Error(ErrorCode::DimMismatch, "fields take values in different dimensions");
  const RealVector& w = f.space()->weights();
  Complex acc{0.0, 0.0};
  // <a, b>_H = b^* a
  for (Index i = 0; i < w.size(); ++i) acc += w(i) * g.sample(i).dot(f.sample(i));
  return acc;
}

}  // namespace ckframe
