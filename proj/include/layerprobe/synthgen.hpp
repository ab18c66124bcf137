#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "layerprobe/tensor_store.hpp"

namespace layerprobe {

/// Layered, dual-labelled Gaussian clusters. Point (c, s, r) in layer l is
///   content_sep[l] * u_c + style_sep[l] * v_s + noise,
/// where u_c and v_s are seeded random directions scaled to a per-coordinate
/// RMS of 1 (norm sqrt(dims)), so separations are in units of the noise
/// standard deviation along a typical axis. Points are ordered with the
/// repetition index fastest, then style, then content.
struct SynthSpec {
  std::size_t layers = 13;
  std::size_t dims = 768;
  std::size_t n_content = 10;
  std::size_t n_style = 10;
  std::size_t reps = 10;
  std::vector<double> content_sep;
  std::vector<double> style_sep;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  std::size_t points() const { return n_content * n_style * reps; }
};

/// `count` values evenly spaced from `first` to `last` inclusive.
std::vector<double> linear_schedule(std::size_t count, double first, double last);

/// 13 layers x 1000 points x 768 dims; content separation rising 0 -> 4,
/// style separation 0.2, unit noise.
SynthSpec trend_fixture_spec(std::uint64_t seed = 42);

/// Throws SpecError on an invalid spec (schedule length != layers, fewer
/// than 2 classes per kind, reps < 1, negative separation, sigma <= 0).
void validate(const SynthSpec& spec);

/// Deterministic for a given spec. Labels carry kinds "content" (c0, c1, ...)
/// and "style" (s0, s1, ...).
std::pair<ActivationTensor, LabelTable> generate(const SynthSpec& spec);

}  // namespace layerprobe
