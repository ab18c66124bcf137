#include "layerprobe/synthgen.hpp"

#include <cmath>
#include <random>
#include <string>

#include <fmt/format.h>

#include "layerprobe/errors.hpp"

namespace layerprobe {

namespace {

std::vector<std::vector<double>> random_directions(std::size_t count,
                                                   std::size_t dims,
                                                   std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> dirs(count, std::vector<double>(dims));
  for (auto& dir : dirs) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : dir) {
        x = normal(rng);
        norm += x * x;
      }
    } while (norm == 0.0);
    const double scale = std::sqrt(static_cast<double>(dims) / norm);
    for (double& x : dir) x *= scale;
  }
  return dirs;
}

}  // namespace

std::vector<double> linear_schedule(std::size_t count, double first, double last) {
  std::vector<double> out(count, first);
  for (std::size_t i = 1; i < count; ++i)
    out[i] = first + (last - first) * static_cast<double>(i) /
                         static_cast<double>(count - 1);
  return out;
}

SynthSpec trend_fixture_spec(std::uint64_t seed) {
  SynthSpec spec;
  spec.content_sep = linear_schedule(spec.layers, 0.0, 4.0);
  spec.style_sep.assign(spec.layers, 0.2);
  spec.seed = seed;
  return spec;
}

void validate(const SynthSpec& spec) {
  if (spec.layers < 1) throw SpecError("layers must be >= 1");
  if (spec.dims < 1) throw SpecError("dims must be >= 1");
  if (spec.n_content < 2 || spec.n_style < 2)
    throw SpecError("content and style need at least 2 classes each");
  if (spec.reps < 1) throw SpecError("reps must be >= 1");
  if (spec.content_sep.size() != spec.layers)
    throw SpecError(fmt::format("content schedule has {} entries, layers = {}",
                                spec.content_sep.size(), spec.layers));
  if (spec.style_sep.size() != spec.layers)
    throw SpecError(fmt::format("style schedule has {} entries, layers = {}",
                                spec.style_sep.size(), spec.layers));
  for (std::size_t l = 0; l < spec.layers; ++l)
    if (!(spec.content_sep[l] >= 0.0) || !(spec.style_sep[l] >= 0.0) ||
        !std::isfinite(spec.content_sep[l]) || !std::isfinite(spec.style_sep[l]))
      throw SpecError(fmt::format("separations must be finite and >= 0 (layer {})", l));
  if (!(spec.noise_sigma > 0.0) || !std::isfinite(spec.noise_sigma))
    throw SpecError("noise_sigma must be > 0");
}

std::pair<ActivationTensor, LabelTable> generate(const SynthSpec& spec) {
  validate(spec);
  const std::size_t n = spec.points();
  const std::size_t dims = spec.dims;

  // Stream order: content directions, style directions, then noise for
  // every (layer, point, dim) in C order.
  std::mt19937_64 rng(spec.seed);
  const auto content_dirs = random_directions(spec.n_content, dims, rng);
  const auto style_dirs = random_directions(spec.n_style, dims, rng);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  std::vector<double> values(spec.layers * n * dims);
  std::size_t at = 0;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    for (std::size_t c = 0; c < spec.n_content; ++c) {
      for (std::size_t s = 0; s < spec.n_style; ++s) {
        for (std::size_t r = 0; r < spec.reps; ++r) {
          for (std::size_t d = 0; d < dims; ++d)
            values[at++] = spec.content_sep[l] * content_dirs[c][d] +
                           spec.style_sep[l] * style_dirs[s][d] + noise(rng);
        }
      }
    }
  }

  std::vector<std::string> content, style;
  content.reserve(n);
  style.reserve(n);
  for (std::size_t c = 0; c < spec.n_content; ++c)
    for (std::size_t s = 0; s < spec.n_style; ++s)
      for (std::size_t r = 0; r < spec.reps; ++r) {
        content.push_back("c" + std::to_string(c));
        style.push_back("s" + std::to_string(s));
      }
  LabelTable labels(n);
  labels.add_kind("content", content);
  labels.add_kind("style", style);
  return {ActivationTensor(spec.layers, n, dims, std::move(values)), std::move(labels)};
}

}  // namespace layerprobe
