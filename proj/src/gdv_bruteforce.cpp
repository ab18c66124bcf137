// Literal transcription of the GDV definition: z-score each dimension,
// halve, average the Euclidean distances within and between classes, and
// combine. No shortcuts, no shared helpers with gdv.cpp.

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "layerprobe/errors.hpp"
#include "layerprobe/gdv.hpp"

namespace layerprobe {

GdvBreakdown gdv_bruteforce(MatrixView x, std::span<const int> labels) {
  const std::size_t N = x.rows();
  const std::size_t D = x.cols();
  if (labels.size() != N) throw MismatchError("label count != point count");
  for (double v : x.data())
    if (!std::isfinite(v)) throw DataError("non-finite value");

  std::vector<int> ids;
  for (int l : labels) {
    bool seen = false;
    for (int id : ids) seen = seen || id == l;
    if (!seen) ids.push_back(l);
  }
  const std::size_t L = ids.size();
  if (L < 2) throw DegenerateLabelsError("fewer than 2 classes");

  // s[n][d] = 1/2 * (x[n][d] - mu[d]) / sigma[d]
  std::vector<std::vector<double>> s(N, std::vector<double>(D, 0.0));
  for (std::size_t d = 0; d < D; ++d) {
    bool constant = true;
    for (std::size_t n = 1; n < N; ++n) constant = constant && x(n, d) == x(0, d);
    if (constant) continue;
    double mu = 0.0;
    for (std::size_t n = 0; n < N; ++n) mu += x(n, d);
    mu /= static_cast<double>(N);
    double var = 0.0;
    for (std::size_t n = 0; n < N; ++n) var += (x(n, d) - mu) * (x(n, d) - mu);
    const double sigma = std::sqrt(var / static_cast<double>(N));
    for (std::size_t n = 0; n < N; ++n) s[n][d] = 0.5 * (x(n, d) - mu) / sigma;
  }

  auto dist = [&](std::size_t a, std::size_t b) {
    double sum = 0.0;
    for (std::size_t d = 0; d < D; ++d) sum += (s[a][d] - s[b][d]) * (s[a][d] - s[b][d]);
    return std::sqrt(sum);
  };

  std::vector<std::vector<std::size_t>> cls(L);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t k = 0; k < L; ++k)
      if (labels[n] == ids[k]) cls[k].push_back(n);
  for (std::size_t k = 0; k < L; ++k)
    if (cls[k].size() < 2)
      throw SingletonClassError(fmt::format("class {} has one point", ids[k]));

  GdvBreakdown out;
  out.class_ids = ids;
  out.dims = D;
  out.points = N;
  out.intra.assign(L, 0.0);
  out.inter = Matrix(L, L);

  for (std::size_t l = 0; l < L; ++l) {
    const double Nl = static_cast<double>(cls[l].size());
    out.class_sizes.push_back(cls[l].size());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cls[l].size(); ++i)
      for (std::size_t j = i + 1; j < cls[l].size(); ++j)
        sum += dist(cls[l][i], cls[l][j]);
    out.intra[l] = 2.0 / (Nl * (Nl - 1.0)) * sum;
  }
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t m = l + 1; m < L; ++m) {
      double sum = 0.0;
      for (std::size_t i : cls[l])
        for (std::size_t j : cls[m]) sum += dist(i, j);
      const double v = sum / (static_cast<double>(cls[l].size()) *
                              static_cast<double>(cls[m].size()));
      out.inter(l, m) = v;
      out.inter(m, l) = v;
    }
  }

  double intra_term = 0.0;
  for (std::size_t l = 0; l < L; ++l) intra_term += out.intra[l];
  intra_term /= static_cast<double>(L);
  double inter_term = 0.0;
  for (std::size_t l = 0; l + 1 < L; ++l)
    for (std::size_t m = l + 1; m < L; ++m) inter_term += out.inter(l, m);
  inter_term *= 2.0 / (static_cast<double>(L) * (static_cast<double>(L) - 1.0));
  out.gdv = (intra_term - inter_term) / std::sqrt(static_cast<double>(D));
  return out;
}

}  // namespace layerprobe
