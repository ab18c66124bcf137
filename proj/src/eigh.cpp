#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "layerprobe/dimred.hpp"
#include "layerprobe/errors.hpp"

namespace layerprobe {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kResidualTol = 1e-8;
constexpr double kTieTol = 1e-10;
constexpr int kMaxQlIterations = 64;

// Dense symmetric eigensolver state. The orthogonal factor is stored
// transposed (q[c * n + r] holds V(r, c)) so that every inner loop of the
// EISPACK tred2/tql2 pair walks memory contiguously.
struct TridiagonalQl {
  explicit TridiagonalQl(const Matrix& a)
      : n(a.rows()), q(n * n), d(n), e(n) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c <= r; ++c) v(r, c) = 0.5 * (a(r, c) + a(c, r));
  }

  double& v(std::size_t r, std::size_t c) { return q[c * n + r]; }
  double* col(std::size_t c) { return q.data() + c * n; }

  // Householder reduction to tridiagonal form; reads the lower triangle.
  void tridiagonalize() {
    for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
      double scale = 0.0;
      double h = 0.0;
      for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
      if (scale == 0.0) {
        e[i] = d[i - 1];
        for (std::size_t j = 0; j < i; ++j) {
          d[j] = v(i - 1, j);
          v(i, j) = 0.0;
          v(j, i) = 0.0;
        }
      } else {
        for (std::size_t k = 0; k < i; ++k) {
          d[k] /= scale;
          h += d[k] * d[k];
        }
        double f = d[i - 1];
        double g = std::sqrt(h);
        if (f > 0) g = -g;
        e[i] = scale * g;
        h -= f * g;
        d[i - 1] = f - g;
        std::fill(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(i), 0.0);

        for (std::size_t j = 0; j < i; ++j) {
          f = d[j];
          v(j, i) = f;
          const double* cj = col(j);
          g = e[j] + cj[j] * f;
          for (std::size_t k = j + 1; k < i; ++k) {
            g += cj[k] * d[k];
            e[k] += cj[k] * f;
          }
          e[j] = g;
        }
        f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          e[j] /= h;
          f += e[j] * d[j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
        for (std::size_t j = 0; j < i; ++j) {
          f = d[j];
          g = e[j];
          double* cj = col(j);
          for (std::size_t k = j; k < i; ++k) cj[k] -= (f * e[k] + g * d[k]);
          d[j] = cj[i - 1];
          cj[i] = 0.0;
        }
      }
      d[i] = h;
    }

    // Accumulate the reflections into V.
    for (std::size_t i = 0; i + 1 < n; ++i) {
      v(n - 1, i) = v(i, i);
      v(i, i) = 1.0;
      const double h = d[i + 1];
      double* next = col(i + 1);
      if (h != 0.0) {
        for (std::size_t k = 0; k <= i; ++k) d[k] = next[k] / h;
        for (std::size_t j = 0; j <= i; ++j) {
          double* cj = col(j);
          double g = 0.0;
          for (std::size_t k = 0; k <= i; ++k) g += next[k] * cj[k];
          for (std::size_t k = 0; k <= i; ++k) cj[k] -= g * d[k];
        }
      }
      for (std::size_t k = 0; k <= i; ++k) next[k] = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = v(n - 1, j);
      v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
  }

  // Implicit QL on the tridiagonal (d, e), rotating the columns of V.
  void diagonalize() {
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
      tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
      std::size_t m = l;
      while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

      if (m > l) {
        int iter = 0;
        do {
          if (++iter > kMaxQlIterations)
            throw ConvergenceError(fmt::format(
                "QL iteration did not converge for eigenvalue {} after {} "
                "iterations (off-diagonal residual {:.3e})",
                l, kMaxQlIterations, std::abs(e[l])));
          double g = d[l];
          double p = (d[l + 1] - g) / (2.0 * e[l]);
          double r = std::hypot(p, 1.0);
          if (p < 0) r = -r;
          d[l] = e[l] / (p + r);
          d[l + 1] = e[l] * (p + r);
          const double dl1 = d[l + 1];
          double h = g - d[l];
          for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
          f += h;

          p = d[m];
          double c = 1.0, c2 = 1.0, c3 = 1.0;
          const double el1 = e[l + 1];
          double s = 0.0, s2 = 0.0;
          for (std::size_t ii = m; ii-- > l;) {
            c3 = c2;
            c2 = c;
            s2 = s;
            g = c * e[ii];
            h = c * p;
            r = std::hypot(p, e[ii]);
            e[ii + 1] = s * r;
            s = e[ii] / r;
            c = p / r;
            p = c * d[ii] - s * g;
            d[ii + 1] = h + s * (c * g + s * d[ii]);
            double* vi = col(ii);
            double* vn = col(ii + 1);
            for (std::size_t k = 0; k < n; ++k) {
              const double t = vn[k];
              vn[k] = s * vi[k] + c * t;
              vi[k] = c * vi[k] - s * t;
            }
          }
          p = -s * s2 * c3 * el1 * e[l] / dl1;
          e[l] = s * p;
          d[l] = c * p;
        } while (std::abs(e[l]) > eps * tst1);
      }
      d[l] += f;
      e[l] = 0.0;
    }
  }

  std::size_t n;
  std::vector<double> q;
  std::vector<double> d;
  std::vector<double> e;
};

// Index of the largest-magnitude component; near-equal magnitudes resolve
// to the lowest index.
std::size_t pivot_index(const std::vector<double>& vec) {
  double peak = 0.0;
  for (double x : vec) peak = std::max(peak, std::abs(x));
  const double cutoff = peak * (1.0 - 1e-12);
  for (std::size_t i = 0; i < vec.size(); ++i)
    if (std::abs(vec[i]) >= cutoff) return i;
  return 0;
}

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition eigh_topk(const Matrix& a, std::size_t k) {
  const std::size_t n = a.rows();
  if (a.cols() != n)
    throw ContractError(fmt::format("matrix is {}x{}, not square", a.rows(), a.cols()));
  if (k < 1 || k > n)
    throw ContractError(fmt::format("k = {} outside [1, {}]", k, n));
  for (double x : a.data())
    if (!std::isfinite(x)) throw DataError("matrix has non-finite entries");

  EigenDecomposition out;
  out.frobenius_norm = frobenius(a);
  double asym = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c)
      asym = std::max(asym, std::abs(a(r, c) - a(c, r)));
  if (asym > kSymmetryTol * out.frobenius_norm)
    throw ContractError(fmt::format(
        "matrix is not symmetric (max |A_ij - A_ji| = {:.3e})", asym));

  TridiagonalQl solver(a);
  if (n > 1) {
    solver.tridiagonalize();
    solver.diagonalize();
  } else {
    solver.d[0] = a(0, 0);
    solver.q[0] = 1.0;
  }

  std::vector<EigenPair> all(n);
  for (std::size_t j = 0; j < n; ++j) {
    all[j].value = solver.d[j];
    all[j].vector.assign(solver.col(j), solver.col(j) + n);
  }
  std::vector<std::size_t> pivots(n);
  for (std::size_t j = 0; j < n; ++j) {
    pivots[j] = pivot_index(all[j].vector);
    if (all[j].vector[pivots[j]] < 0)
      for (double& x : all[j].vector) x = -x;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return all[x].value > all[y].value;
  });

  // Re-order runs of (numerically) tied eigenvalues by pivot index.
  double scale = 0.0;
  for (const auto& p : all) scale = std::max(scale, std::abs(p.value));
  const double tie = kTieTol * std::max(scale, std::numeric_limits<double>::min());
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin + 1;
    while (end < n && all[order[end - 1]].value - all[order[end]].value <= tie) ++end;
    if (end - begin > 1) {
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                       order.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](std::size_t x, std::size_t y) { return pivots[x] < pivots[y]; });
      if (begin < k)
        out.warnings.push_back(fmt::format(
            "eigenvalues {}..{} are tied (gap < {:g} relative); the eigenbasis "
            "of that subspace is not unique",
            begin, end - 1, kTieTol));
    }
    begin = end;
  }

  for (std::size_t j = 0; j < k; ++j) out.pairs.push_back(std::move(all[order[j]]));

  for (const auto& p : out.pairs) {
    double r2 = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double av = 0.0;
      for (std::size_t c = 0; c < n; ++c) av += a(r, c) * p.vector[c];
      const double t = av - p.value * p.vector[r];
      r2 += t * t;
    }
    out.max_residual = std::max(out.max_residual, std::sqrt(r2));
  }
  if (out.max_residual > kResidualTol * out.frobenius_norm)
    throw ConvergenceError(fmt::format(
        "eigenpair residual {:.3e} exceeds {:g} * ||A||_F = {:.3e}",
        out.max_residual, kResidualTol, kResidualTol * out.frobenius_norm));
  return out;
}

}  // namespace layerprobe
