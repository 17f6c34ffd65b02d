#include "distill/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "distill/errors.hpp"

namespace distill {

namespace {

constexpr std::size_t kMaxSweeps = 100;

void make_sign_canonical(Vector& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Removes the projections on `basis` (assumed orthonormal) and normalizes.
// Returns the norm before normalization.
double orthonormalize_against(Vector& v, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& b : basis) {
      const double p = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
    }
  }
  const double n = norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return n;
}

// Lowest-index unit vector with a usable residual against `basis`.
Vector completion_vector(std::size_t dim, const std::vector<Vector>& basis) {
  for (std::size_t axis = 0; axis < dim; ++axis) {
    Vector e(dim, 0.0);
    e[axis] = 1.0;
    if (orthonormalize_against(e, basis) > 0.5) return e;
  }
  throw DomainError("pca_fit: cannot complete an orthonormal basis");
}

}  // namespace

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n) throw DomainError("jacobi_eigen: matrix is not n x n");
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };

  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double x = at(r, c) * at(r, c);
        total += x;
        if (r != c) off += x;
      }
    }
    if (off == 0.0 || off <= 1e-28 * total) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.assign(n, Vector(n));
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = at(i, i);
    for (std::size_t k = 0; k < n; ++k) out.vectors[i][k] = v[k * n + i];
  }
  return out;
}

PcaModel pca_fit(std::span<const Vector> X, std::size_t k) {
  const std::size_t n = X.size();
  if (n < 2) throw DomainError("pca_fit: need at least 2 points");
  const std::size_t d = X[0].size();
  if (d == 0) throw DomainError("pca_fit: zero-dimensional data");
  for (const Vector& x : X) {
    check_same_dim(x, X[0], "pca_fit");
    if (!all_finite(x)) throw DomainError("pca_fit: non-finite input");
  }
  if (k < 1 || k > std::min(n - 1, d)) {
    throw DomainError("pca_fit: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(std::min(n - 1, d)) + "]");
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const Vector& x : X) {
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += x[j];
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  std::vector<Vector> centred(n, Vector(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) centred[i][j] = X[i][j] - model.mean[j];
  }
  const double denom = static_cast<double>(n - 1);
  const bool use_gram = d > n;
  const std::size_t m = use_gram ? n : d;

  std::vector<double> mat(m * m, 0.0);
  if (use_gram) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        const double s = dot(centred[a], centred[b]) / denom;
        mat[a * n + b] = s;
        mat[b * n + a] = s;
      }
    }
  } else {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += centred[i][a] * centred[i][b];
        s /= denom;
        mat[a * d + b] = s;
        mat[b * d + a] = s;
      }
    }
  }

  SymmetricEigen eig = jacobi_eigen(std::move(mat), m);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eig.values[a] > eig.values[b];
  });

  const double top = std::max(0.0, eig.values[order[0]]);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t idx = order[r];
    const double lambda = std::max(0.0, eig.values[idx]);
    Vector comp;
    if (!use_gram) {
      comp = eig.vectors[idx];
      orthonormalize_against(comp, model.components);
    } else if (lambda > 1e-12 * top && lambda > 0.0) {
      comp.assign(d, 0.0);
      const Vector& u = eig.vectors[idx];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) comp[j] += centred[i][j] * u[i];
      }
      if (orthonormalize_against(comp, model.components) <= 0.0) {
        comp = completion_vector(d, model.components);
      }
    } else {
      comp = completion_vector(d, model.components);
    }
    make_sign_canonical(comp);
    model.components.push_back(std::move(comp));
    model.eigenvalues.push_back(lambda);
  }
  return model;
}

std::vector<Vector> pca_transform(const PcaModel& model, std::span<const Vector> X) {
  std::vector<Vector> out;
  out.reserve(X.size());
  Vector centred(model.input_dim());
  for (const Vector& x : X) {
    check_same_dim(x, model.mean, "pca_transform");
    for (std::size_t j = 0; j < x.size(); ++j) centred[j] = x[j] - model.mean[j];
    Vector y(model.output_dim());
    for (std::size_t r = 0; r < y.size(); ++r) y[r] = dot(model.components[r], centred);
    out.push_back(std::move(y));
  }
  return out;
}

Vector pca_reconstruct(const PcaModel& model, VectorView y) {
  if (y.size() != model.output_dim()) throw DomainError("pca_reconstruct: dimension mismatch");
  Vector x = model.mean;
  for (std::size_t r = 0; r < y.size(); ++r) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += y[r] * model.components[r][j];
  }
  return x;
}

}  // namespace distill
