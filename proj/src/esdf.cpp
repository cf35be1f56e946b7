#include "ampcc/esdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ampcc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher 1D squared distance transform.
// f is the input (squared distances, kInf for empty), d the output.
void dt_1d(const std::vector<double>& f, std::vector<double>& d, int n,
           std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[0]] == kInf) {
      v[0] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    if (f[v[0]] == kInf) {
      d[q] = kInf;
      continue;
    }
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Exact squared distance (in cell units) from every cell to the nearest
// seed cell. Cells with seed=true get 0.
std::vector<double> squared_distance_transform(const Vec3i& dims,
                                               const std::vector<bool>& seed) {
  const int nx = dims.x(), ny = dims.y(), nz = dims.z();
  const std::size_t total = static_cast<std::size_t>(nx) * ny * nz;
  std::vector<double> g(total);
  for (std::size_t i = 0; i < total; ++i) g[i] = seed[i] ? 0.0 : kInf;

  const int nmax = std::max({nx, ny, nz});
  std::vector<double> f(nmax), d(nmax), z(nmax + 1);
  std::vector<int> v(nmax);
  auto idx = [&](int x, int y, int zc) {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(ny) * static_cast<std::size_t>(zc));
  };

  // x pass
  for (int zc = 0; zc < nz; ++zc)
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) f[x] = g[idx(x, y, zc)];
      dt_1d(f, d, nx, v, z);
      for (int x = 0; x < nx; ++x) g[idx(x, y, zc)] = d[x];
    }
  // y pass
  for (int zc = 0; zc < nz; ++zc)
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) f[y] = g[idx(x, y, zc)];
      dt_1d(f, d, ny, v, z);
      for (int y = 0; y < ny; ++y) g[idx(x, y, zc)] = d[y];
    }
  // z pass
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      for (int zc = 0; zc < nz; ++zc) f[zc] = g[idx(x, y, zc)];
      dt_1d(f, d, nz, v, z);
      for (int zc = 0; zc < nz; ++zc) g[idx(x, y, zc)] = d[zc];
    }
  return g;
}

// Catmull-Rom weights and their first/second parameter derivatives.
inline void cr_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t + 2.0 * t2 - t3);
  w[1] = 1.0 - 2.5 * t2 + 1.5 * t3;
  w[2] = 0.5 * (t + 4.0 * t2 - 3.0 * t3);
  w[3] = 0.5 * (-t2 + t3);
}

inline void cr_dweights(double t, double w[4]) {
  const double t2 = t * t;
  w[0] = 0.5 * (-1.0 + 4.0 * t - 3.0 * t2);
  w[1] = -5.0 * t + 4.5 * t2;
  w[2] = 0.5 * (1.0 + 8.0 * t - 9.0 * t2);
  w[3] = -t + 1.5 * t2;
}

inline void cr_ddweights(double t, double w[4]) {
  w[0] = 2.0 - 3.0 * t;
  w[1] = -5.0 + 9.0 * t;
  w[2] = 4.0 - 9.0 * t;
  w[3] = -1.0 + 3.0 * t;
}

}  // namespace

EsdfField::EsdfField(const Vec3& origin, double resolution, const Vec3i& dims,
                     std::vector<double> distances)
    : origin_(origin),
      resolution_(resolution),
      dims_(dims),
      dist_(std::move(distances)) {
  if (!(resolution > 0.0) || dims.minCoeff() < 1) {
    throw ContractError("EsdfField: invalid geometry");
  }
  const std::size_t expect = static_cast<std::size_t>(dims.x()) * dims.y() *
                             static_cast<std::size_t>(dims.z());
  if (dist_.size() != expect) {
    throw ContractError("EsdfField: distance buffer size mismatch");
  }
}

EsdfField EsdfField::build(const VoxelGrid& grid) {
  const Vec3i dims = grid.dims();
  const double res = grid.resolution();
  const std::size_t total = grid.cell_count();
  const double sentinel = 10.0 * res * dims.cast<double>().norm();

  std::vector<double> dist(total);
  const std::size_t n_occ = grid.occupied_count();

  if (n_occ == 0) {
    std::fill(dist.begin(), dist.end(), sentinel);
    return EsdfField(grid.origin(), res, dims, std::move(dist));
  }

  std::vector<bool> occ(total), fre(total);
  for (std::size_t i = 0; i < total; ++i) {
    const bool o = grid.occupancy()[i] != 0;
    occ[i] = o;
    fre[i] = !o;
  }

  const std::vector<double> sq_to_occ = squared_distance_transform(dims, occ);
  for (std::size_t i = 0; i < total; ++i) {
    if (!occ[i]) dist[i] = res * std::sqrt(sq_to_occ[i]);
  }

  if (n_occ == total) {
    std::fill(dist.begin(), dist.end(), -sentinel);
  } else {
    // Interior cells: shifted negative distance to the free set, so an
    // occupied cell adjacent to free space reads 0.
    const std::vector<double> sq_to_free =
        squared_distance_transform(dims, fre);
    for (std::size_t i = 0; i < total; ++i) {
      if (occ[i]) dist[i] = -(res * std::sqrt(sq_to_free[i]) - res);
    }
  }
  return EsdfField(grid.origin(), res, dims, std::move(dist));
}

void EsdfField::query_bounds(Vec3& lo, Vec3& hi) const {
  constexpr double kEdge = 1e-9;
  for (int a = 0; a < 3; ++a) {
    const double extent = resolution_ * dims_[a];
    if (dims_[a] >= 4) {
      lo[a] = origin_[a] + 1.5 * resolution_;
      hi[a] = origin_[a] + extent - 1.5 * resolution_ - kEdge;
    } else {
      lo[a] = origin_[a];
      hi[a] = origin_[a] + extent - kEdge;
    }
  }
}

Vec3 EsdfField::clamp_to_query_bounds(const Vec3& p,
                                      bool clamped_axis[3]) const {
  Vec3 lo, hi;
  query_bounds(lo, hi);
  Vec3 q = p;
  for (int a = 0; a < 3; ++a) {
    clamped_axis[a] = false;
    if (q[a] < lo[a]) {
      q[a] = lo[a];
      clamped_axis[a] = true;
    } else if (q[a] > hi[a]) {
      q[a] = hi[a];
      clamped_axis[a] = true;
    }
  }
  return q;
}

void EsdfField::gather_stencil(const Vec3& p, int base[3], double frac[3],
                               double values[4][4][4]) const {
  Vec3 lo, hi;
  query_bounds(lo, hi);
  for (int a = 0; a < 3; ++a) {
    if (p[a] < lo[a] || p[a] > hi[a]) {
      throw BoundsError(a, p[a], lo[a], hi[a]);
    }
    const double u = (p[a] - origin_[a]) / resolution_ - 0.5;
    double fb = std::floor(u);
    base[a] = static_cast<int>(fb);
    frac[a] = u - fb;
    if (dims_[a] >= 4) {
      // Keep the 4-node stencil inside the grid at the upper margin edge.
      if (base[a] > dims_[a] - 3) {
        base[a] = dims_[a] - 3;
        frac[a] = u - base[a];
      }
      if (base[a] < 1) {
        base[a] = 1;
        frac[a] = u - base[a];
      }
    }
  }
  for (int dz = 0; dz < 4; ++dz) {
    const int z = std::clamp(base[2] + dz - 1, 0, dims_.z() - 1);
    for (int dy = 0; dy < 4; ++dy) {
      const int y = std::clamp(base[1] + dy - 1, 0, dims_.y() - 1);
      for (int dx = 0; dx < 4; ++dx) {
        const int x = std::clamp(base[0] + dx - 1, 0, dims_.x() - 1);
        values[dz][dy][dx] = dist_[linear_index(Vec3i(x, y, z))];
      }
    }
  }
}

EsdfQuery EsdfField::query(const Vec3& p) const {
  const EsdfQueryFull full = query_full(p);
  EsdfQuery q;
  q.value = full.value;
  q.gradient = full.gradient;
  q.second_derivative = full.hessian.diagonal();
  return q;
}

EsdfQueryFull EsdfField::query_full(const Vec3& p) const {
  int base[3];
  double frac[3];
  double f[4][4][4];
  gather_stencil(p, base, frac, f);

  double w[3][4], dw[3][4], ddw[3][4];
  for (int a = 0; a < 3; ++a) {
    cr_weights(frac[a], w[a]);
    cr_dweights(frac[a], dw[a]);
    cr_ddweights(frac[a], ddw[a]);
  }

  // Tensor-product accumulation of value, the three first derivatives,
  // and all six unique second derivatives in one sweep.
  double acc[10] = {0};
  for (int kz = 0; kz < 4; ++kz) {
    for (int ky = 0; ky < 4; ++ky) {
      double sx = 0, sdx = 0, sddx = 0;
      for (int kx = 0; kx < 4; ++kx) {
        const double v = f[kz][ky][kx];
        sx += w[0][kx] * v;
        sdx += dw[0][kx] * v;
        sddx += ddw[0][kx] * v;
      }
      const double wy = w[1][ky], dwy = dw[1][ky], ddwy = ddw[1][ky];
      const double wz = w[2][kz], dwz = dw[2][kz], ddwz = ddw[2][kz];
      acc[0] += wy * wz * sx;      // c
      acc[1] += wy * wz * sdx;     // d/dx
      acc[2] += dwy * wz * sx;     // d/dy
      acc[3] += wy * dwz * sx;     // d/dz
      acc[4] += wy * wz * sddx;    // d2/dx2
      acc[5] += ddwy * wz * sx;    // d2/dy2
      acc[6] += wy * ddwz * sx;    // d2/dz2
      acc[7] += dwy * wz * sdx;    // d2/dxdy
      acc[8] += wy * dwz * sdx;    // d2/dxdz
      acc[9] += dwy * dwz * sx;    // d2/dydz
    }
  }

  const double inv_r = 1.0 / resolution_;
  const double inv_r2 = inv_r * inv_r;
  EsdfQueryFull out;
  out.value = acc[0];
  out.gradient = Vec3(acc[1], acc[2], acc[3]) * inv_r;
  out.hessian(0, 0) = acc[4] * inv_r2;
  out.hessian(1, 1) = acc[5] * inv_r2;
  out.hessian(2, 2) = acc[6] * inv_r2;
  out.hessian(0, 1) = out.hessian(1, 0) = acc[7] * inv_r2;
  out.hessian(0, 2) = out.hessian(2, 0) = acc[8] * inv_r2;
  out.hessian(1, 2) = out.hessian(2, 1) = acc[9] * inv_r2;
  return out;
}

}  // namespace ampcc
