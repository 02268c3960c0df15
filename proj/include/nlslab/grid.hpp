#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"

namespace nlslab {

using Vec = std::array<double, 2>;  // second slot unused when d = 1
using MultiIndex = std::array<int, 2>;

inline constexpr int kMaxDerivativeOrder = 6;

// Periodic box [-L0, L0) x [-L1, L1) with N0 x N1 equispaced nodes.
class Grid {
 public:
  Grid() = default;

  static Grid line(int n, double half_length) { return Grid(1, {n, 1}, {half_length, 0.0}); }
  static Grid plane(int n0, int n1, double l0, double l1) { return Grid(2, {n0, n1}, {l0, l1}); }
  static Grid make(int dim, std::array<int, 2> n, Vec half_length) {
    return dim == 1 ? line(n[0], half_length[0]) : plane(n[0], n[1], half_length[0], half_length[1]);
  }

  int dim() const { return dim_; }
  int n(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  double half_length(int axis) const { return half_length_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return 2.0 * half_length(axis) / n(axis); }
  std::size_t size() const { return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]); }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
  }

  double coordinate(int axis, int index) const { return -half_length(axis) + index * spacing(axis); }

  // Signed FFT mode number for storage slot j; the Nyquist slot maps to -N/2.
  int mode(int axis, int j) const {
    const int nn = n(axis);
    return j < nn / 2 ? j : j - nn;
  }
  bool is_nyquist(int axis, int j) const { return j == n(axis) / 2; }
  double wavenumber(int axis, int j) const { return mode(axis, j) * std::numbers::pi / half_length(axis); }
  double max_wavenumber(int axis) const { return (n(axis) / 2) * std::numbers::pi / half_length(axis); }

  // Row-major flattening, axis 0 slowest.
  std::size_t index(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) * static_cast<std::size_t>(n_[1]) + static_cast<std::size_t>(i1);
  }
  Vec point(std::size_t flat) const {
    const int i0 = static_cast<int>(flat / static_cast<std::size_t>(n_[1]));
    const int i1 = static_cast<int>(flat % static_cast<std::size_t>(n_[1]));
    return {coordinate(0, i0), dim_ == 2 ? coordinate(1, i1) : 0.0};
  }

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && half_length_ == other.half_length_;
  }

 private:
  Grid(int dim, std::array<int, 2> n, Vec half_length) : dim_(dim), n_(n), half_length_(half_length) {
    detail::require(dim == 1 || dim == 2, "grid: dimension must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
      const int nn = n[static_cast<std::size_t>(a)];
      detail::require(nn >= 16 && nn % 2 == 0, "grid: point count per axis must be even and >= 16, got " + std::to_string(nn));
      detail::require(half_length[static_cast<std::size_t>(a)] > 0.0, "grid: half-length must be positive");
    }
    if (dim == 1) {
      n_[1] = 1;
      half_length_[1] = 0.0;
    }
  }

  int dim_ = 1;
  std::array<int, 2> n_{16, 1};
  Vec half_length_{1.0, 0.0};
};

// Complex samples of a function on a grid at a given time.
struct Field {
  Grid grid;
  std::vector<cplx> values;
  double time = 0.0;
  std::string label;

  Field() = default;
  explicit Field(const Grid& g, double t = 0.0, std::string name = {})
      : grid(g), values(g.size(), cplx{}), time(t), label(std::move(name)) {}
  Field(const Grid& g, std::vector<cplx> v, double t = 0.0, std::string name = {})
      : grid(g), values(std::move(v)), time(t), label(std::move(name)) {
    detail::require(values.size() == grid.size(), "field: value count does not match grid");
  }

  template <class Fn>
  static Field sample(const Grid& g, Fn&& fn, double t = 0.0, std::string name = {}) {
    Field out(g, t, std::move(name));
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = cplx(fn(g.point(i)));
    return out;
  }

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  Field& operator*=(cplx s) {
    for (auto& v : values) v *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(cplx s, Field a) { return a *= s; }
  friend Field operator*(Field a, cplx s) { return a *= s; }

  void check_same(const Field& o) const {
    if (!(grid == o.grid)) throw ConfigError("field: grid mismatch");
  }
};

inline bool all_finite(std::span<const cplx> values) {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

// ---------------------------------------------------------------------------
// Multi-indices

inline int order(const MultiIndex& alpha) { return alpha[0] + alpha[1]; }

// All alpha with |alpha| = s in ascending lexicographic order.
inline std::vector<MultiIndex> multi_indices(int dim, int s) {
  if (dim == 1) return {MultiIndex{s, 0}};
  std::vector<MultiIndex> out;
  for (int a = 0; a <= s; ++a) out.push_back({a, s - a});
  return out;
}

inline double multinomial(const MultiIndex& alpha) {
  return std::tgamma(order(alpha) + 1.0) / (std::tgamma(alpha[0] + 1.0) * std::tgamma(alpha[1] + 1.0));
}

// ---------------------------------------------------------------------------
// Spectral transforms

inline void fft_forward(const Grid& g, std::span<cplx> data) {
  detail::fft_plans(g.n(0), g.dim() == 2 ? g.n(1) : 0).forward(data);
}
inline void fft_backward(const Grid& g, std::span<cplx> data) {
  detail::fft_plans(g.n(0), g.dim() == 2 ? g.n(1) : 0).backward(data);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : data) v *= scale;
}

namespace detail {

// Fourier symbol of d^m/dx^m along one axis.  Odd orders drop the Nyquist
// mode so that real fields stay real.
inline cplx axis_symbol(const Grid& g, int axis, int j, int m) {
  if (m == 0) return 1.0;
  if (g.is_nyquist(axis, j) && m % 2 == 1) return 0.0;
  const double k = g.wavenumber(axis, j);
  cplx ik(0.0, k);
  cplx out = 1.0;
  for (int r = 0; r < m; ++r) out *= ik;
  return out;
}

inline void check_order(int s) {
  if (s < 0 || s > kMaxDerivativeOrder)
    throw ConfigError("derivative order " + std::to_string(s) + " outside implemented range [0, 6]");
}

template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const int n1 = g.dim() == 2 ? g.n(1) : 1;
  std::size_t flat = 0;
  for (int j0 = 0; j0 < g.n(0); ++j0)
    for (int j1 = 0; j1 < n1; ++j1, ++flat) fn(flat, j0, j1);
}

}  // namespace detail

inline std::vector<cplx> spectrum(const Field& f) {
  std::vector<cplx> hat = f.values;
  fft_forward(f.grid, hat);
  return hat;
}

inline Field spectral_derivative(const Field& field, const MultiIndex& alpha) {
  detail::check_order(order(alpha));
  if (field.grid.dim() == 1 && alpha[1] != 0) throw ConfigError("spectral_derivative: y-derivative on a 1D grid");
  const Grid& g = field.grid;
  std::vector<cplx> hat = spectrum(field);
  detail::for_each_mode(g, [&](std::size_t flat, int j0, int j1) {
    cplx sym = detail::axis_symbol(g, 0, j0, alpha[0]);
    if (g.dim() == 2) sym *= detail::axis_symbol(g, 1, j1, alpha[1]);
    hat[flat] *= sym;
  });
  fft_backward(g, hat);
  return Field(g, std::move(hat), field.time, field.label);
}

inline Field gradient_component(const Field& field, int axis) {
  return spectral_derivative(field, axis == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1});
}

inline Field laplacian(const Field& field) {
  const Grid& g = field.grid;
  std::vector<cplx> hat = spectrum(field);
  detail::for_each_mode(g, [&](std::size_t flat, int j0, int j1) {
    double k2 = std::pow(g.wavenumber(0, j0), 2);
    if (g.dim() == 2) k2 += std::pow(g.wavenumber(1, j1), 2);
    hat[flat] *= -k2;
  });
  fft_backward(g, hat);
  return Field(g, std::move(hat), field.time, field.label);
}

// Sum over |alpha| <= s of prod_i |symbol_i|^2, evaluated per mode.
inline double sobolev_weight(const Grid& g, int s, int j0, int j1) {
  double total = 0.0;
  for (int r = 0; r <= s; ++r)
    for (const auto& alpha : multi_indices(g.dim(), r)) {
      double w = std::norm(detail::axis_symbol(g, 0, j0, alpha[0]));
      if (g.dim() == 2) w *= std::norm(detail::axis_symbol(g, 1, j1, alpha[1]));
      total += w;
    }
  return total;
}

inline std::vector<double> sobolev_weights(const Grid& g, int s) {
  detail::check_order(s);
  std::vector<double> w(g.size());
  detail::for_each_mode(g, [&](std::size_t flat, int j0, int j1) { w[flat] = sobolev_weight(g, s, j0, j1); });
  return w;
}

// ||w||_{H^s}^2 from an unnormalised spectrum.
inline double sobolev_norm_squared_from_spectrum(const Grid& g, std::span<const cplx> hat,
                                                 std::span<const double> weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < hat.size(); ++i) acc += weights[i] * std::norm(hat[i]);
  return acc * g.cell_volume() / static_cast<double>(g.size());
}

inline double sobolev_norm(const Field& field, int s) {
  detail::check_order(s);
  const auto hat = spectrum(field);
  const auto w = sobolev_weights(field.grid, s);
  return std::sqrt(sobolev_norm_squared_from_spectrum(field.grid, hat, w));
}

// ---------------------------------------------------------------------------
// Quadrature

inline double integrate(const Grid& g, std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * g.cell_volume();
}

inline cplx integral_a_conj_b(const Field& a, const Field& b) {
  a.check_same(b);
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
  return acc * a.grid.cell_volume();
}

inline double inner_product_real(const Field& a, const Field& b) { return integral_a_conj_b(a, b).real(); }
inline double inner_product_imag(const Field& a, const Field& b) { return integral_a_conj_b(a, b).imag(); }

inline double l2_norm(const Field& f) {
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::norm(v);
  return std::sqrt(acc * f.grid.cell_volume());
}

inline double l2_norm_spectral(const Field& f) {
  const auto hat = spectrum(f);
  double acc = 0.0;
  for (const auto& v : hat) acc += std::norm(v);
  return std::sqrt(acc * f.grid.cell_volume() / static_cast<double>(f.grid.size()));
}

// ---------------------------------------------------------------------------
// Band-limited resampling

// Translate by an arbitrary vector: returns w(x - shift) exactly for the
// trigonometric interpolant.
inline Field spectral_translate(const Field& field, const Vec& shift) {
  const Grid& g = field.grid;
  // A shifted Nyquist mode is not real-representable; it keeps its cosine part.
  auto factor = [&](int axis, int j) -> cplx {
    const double k = g.wavenumber(axis, j);
    const double s = shift[static_cast<std::size_t>(axis)];
    return g.is_nyquist(axis, j) ? cplx(std::cos(k * s)) : std::polar(1.0, -k * s);
  };
  std::vector<cplx> hat = spectrum(field);
  detail::for_each_mode(g, [&](std::size_t flat, int j0, int j1) {
    cplx c = factor(0, j0);
    if (g.dim() == 2) c *= factor(1, j1);
    hat[flat] *= c;
  });
  fft_backward(g, hat);
  return Field(g, std::move(hat), field.time, field.label);
}

namespace detail {

// Evaluate a 1D trigonometric interpolant (unnormalised spectrum of length n)
// at arbitrary points.  The Nyquist mode is split symmetrically.
inline std::vector<cplx> evaluate_series_1d(std::span<const cplx> hat, double half_length,
                                            std::span<const double> points) {
  const int n = static_cast<int>(hat.size());
  std::vector<cplx> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double xi = points[p] + half_length;  // node 0 sits at -L
    cplx acc{};
    for (int j = 0; j < n; ++j) {
      const int m = j < n / 2 ? j : j - n;
      const double k = m * std::numbers::pi / half_length;
      if (j == n / 2)
        acc += hat[static_cast<std::size_t>(j)] * std::cos(k * xi);
      else
        acc += hat[static_cast<std::size_t>(j)] * std::polar(1.0, k * xi);
    }
    out[p] = acc / static_cast<double>(n);
  }
  return out;
}

}  // namespace detail

// Samples the interpolant of `field` at x / stretch (per axis).
inline Field spectral_stretch(const Field& field, double stretch) {
  const Grid& g = field.grid;
  Field out(g, field.time, field.label);
  if (g.dim() == 1) {
    const auto hat = spectrum(field);
    std::vector<double> pts(static_cast<std::size_t>(g.n(0)));
    for (int i = 0; i < g.n(0); ++i) pts[static_cast<std::size_t>(i)] = g.coordinate(0, i) / stretch;
    out.values = detail::evaluate_series_1d(hat, g.half_length(0), pts);
    return out;
  }
  const int n0 = g.n(0), n1 = g.n(1);
  // Separable: resample along axis 1 row by row, then along axis 0.
  std::vector<cplx> tmp(g.size());
  std::vector<double> pts1(static_cast<std::size_t>(n1)), pts0(static_cast<std::size_t>(n0));
  for (int i = 0; i < n1; ++i) pts1[static_cast<std::size_t>(i)] = g.coordinate(1, i) / stretch;
  for (int i = 0; i < n0; ++i) pts0[static_cast<std::size_t>(i)] = g.coordinate(0, i) / stretch;
  std::vector<cplx> line(static_cast<std::size_t>(std::max(n0, n1)));
  for (int i0 = 0; i0 < n0; ++i0) {
    std::vector<cplx> row(field.values.begin() + static_cast<std::ptrdiff_t>(g.index(i0)),
                          field.values.begin() + static_cast<std::ptrdiff_t>(g.index(i0) + static_cast<std::size_t>(n1)));
    detail::fft_plans(n1, 0).forward(row);
    auto res = detail::evaluate_series_1d(row, g.half_length(1), pts1);
    std::copy(res.begin(), res.end(), tmp.begin() + static_cast<std::ptrdiff_t>(g.index(i0)));
  }
  for (int i1 = 0; i1 < n1; ++i1) {
    std::vector<cplx> col(static_cast<std::size_t>(n0));
    for (int i0 = 0; i0 < n0; ++i0) col[static_cast<std::size_t>(i0)] = tmp[g.index(i0, i1)];
    detail::fft_plans(n0, 0).forward(col);
    auto res = detail::evaluate_series_1d(col, g.half_length(0), pts0);
    for (int i0 = 0; i0 < n0; ++i0) out.values[g.index(i0, i1)] = res[static_cast<std::size_t>(i0)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot files

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("snapshot: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

inline constexpr std::uint32_t kSnapshotVersion = 1;

inline void write_snapshot(const std::string& path, const Field& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("snapshot: cannot open " + path + " for writing");
  os.write("NLSF", 4);
  const Grid& g = field.grid;
  detail::put_le<std::uint32_t>(os, kSnapshotVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n(a)));
  for (int a = 0; a < g.dim(); ++a) detail::put_le<double>(os, g.half_length(a));
  detail::put_le<double>(os, field.time);
  for (const auto& v : field.values) {
    detail::put_le<double>(os, v.real());
    detail::put_le<double>(os, v.imag());
  }
  if (!os) throw IoError("snapshot: write failed for " + path);
}

inline Field read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("snapshot: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "NLSF", 4) != 0) throw IoError("snapshot: bad magic in " + path);
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != kSnapshotVersion) throw IoError("snapshot: unsupported version " + std::to_string(version));
  const auto dim = static_cast<int>(detail::get_le<std::uint32_t>(is));
  if (dim != 1 && dim != 2) throw IoError("snapshot: bad dimension");
  std::array<int, 2> n{1, 1};
  Vec l{0.0, 0.0};
  for (int a = 0; a < dim; ++a) n[static_cast<std::size_t>(a)] = static_cast<int>(detail::get_le<std::uint32_t>(is));
  for (int a = 0; a < dim; ++a) l[static_cast<std::size_t>(a)] = detail::get_le<double>(is);
  const double t = detail::get_le<double>(is);
  Grid g;
  try {
    g = Grid::make(dim, n, l);
  } catch (const ConfigError& e) {
    throw IoError(std::string("snapshot: invalid grid header: ") + e.what());
  }
  Field out(g, t);
  for (auto& v : out.values) {
    const double re = detail::get_le<double>(is);
    const double im = detail::get_le<double>(is);
    v = cplx(re, im);
  }
  return out;
}

}  // namespace nlslab
