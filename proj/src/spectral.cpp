#include "nlwave/spectral.hpp"

#include "nlwave/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace nlwave {

namespace detail {

// The FFTW planner is not thread-safe; plans are created under a global lock
// and executed with the new-array interface, which is.
struct SineTransform {
  int dim = 1;
  int grid = 1;
  fftw_plan plan = nullptr;

  SineTransform(int d, int m) : dim(d), grid(m) {
    std::size_t total = 1;
    int n[3];
    fftw_r2r_kind kinds[3];
    for (int a = 0; a < d; ++a) {
      n[a] = m;
      kinds[a] = FFTW_RODFT00;
      total *= static_cast<std::size_t>(m);
    }
    std::vector<double> in(total), out(total);
    plan = fftw_plan_r2r(d, n, in.data(), out.data(), kinds, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw Error("FFTW failed to create a DST-I plan");
  }
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;
  ~SineTransform() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  void execute(double* in, double* out) const { fftw_execute_r2r(plan, in, out); }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  static std::shared_ptr<const SineTransform> get(int d, int m) {
    static std::map<std::pair<int, int>, std::shared_ptr<const SineTransform>> cache;
    std::lock_guard lock(planner_mutex());
    auto& slot = cache[{d, m}];
    if (!slot) slot = std::make_shared<SineTransform>(d, m);
    return slot;
  }
};

}  // namespace detail

SpectralDomain SpectralDomain::build(int dim, int modes, double padding_factor,
                                     bool allow_aliasing) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dim must be 1, 2 or 3, got " + std::to_string(dim));
  if (modes < 1) throw InvalidArgument("modes per axis must be >= 1, got " + std::to_string(modes));
  if (!std::isfinite(padding_factor) || padding_factor < 1.0)
    throw InvalidArgument("padding_factor must be >= 1");
  if (padding_factor < 3.0) {
    if (!allow_aliasing)
      throw InvalidArgument(
          "padding_factor must be >= 3 (anti-aliasing for a quintic nonlinearity); "
          "set allow_aliasing to override");
    std::cerr << "nlwave: warning: padding_factor " << padding_factor
              << " < 3, quintic products will alias\n";
  }

  SpectralDomain d;
  d.dim_ = dim;
  d.modes_ = modes;
  d.padding_ = padding_factor;
  d.allow_aliasing_ = allow_aliasing;
  d.grid_ = std::max(1, static_cast<int>(std::ceil(padding_factor * modes - 1e-9)));
  d.weight_ = std::pow(std::numbers::pi / (d.grid_ + 1), dim);

  std::size_t count = 1;
  d.grid_points_ = 1;
  for (int a = 0; a < dim; ++a) {
    count *= static_cast<std::size_t>(modes);
    d.grid_points_ *= static_cast<std::size_t>(d.grid_);
  }
  d.indices_.resize(count);
  d.eigenvalues_.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    MultiIndex k{0, 0, 0};
    std::size_t rest = i;
    for (int a = dim - 1; a >= 0; --a) {
      k[a] = static_cast<int>(rest % modes) + 1;
      rest /= modes;
    }
    d.indices_[i] = k;
    d.eigenvalues_[static_cast<Eigen::Index>(i)] =
        static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
  }
  d.transform_ = detail::SineTransform::get(dim, d.grid_);
  return d;
}

MultiIndex SpectralDomain::multi_index(std::size_t flat) const { return indices_.at(flat); }

std::size_t SpectralDomain::flat_index(const MultiIndex& k) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) {
    if (k[a] < 1 || k[a] > modes_) throw InvalidArgument("mode index out of range");
    flat = flat * modes_ + static_cast<std::size_t>(k[a] - 1);
  }
  return flat;
}

int SpectralDomain::max_axis_index(std::size_t flat) const {
  const auto& k = indices_[flat];
  return std::max({k[0], k[1], k[2]});
}

double SpectralDomain::node(int j) const { return j * std::numbers::pi / (grid_ + 1); }

Field SpectralDomain::basis(const MultiIndex& k) const {
  Field f = zero_field();
  f[static_cast<Eigen::Index>(flat_index(k))] = 1.0;
  return f;
}

Field SpectralDomain::basis(int k) const {
  if (dim_ != 1) throw InvalidArgument("basis(int) requires a one-dimensional domain");
  return basis(MultiIndex{k, 0, 0});
}

namespace {

// Offset of a mode inside the padded grid-shaped coefficient array.
std::size_t padded_offset(const MultiIndex& k, int dim, int grid) {
  std::size_t off = 0;
  for (int a = 0; a < dim; ++a) off = off * grid + static_cast<std::size_t>(k[a] - 1);
  return off;
}

}  // namespace

GridValues SpectralDomain::to_grid(const Field& f) const {
  if (static_cast<std::size_t>(f.size()) != num_modes())
    throw InvalidArgument("field size does not match the domain");
  // RODFT00 computes 2 sum_j X_j sin(pi (j+1)(k+1)/(M+1)) per axis.
  const double scale = std::pow(std::sqrt(2.0 / std::numbers::pi) / 2.0, dim_);
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_points_));
  for (std::size_t i = 0; i < indices_.size(); ++i)
    padded[static_cast<Eigen::Index>(padded_offset(indices_[i], dim_, grid_))] =
        scale * f[static_cast<Eigen::Index>(i)];
  GridValues out(static_cast<Eigen::Index>(grid_points_));
  transform_->execute(padded.data(), out.data());
  return out;
}

Field SpectralDomain::from_grid(const GridValues& g) const {
  if (static_cast<std::size_t>(g.size()) != grid_points_)
    throw InvalidArgument("grid size does not match the domain");
  if (!g.allFinite()) throw NonFiniteState("from_grid: non-finite grid values");
  const double per_axis = std::numbers::pi / (grid_ + 1) * std::sqrt(2.0 / std::numbers::pi) / 2.0;
  const double scale = std::pow(per_axis, dim_);
  GridValues in = g;
  Eigen::VectorXd spectrum(static_cast<Eigen::Index>(grid_points_));
  transform_->execute(in.data(), spectrum.data());
  Field f(static_cast<Eigen::Index>(num_modes()));
  for (std::size_t i = 0; i < indices_.size(); ++i)
    f[static_cast<Eigen::Index>(i)] =
        scale * spectrum[static_cast<Eigen::Index>(padded_offset(indices_[i], dim_, grid_))];
  return f;
}

GridValues to_grid(const SpectralDomain& domain, const Field& f) { return domain.to_grid(f); }

Field from_grid(const SpectralDomain& domain, const GridValues& g) { return domain.from_grid(g); }

Field project(const SpectralDomain& domain, const Field& f, int k) {
  if (k < 1 || k > domain.modes())
    throw InvalidArgument("projection index must lie in [1, N], got " + std::to_string(k));
  if (static_cast<std::size_t>(f.size()) != domain.num_modes())
    throw InvalidArgument("field size does not match the domain");
  Field out = f;
  for (std::size_t i = 0; i < domain.num_modes(); ++i)
    if (domain.max_axis_index(i) > k) out[static_cast<Eigen::Index>(i)] = 0.0;
  return out;
}

double hs_norm(const SpectralDomain& domain, const Field& f, double s) {
  if (static_cast<std::size_t>(f.size()) != domain.num_modes())
    throw InvalidArgument("field size does not match the domain");
  if (s == 0.0) return f.norm();
  if (s == 1.0) return std::sqrt((domain.eigenvalues().array() * f.array().square()).sum());
  return std::sqrt((domain.eigenvalues().array().pow(s) * f.array().square()).sum());
}

ModalState zero_state(const SpectralDomain& domain) {
  return ModalState{domain.zero_field(), domain.zero_field(), 0.0};
}

double energy_norm(const SpectralDomain& domain, const ModalState& state) {
  const double hu = hs_norm(domain, state.u, 1.0);
  const double lv = state.v.norm();
  return std::sqrt(hu * hu + lv * lv);
}

double energy_distance(const SpectralDomain& domain, const ModalState& a, const ModalState& b) {
  ModalState diff{a.u - b.u, a.v - b.v, 0.0};
  return energy_norm(domain, diff);
}

Field embed(const SpectralDomain& from, const SpectralDomain& to, const Field& f) {
  if (from.dim() != to.dim()) throw InvalidArgument("embed: dimension mismatch");
  Field out = to.zero_field();
  const int shared = std::min(from.modes(), to.modes());
  for (std::size_t i = 0; i < from.num_modes(); ++i) {
    if (from.max_axis_index(i) > shared) continue;
    out[static_cast<Eigen::Index>(to.flat_index(from.multi_index(i)))] =
        f[static_cast<Eigen::Index>(i)];
  }
  return out;
}

bool all_finite(const Field& f) { return f.allFinite(); }

}  // namespace nlwave
