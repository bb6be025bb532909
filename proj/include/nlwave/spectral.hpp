#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nlwave {

/// Modal coefficients against the Dirichlet sine eigenbasis of the domain.
using Field = Eigen::VectorXd;
/// Point values on the interior collocation grid, row-major over the axes.
using GridValues = Eigen::VectorXd;
using MultiIndex = std::array<int, 3>;

namespace detail {
struct SineTransform;
}

/**
 * Dirichlet sine eigenbasis of -Laplace on the box (0, pi)^dim.
 *
 * Eigenfunctions are e_k(x) = prod_i sqrt(2/pi) sin(k_i x_i) with eigenvalue
 * lambda_k = sum_i k_i^2, for multi-indices 1 <= k_i <= N.  Modal data is stored
 * row-major over the axes (axis 0 slowest).  The collocation grid has M points per
 * axis at x_j = j pi / (M + 1), j = 1..M, where analysis and synthesis form an
 * exact DST-I pair.
 *
 * Copies share the transform plan and are cheap.
 */
class SpectralDomain {
 public:
  /// Throws InvalidArgument for dim outside {1,2,3}, N < 1 or padding < 3 without
  /// allow_aliasing (a warning is printed when aliasing is allowed).
  static SpectralDomain build(int dim, int modes, double padding_factor = 3.0,
                              bool allow_aliasing = false);

  int dim() const noexcept { return dim_; }
  int modes() const noexcept { return modes_; }
  int grid_per_axis() const noexcept { return grid_; }
  double padding_factor() const noexcept { return padding_; }
  bool allow_aliasing() const noexcept { return allow_aliasing_; }

  /// N^dim.
  std::size_t num_modes() const noexcept { return eigenvalues_.size(); }
  /// M^dim.
  std::size_t num_grid_points() const noexcept { return grid_points_; }

  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  double lambda1() const noexcept { return static_cast<double>(dim_); }

  MultiIndex multi_index(std::size_t flat) const;
  std::size_t flat_index(const MultiIndex& k) const;
  /// Largest axis index of the mode.
  int max_axis_index(std::size_t flat) const;

  /// Coordinate of the j-th interior node along one axis, j in [1, M].
  double node(int j) const;
  /// Quadrature weight (pi / (M + 1))^dim of one grid point.
  double quadrature_weight() const noexcept { return weight_; }

  Field zero_field() const { return Field::Zero(static_cast<Eigen::Index>(num_modes())); }
  /// Unit coefficient on one mode.
  Field basis(const MultiIndex& k) const;
  /// Unit coefficient on the 1-based mode k of a one-dimensional domain.
  Field basis(int k) const;

  GridValues to_grid(const Field& f) const;
  Field from_grid(const GridValues& g) const;

  bool same_shape(const SpectralDomain& other) const noexcept {
    return dim_ == other.dim_ && modes_ == other.modes_ && grid_ == other.grid_;
  }

 private:
  int dim_ = 1;
  int modes_ = 1;
  int grid_ = 3;
  double padding_ = 3.0;
  bool allow_aliasing_ = false;
  double weight_ = 0.0;
  std::size_t grid_points_ = 0;
  Eigen::VectorXd eigenvalues_;
  std::vector<MultiIndex> indices_;
  std::shared_ptr<const detail::SineTransform> transform_;
};

/// Grid synthesis sum_k c_k e_k(x_j).
GridValues to_grid(const SpectralDomain& domain, const Field& f);
/// Discrete L2 projection of grid data onto the resolved band.
Field from_grid(const SpectralDomain& domain, const GridValues& g);
/// Zero every coefficient with an axis index above k.
Field project(const SpectralDomain& domain, const Field& f, int k);
/// (sum_k lambda_k^s c_k^2)^(1/2).
double hs_norm(const SpectralDomain& domain, const Field& f, double s);

/// A point (u, du/dt) of the phase space at time t.
struct ModalState {
  Field u;
  Field v;
  double t = 0.0;
};

ModalState zero_state(const SpectralDomain& domain);

/// (|u|_{H^1}^2 + |v|^2)^(1/2).
double energy_norm(const SpectralDomain& domain, const ModalState& state);
/// Energy-norm distance between two states.
double energy_distance(const SpectralDomain& domain, const ModalState& a, const ModalState& b);

/// Embed a field of a coarser domain into a finer one with the same dimension.
Field embed(const SpectralDomain& from, const SpectralDomain& to, const Field& f);

bool all_finite(const Field& f);

}  // namespace nlwave
