#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace adaptsc {

using Vec2 = std::array<double, 2>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Uniform square Q1 mesh of (-1,1)^2 with 2^l cells per side.
///
/// Global node g = j * (n + 1) + i sits at (-1 + i h, -1 + j h). Interior and boundary
/// nodes are each numbered in increasing global order.
class SpatialMesh {
 public:
  explicit SpatialMesh(int grid_parameter);

  int grid_parameter() const { return grid_parameter_; }
  int cells_per_side() const { return n_; }
  double cell_size() const { return h_; }

  std::size_t num_nodes() const { return static_cast<std::size_t>((n_ + 1) * (n_ + 1)); }
  std::size_t num_interior() const { return interior_.size(); }
  std::size_t num_boundary() const { return boundary_.size(); }

  Vec2 node(std::size_t global) const;
  bool is_boundary(std::size_t global) const;
  /// Position within the interior or boundary numbering.
  std::size_t local_index(std::size_t global) const { return local_[global]; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }

  /// Global indices of cell (i, j)'s corners: (0,0), (1,0), (0,1), (1,1).
  std::array<std::size_t, 4> cell_nodes(int i, int j) const;

 private:
  int grid_parameter_;
  int n_;
  double h_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<std::size_t> local_;
};

/// w0(x) = (2 x2 (1 - x1^2), -2 x1 (1 - x2^2)).
Vec2 mean_wind(const Vec2& x);

/// Wind of the form w(x, y) = w0(x) + sum_i y_i w_i(x).
class WindModel {
 public:
  virtual ~WindModel() = default;

  virtual std::size_t dim() const = 0;
  virtual Vec2 mean(const Vec2& x) const { return mean_wind(x); }
  /// The scaled field multiplying y_i (index is zero based).
  virtual Vec2 perturbation(std::size_t i, const Vec2& x) const = 0;

  Vec2 evaluate(const Vec2& x, std::span<const double> y) const;
};

/// Four recirculations, one per quadrant, each a half-size copy of w0.
/// Quadrants: 0 = lower left, 1 = upper left, 2 = lower right, 3 = upper right.
/// Points on x1 = 0 or x2 = 0 belong to the right or upper quadrant.
class FourQuadrantWind final : public WindModel {
 public:
  explicit FourQuadrantWind(double sigma = 0.5) : sigma_(sigma) {}

  std::size_t dim() const override { return 4; }
  Vec2 perturbation(std::size_t i, const Vec2& x) const override;
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

struct KlParameters {
  double sigma0_sq = 5.0;
  double corr_length = 1.0;
  int n_grid = 64;
  std::size_t dim = 8;
};

/// Leading eigenpairs of the boundary-damped Gaussian covariance operator on (-1,1)^2.
///
/// The kernel factorizes over coordinates, so the 2D Nystrom eigenpairs are products
/// of 1D ones: lambda = sigma0^2 mu_a mu_b, psi = phi_a (x) phi_b.
struct KlEigenpairs {
  KlParameters parameters;
  std::vector<double> grid;                    // 1D midpoints, weight h = 2/n_grid each
  Eigen::VectorXd mode_values;                 // 1D eigenvalues mu, descending
  Eigen::MatrixXd mode_vectors;                // n_grid x n_grid, column per mode
  std::vector<double> values;                  // 2D lambda_i, descending
  std::vector<std::pair<int, int>> factors;    // (a, b) per 2D mode

  /// Discrete 2D eigenvector of mode i on the grid (x1 index fastest).
  Eigen::VectorXd vector(std::size_t i) const;
};

/// Covariance factor (1 - s^2)(1 - t^2) exp(-(s - t)^2 / L^2).
double kl_kernel_1d(double s, double t, double corr_length);

KlEigenpairs kl_eigenpairs(const KlParameters& parameters);

/// Wind = curl of psi0 + sum_i sqrt(lambda_i) y_i psi_i with curl psi = (d2 psi, -d1 psi).
class KlStreamWind final : public WindModel {
 public:
  explicit KlStreamWind(const KlParameters& parameters);
  explicit KlStreamWind(KlEigenpairs eigenpairs);

  std::size_t dim() const override { return eig_.values.size(); }
  Vec2 perturbation(std::size_t i, const Vec2& x) const override;

  const KlEigenpairs& eigenpairs() const { return eig_; }
  /// Nystrom-extended eigenfunction psi_i (unit discrete L2 norm) at x.
  double stream_function(std::size_t i, const Vec2& x) const;

 private:
  // value and derivative of the extended 1D mode a at s
  std::pair<double, double> mode(int a, double s) const;

  KlEigenpairs eig_;
};

std::unique_ptr<WindModel> make_four_quadrant_wind(double sigma);
std::unique_ptr<WindModel> make_kl_wind(const KlParameters& parameters);

/// Hot-wall Dirichlet data: u = (1 - x2^4)(1 - exp(-t/tau)) on x1 = 1, zero elsewhere.
struct HotWall {
  double tau = 0.1;

  double ramp(double t) const;
  double ramp_rate(double t) const;
  double profile(const Vec2& x) const;
};

/// M u' + A u = f(t) for one parameter value, with A = eps K + W(y).
struct SemiDiscreteSystem {
  SparseMatrix mass;
  SparseMatrix diffusion;
  SparseMatrix advection;
  SparseMatrix mass_boundary;
  SparseMatrix diffusion_boundary;
  SparseMatrix advection_boundary;
  double epsilon = 0.1;
  HotWall wall;
  Eigen::VectorXd boundary_profile;

  SparseMatrix stiffness() const;
  Eigen::VectorXd boundary_values(double t) const;
  /// f(t) = -Q_b u_b'(t) - (eps K_b + W_b) u_b(t).
  Eigen::VectorXd forcing(double t) const;

  /// Precomputes the two boundary products used by forcing().
  void finalize();

 private:
  Eigen::VectorXd mass_profile_;
  Eigen::VectorXd stiffness_profile_;
};

/// Assembles once per mesh and wind, then produces systems for any parameter value.
/// Advection is stored as W0 + sum_i y_i W_i on one shared sparsity pattern.
class Assembler {
 public:
  Assembler(const SpatialMesh& mesh, std::shared_ptr<const WindModel> wind, double epsilon, HotWall wall);

  const SpatialMesh& mesh() const { return mesh_; }
  const WindModel& wind() const { return *wind_; }
  std::size_t parameter_dim() const { return wind_->dim(); }
  double epsilon() const { return epsilon_; }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& diffusion() const { return diffusion_; }

  SparseMatrix advection(std::span<const double> y) const;
  SemiDiscreteSystem assemble(std::span<const double> y) const;

 private:
  SparseMatrix combine(const std::vector<SparseMatrix>& parts, std::span<const double> y) const;

  SpatialMesh mesh_;
  std::shared_ptr<const WindModel> wind_;
  double epsilon_;
  HotWall wall_;
  SparseMatrix mass_;
  SparseMatrix diffusion_;
  SparseMatrix mass_boundary_;
  SparseMatrix diffusion_boundary_;
  std::vector<SparseMatrix> advection_;           // W0, W1, ..., Wd
  std::vector<SparseMatrix> advection_boundary_;
  Eigen::VectorXd profile_;
};

/// Skew-symmetrized advection matrix on all nodes for a single field.
SparseMatrix assemble_advection(const SpatialMesh& mesh, const std::function<Vec2(const Vec2&)>& field);
SparseMatrix assemble_mass(const SpatialMesh& mesh);
SparseMatrix assemble_diffusion(const SpatialMesh& mesh);
/// Load vector int f phi_g over all nodes (3x3 Gauss).
Eigen::VectorXd assemble_load(const SpatialMesh& mesh, const std::function<double(const Vec2&)>& f);

/// Rows of interior nodes restricted to interior (first) or boundary (second) columns.
std::pair<SparseMatrix, SparseMatrix> split_blocks(const SpatialMesh& mesh, const SparseMatrix& full);

}  // namespace adaptsc
