#include "adaptsc/fem_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace adaptsc {

namespace {

using Triplet = Eigen::Triplet<double>;

struct Gauss1D {
  std::vector<double> nodes;  // on [0, 1]
  std::vector<double> weights;
};

const Gauss1D& gauss2() {
  static const Gauss1D rule{{0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}, {0.5, 0.5}};
  return rule;
}

const Gauss1D& gauss3() {
  static const double r = 0.5 * std::sqrt(0.6);
  static const Gauss1D rule{{0.5 - r, 0.5, 0.5 + r}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  return rule;
}

struct ShapeValues {
  std::array<double, 4> value;
  std::array<Vec2, 4> grad;  // physical gradient
};

ShapeValues shape(double xi, double eta, double h) {
  ShapeValues s;
  s.value = {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
  s.grad = {Vec2{-(1 - eta) / h, -(1 - xi) / h}, Vec2{(1 - eta) / h, -xi / h}, Vec2{-eta / h, (1 - xi) / h},
            Vec2{eta / h, xi / h}};
  return s;
}

// Calls body(cell nodes, shape values, physical point, weight * |cell|) for every
// quadrature point of every cell.
template <typename Body>
void for_each_quadrature_point(const SpatialMesh& mesh, const Gauss1D& rule, Body&& body) {
  const int n = mesh.cells_per_side();
  const double h = mesh.cell_size();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto nodes = mesh.cell_nodes(i, j);
      const Vec2 corner = mesh.node(nodes[0]);
      for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
          const double xi = rule.nodes[a];
          const double eta = rule.nodes[b];
          const Vec2 x{corner[0] + xi * h, corner[1] + eta * h};
          body(nodes, shape(xi, eta, h), x, rule.weights[a] * rule.weights[b] * h * h);
        }
      }
    }
  }
}

SparseMatrix from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets) {
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

bool same_pattern(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

Vec2 recirculation(const Vec2& x, double a, double b) {
  return mean_wind(Vec2{2.0 * (x[0] - a), 2.0 * (x[1] - b)});
}

}  // namespace

SpatialMesh::SpatialMesh(int grid_parameter) : grid_parameter_(grid_parameter) {
  if (grid_parameter < 1 || grid_parameter > 12) {
    throw std::invalid_argument("grid parameter must lie in [1, 12], got " + std::to_string(grid_parameter));
  }
  n_ = 1 << grid_parameter;
  h_ = 2.0 / n_;
  local_.resize(num_nodes());
  for (std::size_t g = 0; g < num_nodes(); ++g) {
    auto& bucket = is_boundary(g) ? boundary_ : interior_;
    local_[g] = bucket.size();
    bucket.push_back(g);
  }
}

Vec2 SpatialMesh::node(std::size_t global) const {
  const auto stride = static_cast<std::size_t>(n_ + 1);
  return {-1.0 + static_cast<double>(global % stride) * h_, -1.0 + static_cast<double>(global / stride) * h_};
}

bool SpatialMesh::is_boundary(std::size_t global) const {
  const auto stride = static_cast<std::size_t>(n_ + 1);
  const std::size_t i = global % stride;
  const std::size_t j = global / stride;
  return i == 0 || j == 0 || i == stride - 1 || j == stride - 1;
}

std::array<std::size_t, 4> SpatialMesh::cell_nodes(int i, int j) const {
  const auto stride = static_cast<std::size_t>(n_ + 1);
  const std::size_t g = static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(i);
  return {g, g + 1, g + stride, g + stride + 1};
}

Vec2 mean_wind(const Vec2& x) {
  return {2.0 * x[1] * (1.0 - x[0] * x[0]), -2.0 * x[0] * (1.0 - x[1] * x[1])};
}

Vec2 WindModel::evaluate(const Vec2& x, std::span<const double> y) const {
  if (y.size() != dim()) throw std::invalid_argument("parameter point has wrong dimension");
  Vec2 w = mean(x);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    const Vec2 p = perturbation(i, x);
    w[0] += y[i] * p[0];
    w[1] += y[i] * p[1];
  }
  return w;
}

Vec2 FourQuadrantWind::perturbation(std::size_t i, const Vec2& x) const {
  static constexpr std::array<double, 4> a{-0.5, -0.5, 0.5, 0.5};
  static constexpr std::array<double, 4> b{-0.5, 0.5, -0.5, 0.5};
  if (i >= 4) throw std::out_of_range("four-quadrant wind has four perturbations");
  const std::size_t quadrant = (x[0] >= 0.0 ? 2 : 0) + (x[1] >= 0.0 ? 1 : 0);
  if (quadrant != i) return {0.0, 0.0};
  const Vec2 w = recirculation(x, a[i], b[i]);
  return {sigma_ * w[0], sigma_ * w[1]};
}

double kl_kernel_1d(double s, double t, double corr_length) {
  const double r = (s - t) / corr_length;
  return (1.0 - s * s) * (1.0 - t * t) * std::exp(-r * r);
}

Eigen::VectorXd KlEigenpairs::vector(std::size_t i) const {
  const auto [a, b] = factors.at(i);
  const Eigen::Index n = mode_vectors.rows();
  Eigen::VectorXd v(n * n);
  for (Eigen::Index q = 0; q < n; ++q) {
    for (Eigen::Index p = 0; p < n; ++p) v(q * n + p) = mode_vectors(p, a) * mode_vectors(q, b);
  }
  return v;
}

KlEigenpairs kl_eigenpairs(const KlParameters& parameters) {
  const int n = parameters.n_grid;
  if (n < 2) throw std::invalid_argument("kl.n_grid must be at least 2");
  if (parameters.dim == 0) throw std::invalid_argument("KL expansion needs at least one mode");
  if (parameters.dim > static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("more KL modes requested than grid points");
  }
  if (!(parameters.corr_length > 0.0) || !(parameters.sigma0_sq > 0.0)) {
    throw std::invalid_argument("KL covariance needs positive variance and correlation length");
  }
  KlEigenpairs out;
  out.parameters = parameters;
  const double h = 2.0 / n;
  for (int k = 0; k < n; ++k) out.grid.push_back(-1.0 + (k + 0.5) * h);

  Eigen::MatrixXd kernel(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) kernel(p, q) = h * kl_kernel_1d(out.grid[p], out.grid[q], parameters.corr_length);
  }
  const double asymmetry = (kernel - kernel.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12 * kernel.cwiseAbs().maxCoeff()) throw std::runtime_error("KL kernel matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kernel);
  if (solver.info() != Eigen::Success) throw std::runtime_error("KL eigensolver failed");
  out.mode_values = solver.eigenvalues().reverse();
  out.mode_vectors = solver.eigenvectors().rowwise().reverse() / std::sqrt(h);
  for (int a = 0; a < n; ++a) {
    auto col = out.mode_vectors.col(a);
    const double scale = col.cwiseAbs().maxCoeff();
    for (int p = 0; p < n; ++p) {
      if (std::abs(col(p)) > 1e-12 * scale) {
        if (col(p) < 0.0) col = -col;
        break;
      }
    }
  }

  struct Candidate {
    double value;
    int a;
    int b;
  };
  std::vector<Candidate> all;
  all.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      all.push_back({parameters.sigma0_sq * out.mode_values(a) * out.mode_values(b), a, b});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) {
    if (x.value != y.value) return x.value > y.value;
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  const double top = all.front().value;
  for (std::size_t i = 0; i < parameters.dim; ++i) {
    // products of two negative 1D values would masquerade as positive 2D values
    if (!(all[i].value > 1e-13 * top) || out.mode_values(all[i].a) <= 0.0 || out.mode_values(all[i].b) <= 0.0) {
      throw std::runtime_error("KL mode " + std::to_string(i + 1) +
                               " is not resolvable: covariance matrix is indefinite at this grid");
    }
    out.values.push_back(all[i].value);
    out.factors.emplace_back(all[i].a, all[i].b);
  }
  return out;
}

KlStreamWind::KlStreamWind(const KlParameters& parameters) : KlStreamWind(kl_eigenpairs(parameters)) {}

KlStreamWind::KlStreamWind(KlEigenpairs eigenpairs) : eig_(std::move(eigenpairs)) {}

std::pair<double, double> KlStreamWind::mode(int a, double s) const {
  const double L = eig_.parameters.corr_length;
  const double h = 2.0 / eig_.parameters.n_grid;
  double value = 0.0;
  double slope = 0.0;
  for (std::size_t k = 0; k < eig_.grid.size(); ++k) {
    const double t = eig_.grid[k];
    const double r = (s - t) / L;
    const double g = (1.0 - t * t) * std::exp(-r * r);
    const double phi = eig_.mode_vectors(static_cast<Eigen::Index>(k), a);
    value += g * (1.0 - s * s) * phi;
    slope += g * (-2.0 * s - (1.0 - s * s) * 2.0 * r / L) * phi;
  }
  const double scale = h / eig_.mode_values(a);
  return {scale * value, scale * slope};
}

double KlStreamWind::stream_function(std::size_t i, const Vec2& x) const {
  const auto [a, b] = eig_.factors.at(i);
  return mode(a, x[0]).first * mode(b, x[1]).first;
}

Vec2 KlStreamWind::perturbation(std::size_t i, const Vec2& x) const {
  const auto [a, b] = eig_.factors.at(i);
  const auto [fa, da] = mode(a, x[0]);
  const auto [fb, db] = mode(b, x[1]);
  const double amplitude = std::sqrt(eig_.values[i]);
  return {amplitude * fa * db, -amplitude * da * fb};
}

std::unique_ptr<WindModel> make_four_quadrant_wind(double sigma) { return std::make_unique<FourQuadrantWind>(sigma); }

std::unique_ptr<WindModel> make_kl_wind(const KlParameters& parameters) {
  return std::make_unique<KlStreamWind>(parameters);
}

double HotWall::ramp(double t) const { return -std::expm1(-t / tau); }

double HotWall::ramp_rate(double t) const { return std::exp(-t / tau) / tau; }

double HotWall::profile(const Vec2& x) const {
  if (x[0] != 1.0) return 0.0;
  const double s = x[1] * x[1];
  return 1.0 - s * s;
}

SparseMatrix SemiDiscreteSystem::stiffness() const {
  SparseMatrix a = epsilon * diffusion + advection;
  a.makeCompressed();
  return a;
}

Eigen::VectorXd SemiDiscreteSystem::boundary_values(double t) const { return wall.ramp(t) * boundary_profile; }

void SemiDiscreteSystem::finalize() {
  mass_profile_ = mass_boundary * boundary_profile;
  stiffness_profile_ = epsilon * (diffusion_boundary * boundary_profile) + advection_boundary * boundary_profile;
}

Eigen::VectorXd SemiDiscreteSystem::forcing(double t) const {
  if (mass_profile_.size() != mass.rows()) throw std::logic_error("SemiDiscreteSystem::finalize was not called");
  return -wall.ramp_rate(t) * mass_profile_ - wall.ramp(t) * stiffness_profile_;
}

SparseMatrix assemble_mass(const SpatialMesh& mesh) {
  std::vector<Triplet> t;
  for_each_quadrature_point(mesh, gauss2(), [&](const auto& nodes, const ShapeValues& s, const Vec2&, double w) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        t.emplace_back(static_cast<int>(nodes[r]), static_cast<int>(nodes[c]), w * s.value[r] * s.value[c]);
  });
  return from_triplets(mesh.num_nodes(), mesh.num_nodes(), t);
}

SparseMatrix assemble_diffusion(const SpatialMesh& mesh) {
  std::vector<Triplet> t;
  for_each_quadrature_point(mesh, gauss2(), [&](const auto& nodes, const ShapeValues& s, const Vec2&, double w) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        const double g = s.grad[r][0] * s.grad[c][0] + s.grad[r][1] * s.grad[c][1];
        t.emplace_back(static_cast<int>(nodes[r]), static_cast<int>(nodes[c]), w * g);
      }
  });
  return from_triplets(mesh.num_nodes(), mesh.num_nodes(), t);
}

SparseMatrix assemble_advection(const SpatialMesh& mesh, const std::function<Vec2(const Vec2&)>& field) {
  std::vector<Triplet> t;
  for_each_quadrature_point(mesh, gauss3(), [&](const auto& nodes, const ShapeValues& s, const Vec2& x, double w) {
    const Vec2 wind = field(x);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        // Half of the entry and its transpose with opposite sign: the skew part.
        const double v = 0.5 * w * s.value[r] * (wind[0] * s.grad[c][0] + wind[1] * s.grad[c][1]);
        t.emplace_back(static_cast<int>(nodes[r]), static_cast<int>(nodes[c]), v);
        t.emplace_back(static_cast<int>(nodes[c]), static_cast<int>(nodes[r]), -v);
      }
  });
  return from_triplets(mesh.num_nodes(), mesh.num_nodes(), t);
}

Eigen::VectorXd assemble_load(const SpatialMesh& mesh, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  for_each_quadrature_point(mesh, gauss3(), [&](const auto& nodes, const ShapeValues& s, const Vec2& x, double w) {
    const double fx = f(x);
    for (int r = 0; r < 4; ++r) load(static_cast<Eigen::Index>(nodes[r])) += w * fx * s.value[r];
  });
  return load;
}

std::pair<SparseMatrix, SparseMatrix> split_blocks(const SpatialMesh& mesh, const SparseMatrix& full) {
  std::vector<Triplet> inner;
  std::vector<Triplet> edge;
  for (int k = 0; k < full.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(full, k); it; ++it) {
      const auto row = static_cast<std::size_t>(it.row());
      const auto col = static_cast<std::size_t>(it.col());
      if (mesh.is_boundary(row)) continue;
      auto& target = mesh.is_boundary(col) ? edge : inner;
      target.emplace_back(static_cast<int>(mesh.local_index(row)), static_cast<int>(mesh.local_index(col)),
                          it.value());
    }
  }
  return {from_triplets(mesh.num_interior(), mesh.num_interior(), inner),
          from_triplets(mesh.num_interior(), mesh.num_boundary(), edge)};
}

Assembler::Assembler(const SpatialMesh& mesh, std::shared_ptr<const WindModel> wind, double epsilon, HotWall wall)
    : mesh_(mesh), wind_(std::move(wind)), epsilon_(epsilon), wall_(wall) {
  if (!wind_) throw std::invalid_argument("wind model is required");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(wall.tau > 0.0)) throw std::invalid_argument("hot_wall_rate must be positive");
  std::tie(mass_, mass_boundary_) = split_blocks(mesh_, assemble_mass(mesh_));
  std::tie(diffusion_, diffusion_boundary_) = split_blocks(mesh_, assemble_diffusion(mesh_));
  const WindModel& model = *wind_;
  auto add_field = [&](const std::function<Vec2(const Vec2&)>& field) {
    auto [inner, edge] = split_blocks(mesh_, assemble_advection(mesh_, field));
    advection_.push_back(std::move(inner));
    advection_boundary_.push_back(std::move(edge));
  };
  add_field([&](const Vec2& x) { return model.mean(x); });
  for (std::size_t i = 0; i < model.dim(); ++i) add_field([&, i](const Vec2& x) { return model.perturbation(i, x); });
  profile_.resize(static_cast<Eigen::Index>(mesh_.num_boundary()));
  for (std::size_t b = 0; b < mesh_.num_boundary(); ++b) {
    profile_(static_cast<Eigen::Index>(b)) = wall_.profile(mesh_.node(mesh_.boundary_nodes()[b]));
  }
}

SparseMatrix Assembler::combine(const std::vector<SparseMatrix>& parts, std::span<const double> y) const {
  if (y.size() + 1 != parts.size()) {
    throw std::invalid_argument("parameter point has dimension " + std::to_string(y.size()) + ", expected " +
                                std::to_string(parts.size() - 1));
  }
  for (double v : y) {
    if (!(v >= -1.0 && v <= 1.0)) throw std::invalid_argument("parameter point outside [-1,1]^d");
  }
  SparseMatrix out = parts.front();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    const SparseMatrix& part = parts[i + 1];
    if (same_pattern(out, part)) {
      Eigen::Map<Eigen::VectorXd>(out.valuePtr(), out.nonZeros()) +=
          y[i] * Eigen::Map<const Eigen::VectorXd>(part.valuePtr(), part.nonZeros());
    } else {
      out = (out + y[i] * part).eval();
    }
  }
  return out;
}

SparseMatrix Assembler::advection(std::span<const double> y) const { return combine(advection_, y); }

SemiDiscreteSystem Assembler::assemble(std::span<const double> y) const {
  SemiDiscreteSystem s;
  s.mass = mass_;
  s.diffusion = diffusion_;
  s.advection = combine(advection_, y);
  s.mass_boundary = mass_boundary_;
  s.diffusion_boundary = diffusion_boundary_;
  s.advection_boundary = combine(advection_boundary_, y);
  s.epsilon = epsilon_;
  s.wall = wall_;
  s.boundary_profile = profile_;
  s.finalize();
  return s;
}

}  // namespace adaptsc
