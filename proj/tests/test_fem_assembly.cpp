#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "adaptsc/fem_assembly.hpp"

using namespace adaptsc;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

std::vector<double> random_point(std::mt19937& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> y(d);
  for (auto& v : y) v = u(rng);
  return y;
}

// L2 error of the bilinear field with the given nodal values against `exact`,
// by 4x4 sub-sampled midpoint rule per cell (independent of the assembly code).
double l2_error(const SpatialMesh& mesh, const Eigen::VectorXd& nodal, const std::function<double(const Vec2&)>& exact) {
  const int n = mesh.cells_per_side();
  const double h = mesh.cell_size();
  const int sub = 6;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto nodes = mesh.cell_nodes(i, j);
      const Vec2 c = mesh.node(nodes[0]);
      for (int a = 0; a < sub; ++a) {
        for (int b = 0; b < sub; ++b) {
          const double xi = (a + 0.5) / sub;
          const double eta = (b + 0.5) / sub;
          const double uh = nodal(static_cast<Eigen::Index>(nodes[0])) * (1 - xi) * (1 - eta) +
                            nodal(static_cast<Eigen::Index>(nodes[1])) * xi * (1 - eta) +
                            nodal(static_cast<Eigen::Index>(nodes[2])) * (1 - xi) * eta +
                            nodal(static_cast<Eigen::Index>(nodes[3])) * xi * eta;
          const double e = uh - exact(Vec2{c[0] + xi * h, c[1] + eta * h});
          s += e * e * h * h / (sub * sub);
        }
      }
    }
  }
  return std::sqrt(s);
}

// Dense 2D Nystrom matrix for the full (non-factorized) covariance on an n x n midpoint grid.
Eigen::MatrixXd dense_covariance(const KlParameters& p) {
  const int n = p.n_grid;
  const double h = 2.0 / n;
  Eigen::MatrixXd c(n * n, n * n);
  for (int q1 = 0; q1 < n * n; ++q1) {
    const double x1 = -1.0 + (q1 % n + 0.5) * h;
    const double x2 = -1.0 + (q1 / n + 0.5) * h;
    for (int q2 = 0; q2 < n * n; ++q2) {
      const double z1 = -1.0 + (q2 % n + 0.5) * h;
      const double z2 = -1.0 + (q2 / n + 0.5) * h;
      const double dist2 = (x1 - z1) * (x1 - z1) + (x2 - z2) * (x2 - z2);
      c(q1, q2) = h * h * p.sigma0_sq * (1 - x1 * x1) * (1 - x2 * x2) * (1 - z1 * z1) * (1 - z2 * z2) *
                  std::exp(-dist2 / (p.corr_length * p.corr_length));
    }
  }
  return c;
}

}  // namespace

TEST_CASE("mesh partition") {
  const SpatialMesh mesh(3);
  CHECK(mesh.cells_per_side() == 8);
  CHECK(mesh.cell_size() == 0.25);
  CHECK(mesh.num_nodes() == 81);
  CHECK(mesh.num_interior() == 49);
  CHECK(mesh.num_boundary() == 32);
  for (std::size_t g : mesh.boundary_nodes()) {
    const Vec2 x = mesh.node(g);
    CHECK((std::abs(x[0]) == 1.0 || std::abs(x[1]) == 1.0));
  }
  for (std::size_t g : mesh.interior_nodes()) {
    const Vec2 x = mesh.node(g);
    CHECK((std::abs(x[0]) < 1.0 && std::abs(x[1]) < 1.0));
  }
  CHECK_THROWS(SpatialMesh(0));
}

TEST_CASE("element mass entries at a corner node") {
  const SpatialMesh mesh(2);
  const double h = mesh.cell_size();
  const Eigen::MatrixXd m = dense(assemble_mass(mesh));
  // Node 0 touches one cell only.
  CHECK(m(0, 0) == doctest::Approx(h * h / 9));
  CHECK(m(0, 1) == doctest::Approx(h * h / 18));
  CHECK(m(0, 5) == doctest::Approx(h * h / 18));
  CHECK(m(0, 6) == doctest::Approx(h * h / 36));
  for (std::size_t g : mesh.interior_nodes()) {
    CHECK(m.row(static_cast<Eigen::Index>(g)).sum() == doctest::Approx(h * h).epsilon(1e-14));
  }
}

TEST_CASE("mass and diffusion are symmetric and positive definite") {
  for (int level = 1; level <= 4; ++level) {
    Assembler assembler(SpatialMesh(level), make_four_quadrant_wind(0.5), 0.1, HotWall{0.1});
    const Eigen::MatrixXd q = dense(assembler.mass());
    const Eigen::MatrixXd k = dense(assembler.diffusion());
    CHECK((q - q.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-15 * k.cwiseAbs().maxCoeff());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() > 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("four-quadrant wind values") {
  const FourQuadrantWind wind(0.5);
  const Vec2 w = mean_wind({0.0, 1.0});
  CHECK(w[0] == 2.0);
  CHECK(w[1] == 0.0);
  const std::vector<double> y{0.3, -0.4, 0.9, 1.0};
  const Vec2 centre = wind.evaluate({0.5, 0.5}, y);
  const Vec2 base = mean_wind({0.5, 0.5});
  CHECK(centre[0] == doctest::Approx(base[0]));
  CHECK(centre[1] == doctest::Approx(base[1]));
  // In quadrant 3 (upper right) only y_4 acts.
  const Vec2 x{0.7, 0.2};
  const Vec2 p = wind.perturbation(3, x);
  const Vec2 r = mean_wind({2 * (0.7 - 0.5), 2 * (0.2 - 0.5)});
  CHECK(p[0] == doctest::Approx(0.5 * r[0]));
  CHECK(p[1] == doctest::Approx(0.5 * r[1]));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(wind.perturbation(i, x)[0] == 0.0);
    CHECK(wind.perturbation(i, x)[1] == 0.0);
  }
}

TEST_CASE("four-quadrant advection: mean part, linearity, skew-symmetry") {
  const SpatialMesh mesh(3);
  Assembler assembler(mesh, make_four_quadrant_wind(0.5), 0.1, HotWall{0.1});
  const std::vector<double> zero(4, 0.0);
  const auto [w0, w0b] = split_blocks(mesh, assemble_advection(mesh, mean_wind));
  CHECK((dense(assembler.advection(zero)) - dense(w0)).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto y = random_point(rng, 4);
    Eigen::MatrixXd expected = dense(assembler.advection(zero));
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> e(4, 0.0);
      e[i] = 1.0;
      expected += y[i] * (dense(assembler.advection(e)) - dense(assembler.advection(zero)));
    }
    const Eigen::MatrixXd got = dense(assembler.advection(y));
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((got + got.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * got.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("non-skew assembly of a polynomial divergence-free wind is already skew") {
  // 3x3 Gauss integrates w0 . grad(phi_j) phi_i exactly, so the plain Galerkin matrix
  // must agree with the skew form used by the assembler.
  const SpatialMesh mesh(2);
  const auto skew = dense(assemble_advection(mesh, mean_wind));
  const int n = mesh.cells_per_side();
  const double h = mesh.cell_size();
  Eigen::MatrixXd plain = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()),
                                                static_cast<Eigen::Index>(mesh.num_nodes()));
  const double r = std::sqrt(0.6);
  const std::array<double, 3> gp{0.5 - 0.5 * r, 0.5, 0.5 + 0.5 * r};
  const std::array<double, 3> gw{5.0 / 18, 8.0 / 18, 5.0 / 18};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const auto nodes = mesh.cell_nodes(i, j);
      const Vec2 c = mesh.node(nodes[0]);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double xi = gp[a], eta = gp[b];
          const Vec2 w = mean_wind({c[0] + xi * h, c[1] + eta * h});
          const std::array<double, 4> phi{(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
          const std::array<double, 4> dx{-(1 - eta) / h, (1 - eta) / h, -eta / h, eta / h};
          const std::array<double, 4> dy{-(1 - xi) / h, -xi / h, (1 - xi) / h, xi / h};
          for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q)
              plain(static_cast<Eigen::Index>(nodes[p]), static_cast<Eigen::Index>(nodes[q])) +=
                  gw[a] * gw[b] * h * h * phi[p] * (w[0] * dx[q] + w[1] * dy[q]);
        }
    }
  CHECK((plain - skew).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("KL eigenpairs: positivity, ordering, orthonormality") {
  KlParameters p;
  p.dim = 16;
  const auto eig = kl_eigenpairs(p);
  const double h = 2.0 / p.n_grid;
  REQUIRE(eig.values.size() == 16);
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    CHECK(eig.values[i] > 0.0);
    if (i > 0) CHECK(eig.values[i] <= eig.values[i - 1]);
  }
  Eigen::MatrixXd v(p.n_grid * p.n_grid, 16);
  for (std::size_t i = 0; i < 16; ++i) v.col(static_cast<Eigen::Index>(i)) = eig.vector(i);
  const Eigen::MatrixXd gram = h * h * v.transpose() * v;
  CHECK((gram - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 1e-8);
  for (std::size_t i = 0; i < 16; ++i) {
    const Eigen::VectorXd vi = eig.vector(i);
    for (Eigen::Index k = 0; k < vi.size(); ++k) {
      if (std::abs(vi(k)) > 1e-12) {
        CHECK(vi(k) > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("KL factorized eigensolve agrees with a dense 2D Nystrom solve") {
  KlParameters p;
  p.n_grid = 14;
  p.dim = 10;
  const auto eig = kl_eigenpairs(p);
  const Eigen::MatrixXd c = dense_covariance(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  const Eigen::VectorXd reference = solver.eigenvalues().reverse();
  for (std::size_t i = 0; i < p.dim; ++i) {
    CHECK(std::abs(eig.values[i] - reference(static_cast<Eigen::Index>(i))) <= 1e-10 * reference(0));
    const Eigen::VectorXd v = eig.vector(i);
    CHECK((c * v - eig.values[i] * v).norm() <= 1e-10 * reference(0) * v.norm());
  }
}

TEST_CASE("KL stream function vanishes on the boundary and the wind is its curl") {
  KlParameters p;
  p.dim = 8;
  const KlStreamWind wind(p);
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) % p.dim;
    const double s = u(rng);
    const std::array<Vec2, 4> edge{Vec2{-1.0, s}, Vec2{1.0, s}, Vec2{s, -1.0}, Vec2{s, 1.0}};
    const std::array<Vec2, 4> normal{Vec2{-1, 0}, Vec2{1, 0}, Vec2{0, -1}, Vec2{0, 1}};
    const auto y = random_point(rng, p.dim);
    for (int e = 0; e < 4; ++e) {
      CHECK(std::abs(wind.stream_function(i, edge[e])) <= 1e-12);
      const Vec2 w = wind.evaluate(edge[e], y);
      CHECK(std::abs(w[0] * normal[e][0] + w[1] * normal[e][1]) <= 1e-8);
    }
    // Central differences of the stream function reproduce the analytic curl.
    const Vec2 x{0.9 * u(rng), 0.9 * u(rng)};
    const double d = 1e-5;
    const double d1 = (wind.stream_function(i, {x[0] + d, x[1]}) - wind.stream_function(i, {x[0] - d, x[1]})) / (2 * d);
    const double d2 = (wind.stream_function(i, {x[0], x[1] + d}) - wind.stream_function(i, {x[0], x[1] - d})) / (2 * d);
    const Vec2 w = wind.perturbation(i, x);
    const double amp = std::sqrt(wind.eigenpairs().values[i]);
    CHECK(std::abs(w[0] - amp * d2) <= 1e-6 * (1 + std::abs(w[0])));
    CHECK(std::abs(w[1] + amp * d1) <= 1e-6 * (1 + std::abs(w[1])));
  }
}

TEST_CASE("KL perturbation magnitudes decay with mode index") {
  KlParameters p;
  p.dim = 64;
  const KlStreamWind wind(p);
  const auto& eig = wind.eigenpairs();
  std::vector<double> peak;
  for (std::size_t i = 0; i < p.dim; ++i) {
    double m = 0.0;
    for (double a : eig.grid)
      for (double b : eig.grid) {
        const Vec2 w = wind.perturbation(i, {a, b});
        m = std::max(m, std::hypot(w[0], w[1]));
      }
    peak.push_back(m);
  }
  auto mean = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += peak[i];
    return s / static_cast<double>(to - from);
  };
  CHECK(mean(0, 16) > mean(16, 32));
  CHECK(mean(16, 32) > mean(32, 48));
  CHECK(mean(32, 48) > mean(48, 64));
  CHECK(peak.front() > 100 * peak.back());
}

TEST_CASE("KL advection is skew-symmetric") {
  KlParameters p;
  p.dim = 8;
  Assembler assembler(SpatialMesh(3), make_kl_wind(p), 0.1, HotWall{0.1});
  std::mt19937 rng(31);
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXd w = dense(assembler.advection(random_point(rng, 8)));
    CHECK((w + w.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * w.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("forcing from hot-wall data") {
  const double tau = 0.1;
  const HotWall wall{tau};
  CHECK(wall.ramp(tau * std::log(1.0 / 0.9)) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(wall.ramp(0.0) == 0.0);
  CHECK(wall.profile({1.0, 0.5}) == doctest::Approx(1 - 0.0625));
  CHECK(wall.profile({-1.0, 0.5}) == 0.0);
  CHECK(wall.profile({1.0, 1.0}) == 0.0);

  Assembler assembler(SpatialMesh(3), make_four_quadrant_wind(0.5), 0.1, wall);
  const std::vector<double> y{0.2, -0.3, 0.5, 0.1};
  const auto sys = assembler.assemble(y);
  const Eigen::VectorXd f0 = sys.forcing(0.0);
  const Eigen::VectorXd expected0 = -(sys.mass_boundary * sys.boundary_profile) / tau;
  CHECK((f0 - expected0).cwiseAbs().maxCoeff() <= 1e-14);
  const Eigen::VectorXd late = sys.forcing(1e3);
  const Eigen::VectorXd expected_late =
      -(0.1 * sys.diffusion_boundary + sys.advection_boundary) * sys.boundary_profile;
  CHECK((late - expected_late).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS(assembler.assemble(std::vector<double>{1.5, 0, 0, 0}));
  CHECK_THROWS(assembler.assemble(std::vector<double>{0, 0, 0}));
}

TEST_CASE("steady manufactured solution converges at second order") {
  const double eps = 0.1;
  const double pi = std::numbers::pi;
  const auto exact = [pi](const Vec2& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]) + 0.0; };
  const auto source = [&](const Vec2& x) {
    const Vec2 w = mean_wind(x);
    const double s1 = std::sin(pi * x[0]), s2 = std::sin(pi * x[1]);
    const double c1 = std::cos(pi * x[0]), c2 = std::cos(pi * x[1]);
    return eps * 2 * pi * pi * s1 * s2 + w[0] * pi * c1 * s2 + w[1] * pi * s1 * c2;
  };
  std::vector<double> errors;
  for (int level = 3; level <= 5; ++level) {
    const SpatialMesh mesh(level);
    Assembler assembler(mesh, make_four_quadrant_wind(0.5), eps, HotWall{0.1});
    const auto sys = assembler.assemble(std::vector<double>(4, 0.0));
    const Eigen::VectorXd load = assemble_load(mesh, source);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(mesh.num_interior()));
    for (std::size_t k = 0; k < mesh.num_interior(); ++k) rhs(static_cast<Eigen::Index>(k)) = load(static_cast<Eigen::Index>(mesh.interior_nodes()[k]));
    Eigen::SparseLU<SparseMatrix> lu(sys.stiffness());
    const Eigen::VectorXd u = lu.solve(rhs);
    Eigen::VectorXd nodal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t k = 0; k < mesh.num_interior(); ++k) nodal(static_cast<Eigen::Index>(mesh.interior_nodes()[k])) = u(static_cast<Eigen::Index>(k));
    errors.push_back(l2_error(mesh, nodal, exact));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double ratio = errors[k - 1] / errors[k];
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
  }
}
