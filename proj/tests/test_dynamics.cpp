#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "qshear/coords.hpp"
#include "qshear/dynamics.hpp"
#include "qshear/sampling.hpp"

using namespace qshear;
using Catch::Approx;

namespace {

const MaterialParams kFig(-0.2, 0.1, 0.1);

double dist(const QTensor& a, const QTensor& b) { return frobenius(a - b); }
double norm3(const ReducedState& s) { return Vec3(s.x, s.y, s.z).norm(); }

}  // namespace

TEST_CASE("full system", "[dynamics]") {
  const auto& D = shear_matrices().D;
  for (double xi : {0.0, 0.5, 3.0}) {
    const QTensor expected = QTensor::from_matrix((2.0 * xi / 3.0) * D);
    CHECK(dist(rhs_full(QTensor::zero(), kFig.with_xi(xi)), expected) < 1e-15);
  }
  std::mt19937_64 rng(1);
  for (int i = 0; i < 30; ++i) {
    const QTensor q = random_tensor(rng, 1.5);
    // xi = 0 degenerates to the co-rotational system exactly
    const QTensor lhs = rhs_full(q, kFig);
    CHECK(dist(lhs, commutator(shear_matrices().W, q) - bulk_gradient(q, kFig)) < 1e-15);
    CHECK(dist(lhs, rhs_corotational(q, kFig)) < 1e-15);

    // v = w = 0 is invariant and the slice dynamics is the reduced system
    const QTensor slice{q.x, q.y, q.z, 0.0, 0.0};
    const QTensor f = rhs_full(slice, kFig.with_xi(0.7));
    CHECK(std::abs(f.v) < 1e-14);
    CHECK(std::abs(f.w) < 1e-14);
    const ReducedState r = rhs_reduced({q.x, q.y, q.z}, kFig.with_xi(0.7));
    CHECK(norm3({f.x - r.x, f.y - r.y, f.z - r.z}) < 1e-13);
  }
}

TEST_CASE("co-rotational and gradient systems", "[dynamics]") {
  const CriticalValues cv = critical_s(kFig);
  CHECK(frobenius(rhs_corotational(uniaxial(cv.s_plus, Vec3::UnitZ()), kFig)) < 1e-12);
  const QTensor along_e1 = rhs_corotational(uniaxial(cv.s_plus, Vec3::UnitX()), kFig);
  CHECK(dist(along_e1, QTensor{0, 0, -cv.s_plus, 0, 0}) < 1e-12);

  CHECK(frobenius(rhs_gradient(QTensor::zero(), kFig)) == 0.0);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) CHECK(frobenius(rhs_gradient(uniaxial(cv.s_minus, random_unit_vector(rng)), kFig)) < 1e-12);

  SECTION("diagonal closure: the gradient flow of a diagonal tensor is the eigenvalue system") {
    for (int i = 0; i < 30; ++i) {
      std::uniform_real_distribution<double> u(-1.5, 1.5);
      const double l = u(rng), m = u(rng);
      const QTensor g = rhs_gradient({l, m, 0, 0, 0}, kFig);
      CHECK(std::max({std::abs(g.z), std::abs(g.v), std::abs(g.w)}) < 1e-15);
      const EigenState e = rhs_eigen({l, m}, kFig);
      CHECK(std::abs(g.x - e.lambda) < 1e-14);
      CHECK(std::abs(g.y - e.mu) < 1e-14);
    }
  }
}

TEST_CASE("eigenvalue and reduced systems", "[dynamics]") {
  const EigenState zero = rhs_eigen({0, 0}, kFig);
  CHECK(zero.lambda == 0.0);
  CHECK(zero.mu == 0.0);
  const double sp = critical_s(kFig).s_plus;
  const EigenState crit = rhs_eigen({-sp / 3, -sp / 3}, kFig);
  CHECK(std::abs(crit.lambda) < 1e-12);
  CHECK(std::abs(crit.mu) < 1e-12);

  for (double xi : {0.0, 0.5, 3.0}) {
    const ReducedState r = rhs_reduced({0, 0, 0}, kFig.with_xi(xi));
    CHECK(norm3({r.x, r.y, r.z - 2.0 * xi / 3.0}) < 1e-15);
  }
  CHECK(norm3(rhs_reduced({-sp / 3, -sp / 3, 0}, kFig)) < 1e-12);
}

TEST_CASE("rescaled and short-time systems", "[dynamics]") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const QTensor q = random_tensor(rng, 1.0);
    const MaterialParams p2 = kFig.with_xi(2.0);
    CHECK(frobenius(2.0 * rhs_rescaled(q, p2) - rhs_full(q, p2)) < 1e-13);
    for (double xi : {0.1, 7.0}) {
      const MaterialParams p = kFig.with_xi(xi);
      CHECK(frobenius(xi * rhs_rescaled(q, p) - rhs_full(q, p)) < 1e-13);
    }
    CHECK(frobenius(rhs_rescaled(q, kFig.with_xi(1e6)) - rhs_shorttime_matrix(q)) < 1e-4);

    // the coordinate form is the matrix form on the v = w = 0 slice
    const ReducedState s{q.x, q.y, q.z};
    const QTensor m = rhs_shorttime_matrix({q.x, q.y, q.z, 0, 0});
    const ReducedState c = rhs_shorttime_coords(s);
    CHECK(norm3({m.x - c.x, m.y - c.y, m.z - c.z}) < 1e-14);
  }
  CHECK_THROWS_AS(rhs_rescaled(QTensor::zero(), kFig), ConfigError);

  CHECK(dist(rhs_shorttime_matrix(QTensor::zero()), QTensor::from_matrix((2.0 / 3.0) * shear_matrices().D)) < 1e-15);
  CHECK(frobenius(rhs_shorttime_matrix({1.0 / 6, 1.0 / 6, 0.5, 0, 0})) < 1e-13);

  const ReducedState o = rhs_shorttime_coords({0, 0, 0});
  CHECK(norm3({o.x, o.y, o.z - 2.0 / 3.0}) == 0.0);
  CHECK(norm3(rhs_shorttime_coords({1.0 / 6, 1.0 / 6, -0.5})) < 1e-15);
  CHECK(norm3(rhs_shorttime_coords({-1.0 / 3, -1.0 / 3, 0})) < 1e-15);
  for (double t : {-2.0, -0.5, 0.0, 0.9}) CHECK(norm3(rhs_shorttime_coords({t, -2.0 / 3 - t, 0})) < 1e-15);
}

TEST_CASE("level-plane system", "[dynamics]") {
  auto r_h = [](double h) { return (6 * h - 5) / (6 * (1 + 6 * h)); };
  for (double h : {0.0, -0.3, 0.4}) {
    CHECK(rhs_plane_h(r_h(h), 0.0, h).norm() < 1e-15);
    CHECK(rhs_plane_h(1.0 / 6, 0.5, h).norm() < 1e-15);
  }
  // restriction of the 3D system to y = 1/6 - h(1 - 6x)
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng), z = u(rng), h = u(rng);
    const ReducedState f = rhs_shorttime_coords({x, 1.0 / 6 - h * (1 - 6 * x), z});
    const Eigen::Vector2d g = rhs_plane_h(x, z, h);
    CHECK(std::abs(g(0) - f.x) < 1e-14);
    CHECK(std::abs(g(1) - f.z) < 1e-14);
  }
}

TEST_CASE("physical-chart system", "[dynamics]") {
  auto n3 = [](const PhysState& s) { return Vec3(s.S1, s.S2, s.theta).norm(); };
  CHECK(n3(rhs_phys({2.0 / 3, 0.0, std::numbers::pi / 4})) < 1e-15);
  CHECK(n3(rhs_phys({0.0, -4.0 / 9, 0.0})) < 1e-15);
  CHECK_THROWS_AS(rhs_phys({0.3, 0.3, 0.1}), DomainError);

  SECTION("push-forward of the short-time field") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const ReducedState s{u(rng), u(rng), u(rng)};
      if (std::abs(s.x - s.y) < 0.05) continue;
      const PhysState p = xyz_to_phys(s);
      const PhysState dp = rhs_phys(p);
      const double h = 1e-6;
      auto step = [&](double sign) {
        return phys_to_xyz({p.S1 + sign * h * dp.S1, p.S2 + sign * h * dp.S2, p.theta + sign * h * dp.theta});
      };
      const ReducedState plus = step(1), minus = step(-1);
      const ReducedState f = rhs_shorttime_coords(s);
      const Vec3 fd((plus.x - minus.x) / (2 * h), (plus.y - minus.y) / (2 * h), (plus.z - minus.z) / (2 * h));
      CHECK((fd - Vec3(f.x, f.y, f.z)).norm() < 1e-6 * std::max(1.0, Vec3(f.x, f.y, f.z).norm()));
    }
  }
}

TEST_CASE("legacy comparison model", "[dynamics]") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const QTensor q = random_tensor(rng, 1.0);
    CHECK(frobenius(rhs_legacy(q, 0.0, 1.7, kFig) + bulk_gradient(q, kFig)) < 1e-15);
    CHECK(frobenius(rhs_legacy(q, 1.0, 0.0, kFig) - rhs_corotational(q, kFig)) < 1e-15);
  }
  CHECK(dist(rhs_legacy(QTensor::zero(), 1.0, 2.0, kFig), QTensor::from_matrix(2.0 * shear_matrices().D)) < 1e-15);
}

TEST_CASE("jacobians", "[dynamics]") {
  Eigen::Matrix3d e3;
  e3 << -2, 0, 0, 0, -2, 0, 1, 1, -4;
  const Eigen::MatrixXd j3 = jacobian(SystemKind::shorttime3d(), to_vec(ReducedState{1.0 / 6, 1.0 / 6, 0.5}), kFig);
  CHECK((j3 - e3).norm() < 1e-14);

  const Eigen::MatrixXd j2 = jacobian(SystemKind::shorttime3d(), to_vec(ReducedState{1.0 / 6, 1.0 / 6, -0.5}), kFig);
  Eigen::VectorXd ev = j2.eigenvalues().real();
  std::sort(ev.begin(), ev.end());
  CHECK((ev - Eigen::Vector3d(2, 2, 4)).norm() < 1e-12);

  const Eigen::MatrixXd jg = jacobian(SystemKind::gradient_flow(), to_vec(QTensor::zero()), kFig);
  CHECK((jg + kFig.a() * Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-9);

  SECTION("analytic Jacobians agree with finite differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const StateVec s = to_vec(ReducedState{u(rng), u(rng), u(rng)});
      const Eigen::MatrixXd fd = numeric_jacobian(vector_field(SystemKind::shorttime3d(), kFig), s);
      CHECK((jacobian(SystemKind::shorttime3d(), s, kFig) - fd).norm() < 1e-8);
      const double h = u(rng);
      StateVec p(2);
      p << u(rng), u(rng);
      const SystemKind k = SystemKind::plane_h(h);
      CHECK((jacobian(k, p, kFig) - numeric_jacobian(vector_field(k, kFig), p)).norm() < 1e-8);
    }
  }

  CHECK_THROWS_AS(jacobian(SystemKind::full(), to_vec(ReducedState{}), kFig), ConfigError);
  CHECK_THROWS_AS(jacobian(SystemKind::phys(), to_vec(PhysState{0.5, 0.5, 0.0}), kFig), DomainError);
}

TEST_CASE("system kinds", "[dynamics]") {
  using T = SystemKind::Tag;
  for (T tag : {T::Full, T::Corotational, T::GradientFlow, T::EigenPair, T::Reduced3D, T::Rescaled,
                T::ShortTimeMatrix, T::ShortTime3D, T::PlaneH, T::Phys, T::Legacy}) {
    CHECK(parse_system_name(system_name(tag)) == tag);
  }
  CHECK_THROWS_AS(parse_system_name("nonsense"), ConfigError);
  CHECK(SystemKind::full().dimension() == 5);
  CHECK(SystemKind::eigen_pair().dimension() == 2);
  CHECK(SystemKind::plane_h(0.1).dimension() == 2);
  CHECK(SystemKind::phys().dimension() == 3);
  CHECK(SystemKind::legacy(1.0, 2.0).dimension() == 5);
  CHECK_THROWS_AS(vector_field(SystemKind::rescaled(), kFig), ConfigError);
}
