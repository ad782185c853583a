#include <cmath>

#include <gtest/gtest.h>

#include "thermoforge/interior_point.hpp"

using thermoforge::nlp::IpmStatus;
using thermoforge::nlp::NlpProblem;
using Eigen::VectorXd;

namespace {

// Hock-Schittkowski problem 71.
class Hs071 : public NlpProblem {
 public:
  int num_variables() const override { return 4; }
  int num_constraints() const override { return 2; }
  void bounds(VectorXd& xl, VectorXd& xu, VectorXd& gl, VectorXd& gu) const override {
    xl.setConstant(1.0);
    xu.setConstant(5.0);
    gl << 25.0, 40.0;
    gu << 2e19, 40.0;
  }
  double objective(const VectorXd& x) const override { return x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]; }
  void gradient(const VectorXd& x, VectorXd& g) const override {
    g[0] = x[3] * (2 * x[0] + x[1] + x[2]);
    g[1] = x[0] * x[3];
    g[2] = x[0] * x[3] + 1;
    g[3] = x[0] * (x[0] + x[1] + x[2]);
  }
  void constraints(const VectorXd& x, VectorXd& g) const override {
    g[0] = x[0] * x[1] * x[2] * x[3];
    g[1] = x.squaredNorm();
  }
  Coordinates jacobian_structure() const override {
    Coordinates c;
    for (int r = 0; r < 2; ++r)
      for (int j = 0; j < 4; ++j) c.emplace_back(r, j);
    return c;
  }
  void jacobian_values(const VectorXd& x, VectorXd& v) const override {
    v << x[1] * x[2] * x[3], x[0] * x[2] * x[3], x[0] * x[1] * x[3], x[0] * x[1] * x[2], 2 * x[0], 2 * x[1],
        2 * x[2], 2 * x[3];
  }
  Coordinates hessian_structure() const override {
    Coordinates c;
    for (int r = 0; r < 4; ++r)
      for (int j = 0; j <= r; ++j) c.emplace_back(r, j);
    return c;
  }
  void hessian_values(const VectorXd& x, double s, const VectorXd& l, VectorXd& v) const override {
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
    h(0, 0) = s * 2 * x[3];
    h(1, 0) = s * x[3];
    h(2, 0) = s * x[3];
    h(3, 0) = s * (2 * x[0] + x[1] + x[2]);
    h(3, 1) = s * x[0];
    h(3, 2) = s * x[0];
    h(1, 0) += l[0] * x[2] * x[3];
    h(2, 0) += l[0] * x[1] * x[3];
    h(3, 0) += l[0] * x[1] * x[2];
    h(2, 1) += l[0] * x[0] * x[3];
    h(3, 1) += l[0] * x[0] * x[2];
    h(3, 2) += l[0] * x[0] * x[1];
    for (int i = 0; i < 4; ++i) h(i, i) += 2 * l[1];
    int k = 0;
    for (int r = 0; r < 4; ++r)
      for (int j = 0; j <= r; ++j) v[k++] = h(r, j);
  }
};

// min sum (x_i - t_i)^2 on the box [0, 1]; solution is the clamp of t.
class BoxQp : public NlpProblem {
 public:
  explicit BoxQp(VectorXd t) : t_(std::move(t)) {}
  int num_variables() const override { return static_cast<int>(t_.size()); }
  int num_constraints() const override { return 0; }
  void bounds(VectorXd& xl, VectorXd& xu, VectorXd&, VectorXd&) const override {
    xl.setZero();
    xu.setOnes();
  }
  double objective(const VectorXd& x) const override { return (x - t_).squaredNorm(); }
  void gradient(const VectorXd& x, VectorXd& g) const override { g = 2 * (x - t_); }
  void constraints(const VectorXd&, VectorXd&) const override {}
  Coordinates jacobian_structure() const override { return {}; }
  void jacobian_values(const VectorXd&, VectorXd&) const override {}
  Coordinates hessian_structure() const override {
    Coordinates c;
    for (int i = 0; i < num_variables(); ++i) c.emplace_back(i, i);
    return c;
  }
  void hessian_values(const VectorXd&, double s, const VectorXd&, VectorXd& v) const override {
    v.setConstant(2 * s);
  }

 private:
  VectorXd t_;
};

// Nonconvex: min -x0*x1 on the unit disc, x >= 0. Optimum at x = (1/sqrt2, 1/sqrt2).
class DiscProduct : public NlpProblem {
 public:
  int num_variables() const override { return 2; }
  int num_constraints() const override { return 1; }
  void bounds(VectorXd& xl, VectorXd& xu, VectorXd& gl, VectorXd& gu) const override {
    xl.setZero();
    xu.setConstant(1e20);
    gl[0] = -1e20;
    gu[0] = 1.0;
  }
  double objective(const VectorXd& x) const override { return -x[0] * x[1]; }
  void gradient(const VectorXd& x, VectorXd& g) const override { g << -x[1], -x[0]; }
  void constraints(const VectorXd& x, VectorXd& g) const override { g[0] = x.squaredNorm(); }
  Coordinates jacobian_structure() const override { return {{0, 0}, {0, 1}}; }
  void jacobian_values(const VectorXd& x, VectorXd& v) const override { v << 2 * x[0], 2 * x[1]; }
  Coordinates hessian_structure() const override { return {{0, 0}, {1, 0}, {1, 1}}; }
  void hessian_values(const VectorXd&, double s, const VectorXd& l, VectorXd& v) const override {
    v << 2 * l[0], -s, 2 * l[0];
  }
};

}  // namespace

TEST(InteriorPoint, Hs071KnownOptimum) {
  Hs071 p;
  VectorXd x0(4);
  x0 << 1, 5, 5, 1;
  const auto r = thermoforge::nlp::minimize(p, x0);
  ASSERT_EQ(r.status, IpmStatus::kSolved) << r.message;
  EXPECT_NEAR(r.objective, 17.014017145179164, 1e-6);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 4.742999637, 1e-5);
  EXPECT_NEAR(r.x[2], 3.821149984, 1e-5);
  EXPECT_NEAR(r.x[3], 1.379408293, 1e-5);
  EXPECT_LE(r.constraint_violation, 1e-6);
}

TEST(InteriorPoint, BoxQpMatchesClamp) {
  VectorXd t(6);
  t << -0.5, 0.2, 0.7, 1.3, -0.1, 2.0;
  BoxQp p(t);
  const auto r = thermoforge::nlp::minimize(p, VectorXd::Constant(6, 0.5));
  ASSERT_TRUE(r.converged()) << r.message;
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(r.x[i], std::clamp(t[i], 0.0, 1.0), 1e-6);
}

TEST(InteriorPoint, NonconvexObjectiveUsesInertiaCorrection) {
  DiscProduct p;
  VectorXd x0(2);
  x0 << 0.1, 0.9;
  const auto r = thermoforge::nlp::minimize(p, x0);
  ASSERT_TRUE(r.converged()) << r.message;
  EXPECT_NEAR(r.x[0], std::sqrt(0.5), 1e-5);
  EXPECT_NEAR(r.x[1], std::sqrt(0.5), 1e-5);
  EXPECT_NEAR(r.lambda[0], 0.5, 1e-5);
}
