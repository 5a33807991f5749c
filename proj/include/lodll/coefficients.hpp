#pragma once

#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lodll {

using Vec3 = Eigen::Vector3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

enum class CoefficientFamily { constant, quasi_periodic, locally_periodic, rough_int };

std::string to_string(CoefficientFamily f);
CoefficientFamily parse_coefficient_family(const std::string& name);

/// Scalar material coefficient kappa(x, y).  `scale` multiplies every family.
struct CoefficientField {
  CoefficientFamily family = CoefficientFamily::constant;
  double epsilon = 1.0 / 32.0;
  double scale = 1.0;

  double operator()(double x, double y) const;

  static CoefficientField constant(double value = 1.0) {
    return {CoefficientFamily::constant, 1.0, value};
  }
  static CoefficientField quasi_periodic(double eps = 1.0 / 32.0) {
    return {CoefficientFamily::quasi_periodic, eps, 1.0};
  }
  static CoefficientField locally_periodic(double eps = 1.0 / 64.0) {
    return {CoefficientFamily::locally_periodic, eps, 1.0};
  }
  static CoefficientField rough_int() { return {CoefficientFamily::rough_int, 1.0, 1.0}; }
};

double eval_coefficient(const CoefficientField& field, double x, double y);

/// Unnormalized three-bump initial magnetization.
Vec3 initial_bump_raw(double x, double y);
/// initial_bump_raw / |initial_bump_raw|.
Vec3 initial_bump(double x, double y);

/// Smooth unit-length manufactured solution
///   m(x, y, t) = (cos g sin t, sin g sin t, cos t),  g = x^2(1-x)^2 y^2(1-y)^2.
class ExactSolution {
 public:
  Vec3 value(double x, double y, double t) const;
  Vec3 time_derivative(double x, double y, double t) const;
  /// Column k holds d/dx_k of the three components.
  Mat32 gradient(double x, double y, double t) const;
  Vec3 laplacian(double x, double y, double t) const;

  static double g(double x, double y);
  static Eigen::Vector2d grad_g(double x, double y);
  static double laplacian_g(double x, double y);
};

ExactSolution exact_solution_example1();

/// f = dm/dt - alpha Lap m + m x Lap m - alpha |grad m|^2 m for the
/// manufactured solution.
Vec3 forcing_example1(double alpha, double x, double y, double t);

}  // namespace lodll
