#include "lodll/coefficients.hpp"

#include <cmath>
#include <numbers>

#include "lodll/error.hpp"

namespace lodll {

namespace {
constexpr double kPi = std::numbers::pi;

double p(double s) { return s * s * (1.0 - s) * (1.0 - s); }
double dp(double s) { return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }
double d2p(double s) { return 2.0 - 12.0 * s + 12.0 * s * s; }
}  // namespace

std::string to_string(CoefficientFamily f) {
  switch (f) {
    case CoefficientFamily::constant: return "constant";
    case CoefficientFamily::quasi_periodic: return "quasi_periodic";
    case CoefficientFamily::locally_periodic: return "locally_periodic";
    case CoefficientFamily::rough_int: return "rough_int";
  }
  return "constant";
}

CoefficientFamily parse_coefficient_family(const std::string& name) {
  if (name == "constant") return CoefficientFamily::constant;
  if (name == "quasi_periodic") return CoefficientFamily::quasi_periodic;
  if (name == "locally_periodic") return CoefficientFamily::locally_periodic;
  if (name == "rough_int") return CoefficientFamily::rough_int;
  fail(ErrorKind::config, "unknown coefficient family '" + name + "'");
}

double CoefficientField::operator()(double x, double y) const {
  switch (family) {
    case CoefficientFamily::constant:
      return scale;
    case CoefficientFamily::quasi_periodic: {
      const double fx = 1.0 + 0.25 * std::sin(2.0 * kPi * x / epsilon);
      const double fy = 1.0 + 0.25 * std::sin(2.0 * kPi * y / epsilon) +
                        0.25 * std::sin(2.0 * std::numbers::sqrt2 * kPi * y / epsilon);
      return scale * fx * fy;
    }
    case CoefficientFamily::locally_periodic:
      return scale * 0.25 *
             std::exp(-std::cos(2.0 * kPi * (x + y) / epsilon) +
                      std::sin(2.0 * kPi * x / epsilon) * std::cos(2.0 * kPi * y));
    case CoefficientFamily::rough_int:
      return scale * std::floor(5.0 + 2.0 * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y));
  }
  return scale;
}

double eval_coefficient(const CoefficientField& field, double x, double y) { return field(x, y); }

Vec3 initial_bump_raw(double x, double y) {
  const auto c = [](double s) { return std::cos(2.0 * kPi * s); };
  return {0.6 + std::exp(-0.3 * (c(x - 0.25) + c(y - 0.12))),
          0.5 + std::exp(-0.4 * (c(x) + c(y - 0.4))),
          0.4 + std::exp(-0.2 * (c(x - 0.81) + c(y - 0.73)))};
}

Vec3 initial_bump(double x, double y) {
  const Vec3 m = initial_bump_raw(x, y);
  return m / m.norm();
}

double ExactSolution::g(double x, double y) { return p(x) * p(y); }

Eigen::Vector2d ExactSolution::grad_g(double x, double y) {
  return {dp(x) * p(y), p(x) * dp(y)};
}

double ExactSolution::laplacian_g(double x, double y) { return d2p(x) * p(y) + p(x) * d2p(y); }

Vec3 ExactSolution::value(double x, double y, double t) const {
  const double gv = g(x, y);
  return {std::cos(gv) * std::sin(t), std::sin(gv) * std::sin(t), std::cos(t)};
}

Vec3 ExactSolution::time_derivative(double x, double y, double t) const {
  const double gv = g(x, y);
  return {std::cos(gv) * std::cos(t), std::sin(gv) * std::cos(t), -std::sin(t)};
}

Mat32 ExactSolution::gradient(double x, double y, double t) const {
  const double gv = g(x, y);
  const Eigen::Vector2d dg = grad_g(x, y);
  const double st = std::sin(t);
  Mat32 out;
  out.row(0) = -std::sin(gv) * st * dg.transpose();
  out.row(1) = std::cos(gv) * st * dg.transpose();
  out.row(2).setZero();
  return out;
}

Vec3 ExactSolution::laplacian(double x, double y, double t) const {
  const double gv = g(x, y);
  const double dg2 = grad_g(x, y).squaredNorm();
  const double lg = laplacian_g(x, y);
  const double st = std::sin(t);
  return {st * (-std::cos(gv) * dg2 - std::sin(gv) * lg),
          st * (-std::sin(gv) * dg2 + std::cos(gv) * lg), 0.0};
}

ExactSolution exact_solution_example1() { return {}; }

Vec3 forcing_example1(double alpha, double x, double y, double t) {
  const ExactSolution m;
  const Vec3 v = m.value(x, y, t);
  const Vec3 lap = m.laplacian(x, y, t);
  const double grad2 = m.gradient(x, y, t).squaredNorm();
  return m.time_derivative(x, y, t) - alpha * lap + v.cross(lap) - alpha * grad2 * v;
}

}  // namespace lodll
