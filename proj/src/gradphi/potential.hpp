#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gradphi {

// Analytic fast paths are keyed on this tag; kPower and kNone always go
// through tabulated quadrature.
enum class ClosedForm { kGaussian, kSos, kPower, kNone };

// A convex, non-affine, polynomially bounded single-increment energy V.
// Immutable; copies share the knot table.
class Potential {
 public:
  static Potential gaussian();
  static Potential sos();
  static Potential power(double p);
  // Linear interpolation between knots, extended by the boundary slopes.
  // No validation happens here; see make_potential.
  static Potential table(std::vector<double> u, std::vector<double> v, std::string name = "table");

  double operator()(double u) const noexcept {
    switch (kind_) {
      case ClosedForm::kGaussian:
        return 0.5 * u * u;
      case ClosedForm::kSos:
        return u < 0.0 ? -u : u;
      case ClosedForm::kPower:
        return eval_power(u < 0.0 ? -u : u);
      case ClosedForm::kNone:
        break;
    }
    return eval_table(u);
  }

  // W_a(u) = V(a+u) + V(a-u) - 2V(a): the centered resampling energy.
  double resampling(double a, double u) const noexcept { return (*this)(a + u) + (*this)(a - u) - 2.0 * (*this)(a); }

  const std::string& name() const noexcept { return name_; }
  ClosedForm closed_form() const noexcept { return kind_; }
  double exponent() const noexcept { return exponent_; }
  int growth_exponent_hint() const noexcept { return growth_hint_; }
  // Points where V fails to be smooth (the origin for |u|^p, the knots of a table).
  std::span<const double> kinks() const noexcept { return kinks_; }
  // Exact asymptotic slopes V'_- and V'_+ (infinite for superlinear growth).
  double slope_minus() const noexcept { return slope_minus_; }
  double slope_plus() const noexcept { return slope_plus_; }

 private:
  struct Table {
    std::vector<double> u;
    std::vector<double> v;
  };

  Potential() = default;
  double eval_power(double r) const noexcept;
  double eval_table(double u) const noexcept;

  ClosedForm kind_ = ClosedForm::kNone;
  std::string name_;
  double exponent_ = 0.0;
  int growth_hint_ = 1;
  std::vector<double> kinks_;
  double slope_minus_ = 0.0;
  double slope_plus_ = 0.0;
  std::shared_ptr<const Table> table_;
};

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<double> witness;  // points exhibiting the failure, empty on success
};

struct PotentialReport {
  AssumptionCheck convexity;
  AssumptionCheck polynomial_growth;
  AssumptionCheck non_affine;
  double fitted_growth_constant = 0.0;
  bool all_passed() const { return convexity.passed && polynomial_growth.passed && non_affine.passed; }
};

inline constexpr double kNonAffineRadius = 1e3;
inline constexpr double kNonAffineThreshold = 1e-8;
inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr double kDefaultTiltTol = 1e-10;

// Checks convexity, polynomial growth and non-affinity on a test grid.
PotentialReport verify_potential(const Potential& pot);

// Parses "gaussian" | "sos" | "power:p" | "table:path" and rejects potentials
// that fail any assumption (kInvalidPotential, report in the message).
Potential make_potential(std::string_view spec);
Potential load_table_potential(const std::string& path);
std::string describe(const PotentialReport& report);

// Z(a) = integral of exp(-W_a); adaptive Simpson on a window grown until the
// convex tail bound falls under tail_tol.
double partition(const Potential& pot, double a, double tail_tol = kDefaultTailTol);

// Symmetric window [-L, L] outside which exp(-W_a) carries at most
// tail_tol relative mass. Throws kQuadratureFailure for near-affine potentials.
double resampling_window(const Potential& pot, double a, double tail_tol);

struct TiltedFamily {
  Potential base;
  double lambda = 0.0;
  double mean = 0.0;
};

// Mean of the density proportional to exp(-V(u) + lambda u).
double tilted_mean(const Potential& pot, double lambda);
// Solves tilted_mean(lambda) = m by monotone bisection inside (V'_-, V'_+).
TiltedFamily tilt_solve(const Potential& pot, double m, double tol = kDefaultTiltTol);

}  // namespace gradphi
