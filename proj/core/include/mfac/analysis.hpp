#pragma once

#include <complex>
#include <vector>

#include "mfac/controller.hpp"
#include "mfac/edlm.hpp"
#include "mfac/poly.hpp"

namespace mfac {

struct StabilityReport {
  /// Roots of z^d · det T(z⁻¹) in the z variable.
  std::vector<std::complex<double>> characteristic_roots;
  bool stable = true;
  /// 1 − max|root|; 1 when there are no roots.
  double margin = 1.0;
};

/// Roots inside this radius count as stable; the unit circle itself does not.
inline constexpr double kStabilityTolerance = 1e-9;

/**
 * @brief Instantaneous closed-loop matrix of a frozen PJM under the MFAC law.
 *
 * T = (1 − z⁻¹) λ [I − z⁻¹ φ_Ly(z⁻¹)] + φ_Lu(z⁻¹) Φ_{Ly+1}ᵀ with
 * φ_Ly(z⁻¹) = Σ Φ_i z^{-(i-1)} over output blocks and φ_Lu likewise over input
 * blocks. Requires My == Mu; throws ShapeError otherwise.
 */
PolyMatrix closed_loop_matrix(const PseudoJacobian& pjm, const Weighting& weighting);

/// φ_Ly(z⁻¹) (My x My); zero when Ly = 0.
PolyMatrix output_polynomial(const PseudoJacobian& pjm);
/// φ_Lu(z⁻¹) (My x Mu).
PolyMatrix input_polynomial(const PseudoJacobian& pjm);

/// Exact cofactor expansion up to 8x8, evaluation/interpolation beyond.
Poly determinant(const PolyMatrix& pm);

/// Evaluates det at roots of unity and interpolates back; exposed for testing.
Poly determinant_by_interpolation(const PolyMatrix& pm);

/// Roots of c0 z^d + c1 z^(d-1) + … + cd via companion-matrix eigenvalues.
std::vector<std::complex<double>> roots_in_z(const Poly& p);

StabilityReport stability_check(const PolyMatrix& pm);

/// Limit of the unit-ramp tracking error, T(1)⁻¹ λ [I − φ_Ly(1)] · 1 · Ts.
Vector ramp_static_error(const PseudoJacobian& pjm, const Weighting& weighting,
                         double sample_period);

/// Limit of the unit-step tracking error, (I − T(1)⁻¹ φ_Lu(1) Φ_{Ly+1}ᵀ) · 1.
Vector step_static_error(const PseudoJacobian& pjm, const Weighting& weighting);

}  // namespace mfac
