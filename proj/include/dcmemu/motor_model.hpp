#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

#include "dcmemu/errors.hpp"

namespace dcmemu {

/// Physical constants of the machine. Electrical: armature resistance and
/// inductance driven by the chopper voltage against the back-EMF Km*wm.
/// Mechanical: inertia driven by the torque Km*im against the resistant
/// torque k1*wm^2*sign(wm) + k2*wm + k3*sign(wm).
struct MachineParameters {
    double rm_ohm = 0.0;  ///< armature resistance [ohm]
    double lm_h = 0.0;    ///< armature inductance [H]
    double j_kgm2 = 0.0;  ///< rotor inertia [kg.m^2]
    double km = 0.0;      ///< torque / back-EMF constant [N.m/A == V.s/rad]
    double k1 = 0.0;      ///< quadratic friction coefficient
    double k2 = 0.0;      ///< viscous friction coefficient
    double k3 = 0.0;      ///< dry friction torque
    double vin_v = 0.0;   ///< chopper supply voltage [V]

    void validate() const;

    friend bool operator==(const MachineParameters&, const MachineParameters&) = default;
};

/// Constants of the fixed-step update
///   im' = a_c*im + b_c*wm + g_c*vh
///   wm' = l_c*im + m_c*wm + n_c*sign(wm)
/// All six are dimensioned so that one application advances the plant by one
/// step of `step_ns`. Both right-hand sides read the pre-step state.
struct PlantCoefficients {
    double a_c = 1.0;
    double b_c = 0.0;
    double g_c = 0.0;
    double l_c = 0.0;
    double m_c = 1.0;
    double n_c = 0.0;
    double vin_v = 0.0;        ///< supply voltage the coefficients assume [V]
    std::int64_t step_ns = 0;  ///< step size the coefficients assume [ns]

    double step_seconds() const { return static_cast<double>(step_ns) * 1e-9; }
    void validate() const;

    friend bool operator==(const PlantCoefficients&, const PlantCoefficients&) = default;
};

/// Machine current and rotation speed at one simulation tick.
struct PlantState {
    double im_a = 0.0;
    double wm_rad_s = 0.0;
};

struct Derivatives {
    double dim_dt_a_s = 0.0;
    double dwm_dt_rad_s2 = 0.0;
};

/// Shipped reference coefficient set (60 V supply, 1 us step).
PlantCoefficients default_coefficients();

/// Machine constants reconstructed by inverting the forward-Euler coefficient
/// formulas against default_coefficients() at its 1 us step. Frictionless.
MachineParameters default_parameters();

/// -1, 0 or +1. Zero maps to zero so that rest is an equilibrium.
inline double sign(double x) {
    if (!std::isfinite(x)) {
        throw std::domain_error("sign: non-finite input");
    }
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

/// Mean chopper output for a duty command: (2*duty - 1) * vin.
inline double chopper_voltage(double duty, double vin_v) {
    if (!std::isfinite(duty) || duty < 0.0 || duty > 1.0) {
        throw std::domain_error("chopper_voltage: duty outside [0, 1]");
    }
    if (!std::isfinite(vin_v) || vin_v <= 0.0) {
        throw std::domain_error("chopper_voltage: vin must be positive");
    }
    return (2.0 * duty - 1.0) * vin_v;
}

/// Continuous-time state derivatives at (s, vh).
Derivatives continuous_derivatives(const MachineParameters& p, const PlantState& s, double vh_v);

/// One fixed-step update. Jacobi form: both outputs are computed from the
/// incoming state, never from each other's fresh value.
inline PlantState discrete_step(const PlantCoefficients& c, const PlantState& s, double vh_v) {
    PlantState next;
    next.im_a = c.a_c * s.im_a + c.b_c * s.wm_rad_s + c.g_c * vh_v;
    next.wm_rad_s = c.l_c * s.im_a + c.m_c * s.wm_rad_s + c.n_c * sign(s.wm_rad_s);
    if (!std::isfinite(next.im_a) || !std::isfinite(next.wm_rad_s)) {
        throw numeric_overflow_error("discrete_step: state became non-finite");
    }
    return next;
}

/// Forward-Euler coefficients for a step of `step_ns`. Quadratic friction has
/// no slot in the linear update form, so k1 must be zero; dry friction maps
/// onto the n_c*sign(wm) term.
PlantCoefficients derive_coefficients_euler(const MachineParameters& p, std::int64_t step_ns);

/// Second-order Runge-Kutta coefficients: with A the continuous state matrix
/// and B the input vector, the update matrix is I + hA + h^2 A^2/2 and the
/// input gain is (hI + h^2 A/2) B. The speed-row input term (O(h^2)) has no
/// coefficient slot in the update form and is omitted; n_c is first-order as
/// in the Euler variant.
PlantCoefficients derive_coefficients_rk2(const MachineParameters& p, std::int64_t step_ns);

/// Fixed point of discrete_step at a constant vh, found by solving the linear
/// system per sign(wm) hypothesis and keeping the self-consistent one.
PlantState steady_state(const PlantCoefficients& c, double vh_v);

/// Continuous state matrix d/dt [im, wm]^T = A [im, wm]^T + B vh of the
/// linearized machine (k1 = k3 = 0).
Eigen::Matrix2d state_matrix(const MachineParameters& p);
Eigen::Vector2d input_vector(const MachineParameters& p);

/// The linear part of discrete_step as a matrix pencil: x' = M x + G vh.
Eigen::Matrix2d update_matrix(const PlantCoefficients& c);
Eigen::Vector2d input_gain(const PlantCoefficients& c);

} // namespace dcmemu
