#include "dcmemu/motor_model.hpp"

#include <string>

namespace dcmemu {

namespace {

// Reference coefficient set for the 60 V machine at a 1 us step.
constexpr double kRefA = 0.9995;
constexpr double kRefB = -9.1977e-5;
constexpr double kRefG = 4.9987e-4;
constexpr double kRefL = 1.4603e-4;
constexpr double kRefM = 1.0;
constexpr double kRefN = 0.0;
constexpr double kRefVin = 60.0;
constexpr std::int64_t kRefStepNs = 1000;

} // namespace

void MachineParameters::validate() const {
    if (!(lm_h > 0.0)) throw validation_error("MachineParameters: lm_h must be > 0");
    if (!(j_kgm2 > 0.0)) throw validation_error("MachineParameters: j_kgm2 must be > 0");
    if (!(rm_ohm >= 0.0)) throw validation_error("MachineParameters: rm_ohm must be >= 0");
    if (!(km >= 0.0)) throw validation_error("MachineParameters: km must be >= 0");
    if (!(k1 >= 0.0) || !(k2 >= 0.0) || !(k3 >= 0.0)) {
        throw validation_error("MachineParameters: friction coefficients must be >= 0");
    }
    if (!(vin_v > 0.0)) throw validation_error("MachineParameters: vin_v must be > 0");
}

void PlantCoefficients::validate() const {
    if (step_ns <= 0) throw validation_error("PlantCoefficients: step_ns must be > 0");
    if (!(a_c > 0.0 && a_c <= 1.0)) {
        throw validation_error("PlantCoefficients: a_c must be in (0, 1]");
    }
    if (!(m_c > 0.0 && m_c <= 1.0)) {
        throw validation_error("PlantCoefficients: m_c must be in (0, 1]");
    }
    if (!(vin_v > 0.0)) throw validation_error("PlantCoefficients: vin_v must be > 0");
    for (double v : {a_c, b_c, g_c, l_c, m_c, n_c}) {
        if (!std::isfinite(v)) throw validation_error("PlantCoefficients: non-finite coefficient");
    }
}

PlantCoefficients default_coefficients() {
    PlantCoefficients c;
    c.a_c = kRefA;
    c.b_c = kRefB;
    c.g_c = kRefG;
    c.l_c = kRefL;
    c.m_c = kRefM;
    c.n_c = kRefN;
    c.vin_v = kRefVin;
    c.step_ns = kRefStepNs;
    return c;
}

MachineParameters default_parameters() {
    // Inversion of the Euler formulas at the reference step h = 1 us:
    //   lm = h/g, rm = (1-a)*lm/h, km = -b*lm/h, j = h*km/l.
    // m = 1 and n = 0 leave no viscous, dry or quadratic friction.
    const double h = static_cast<double>(kRefStepNs) * 1e-9;
    MachineParameters p;
    p.lm_h = h / kRefG;
    p.rm_ohm = (1.0 - kRefA) * p.lm_h / h;
    p.km = -kRefB * p.lm_h / h;
    p.j_kgm2 = h * p.km / kRefL;
    p.k1 = 0.0;
    p.k2 = 0.0;
    p.k3 = 0.0;
    p.vin_v = kRefVin;
    return p;
}

Derivatives continuous_derivatives(const MachineParameters& p, const PlantState& s, double vh_v) {
    const double em = p.km * s.wm_rad_s;
    const double cem = p.km * s.im_a;
    const double cr = p.k1 * s.wm_rad_s * s.wm_rad_s * sign(s.wm_rad_s) + p.k2 * s.wm_rad_s +
                      p.k3 * sign(s.wm_rad_s);
    Derivatives d;
    d.dim_dt_a_s = (vh_v - em - p.rm_ohm * s.im_a) / p.lm_h;
    d.dwm_dt_rad_s2 = (cem - cr) / p.j_kgm2;
    return d;
}

Eigen::Matrix2d state_matrix(const MachineParameters& p) {
    Eigen::Matrix2d a;
    a << -p.rm_ohm / p.lm_h, -p.km / p.lm_h,
          p.km / p.j_kgm2,   -p.k2 / p.j_kgm2;
    return a;
}

Eigen::Vector2d input_vector(const MachineParameters& p) {
    return Eigen::Vector2d(1.0 / p.lm_h, 0.0);
}

Eigen::Matrix2d update_matrix(const PlantCoefficients& c) {
    Eigen::Matrix2d m;
    m << c.a_c, c.b_c,
         c.l_c, c.m_c;
    return m;
}

Eigen::Vector2d input_gain(const PlantCoefficients& c) {
    return Eigen::Vector2d(c.g_c, 0.0);
}

namespace {

PlantCoefficients pack_coefficients(const MachineParameters& p, std::int64_t step_ns,
                                    const Eigen::Matrix2d& m, const Eigen::Vector2d& g) {
    const double h = static_cast<double>(step_ns) * 1e-9;
    PlantCoefficients c;
    c.a_c = m(0, 0);
    c.b_c = m(0, 1);
    c.g_c = g(0);
    c.l_c = m(1, 0);
    c.m_c = m(1, 1);
    c.n_c = -h * p.k3 / p.j_kgm2;
    c.vin_v = p.vin_v;
    c.step_ns = step_ns;
    if (c.a_c <= 0.0 || c.m_c <= 0.0) {
        throw validation_error("derive_coefficients: step too large, discretization unstable (a_c=" +
                               std::to_string(c.a_c) + ", m_c=" + std::to_string(c.m_c) + ")");
    }
    return c;
}

void check_derivable(const MachineParameters& p, std::int64_t step_ns) {
    p.validate();
    if (step_ns <= 0) throw validation_error("derive_coefficients: step_ns must be > 0");
    if (p.k1 != 0.0) {
        throw validation_error(
            "derive_coefficients: quadratic friction (k1) has no linear coefficient form");
    }
}

} // namespace

PlantCoefficients derive_coefficients_euler(const MachineParameters& p, std::int64_t step_ns) {
    check_derivable(p, step_ns);
    const double h = static_cast<double>(step_ns) * 1e-9;
    const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() + h * state_matrix(p);
    const Eigen::Vector2d g = h * input_vector(p);
    return pack_coefficients(p, step_ns, m, g);
}

PlantCoefficients derive_coefficients_rk2(const MachineParameters& p, std::int64_t step_ns) {
    check_derivable(p, step_ns);
    const double h = static_cast<double>(step_ns) * 1e-9;
    const Eigen::Matrix2d a = state_matrix(p);
    const Eigen::Matrix2d m =
        Eigen::Matrix2d::Identity() + h * a + (0.5 * h * h) * (a * a);
    const Eigen::Vector2d g =
        (h * Eigen::Matrix2d::Identity() + (0.5 * h * h) * a) * input_vector(p);
    return pack_coefficients(p, step_ns, m, g);
}

PlantState steady_state(const PlantCoefficients& c, double vh_v) {
    if (!std::isfinite(vh_v)) throw std::domain_error("steady_state: non-finite vh");
    const Eigen::Matrix2d system = Eigen::Matrix2d::Identity() - update_matrix(c);
    const auto lu = system.fullPivLu();
    if (!lu.isInvertible()) {
        throw validation_error("steady_state: singular fixed-point system, no steady state");
    }
    // The sign(wm) term makes the system piecewise linear: solve once per
    // sign hypothesis and keep the solution that confirms its hypothesis.
    for (double hyp : {0.0, 1.0, -1.0}) {
        const Eigen::Vector2d rhs(c.g_c * vh_v, c.n_c * hyp);
        const Eigen::Vector2d x = lu.solve(rhs);
        const bool consistent = (hyp == 0.0) ? (x(1) == 0.0) : (sign(x(1)) == hyp);
        if (consistent) {
            return PlantState{x(0), x(1)};
        }
    }
    throw validation_error("steady_state: no sign-consistent fixed point");
}

} // namespace dcmemu
