#pragma once

// Physical coefficients of the flow and heat models, derived from primitive
// fluid/rock/fracture data.

#include <cmath>
#include <string>

#include "dfnflow/geometry.hpp"

namespace dfn {

struct FluidProperties {
    double rho_w = 1000.0;   // density [kg/m^3]
    double mu = 1e-3;        // dynamic viscosity [Pa s]
    double c_w = 4186.0;     // specific heat [J/(kg K)]
    double lambda_w = 0.6;   // thermal conductivity [W/(m K)]
};

struct RockProperties {
    double rho_m = 2700.0;    // density [kg/m^3]
    double c_m = 790.0;       // specific heat [J/(kg K)]
    double lambda_m = 3.0;    // thermal conductivity [W/(m K)]
    double gamma_e = 0.0;     // fluid-rock heat transfer coefficient [W/(m^2 K)]
    double theta_hat = 0.0;   // rock temperature [K]
};

struct FractureProperties {
    double epsilon = 1e-3;  // aperture [m]
    double phi = 1.0;       // porosity, in (0, 1]
    double g = 9.81;        // gravity [m/s^2]
};

/// Coefficients entering the discrete operators. All derivable from the three
/// property blocks; benchmark runs may also set them directly.
struct DerivedCoefficients {
    double K = 1.0;        // hydraulic conductivity (aperture-integrated)
    double zeta = 1.0;     // heat capacity coefficient
    double D = 1.0;        // heat diffusion coefficient
    double iota = 0.0;     // fluid-rock exchange coefficient
    double c_e = 0.0;      // effective thermal capacity
    double lambda_e = 0.0; // effective thermal conductivity
};

namespace detail {
inline void require_positive(double v, const char* name) {
    if (!(v > 0.0)) throw Error(std::string(name) + " must be positive");
}
}  // namespace detail

/// Cubic-law hydraulic conductivity: k = eps^2/12, K = eps * k * rho_w * g / mu.
inline double hydraulic_conductivity(const FractureProperties& fp, const FluidProperties& fl) {
    detail::require_positive(fp.epsilon, "aperture");
    detail::require_positive(fl.rho_w, "fluid density");
    detail::require_positive(fl.mu, "viscosity");
    detail::require_positive(fp.g, "gravity");
    const double k = fp.epsilon * fp.epsilon / 12.0;
    return fp.epsilon * k * fl.rho_w * fp.g / fl.mu;
}

/// Effective heat coefficients:
///   c_e      = phi rho_w c_w + (1 - phi) rho_m c_m
///   lambda_e = lambda_w^phi * lambda_m^(1-phi)
///   zeta     = eps c_e / (rho_w c_w)
///   D        = eps lambda_e / (rho_w c_w)
///   iota     = gamma_e / (rho_w c_w)
inline DerivedCoefficients heat_coefficients(const FractureProperties& fp,
                                             const FluidProperties& fl,
                                             const RockProperties& rp) {
    detail::require_positive(fp.epsilon, "aperture");
    if (!(fp.phi > 0.0 && fp.phi <= 1.0)) throw Error("porosity must lie in (0,1]");
    detail::require_positive(fl.rho_w, "fluid density");
    detail::require_positive(fl.c_w, "fluid specific heat");
    detail::require_positive(fl.lambda_w, "fluid conductivity");
    detail::require_positive(rp.rho_m, "rock density");
    detail::require_positive(rp.c_m, "rock specific heat");
    detail::require_positive(rp.lambda_m, "rock conductivity");
    if (rp.gamma_e < 0.0) throw Error("heat transfer coefficient must be nonnegative");

    DerivedCoefficients dc;
    dc.K = hydraulic_conductivity(fp, fl);
    dc.c_e = fp.phi * fl.rho_w * fl.c_w + (1.0 - fp.phi) * rp.rho_m * rp.c_m;
    dc.lambda_e = std::pow(fl.lambda_w, fp.phi) * std::pow(rp.lambda_m, 1.0 - fp.phi);
    const double rc = fl.rho_w * fl.c_w;
    dc.zeta = fp.epsilon * dc.c_e / rc;
    dc.D = fp.epsilon * dc.lambda_e / rc;
    dc.iota = rp.gamma_e / rc;
    return dc;
}

}  // namespace dfn
