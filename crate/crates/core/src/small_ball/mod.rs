//! Small-ball rates from the spectral profile: `phi`, the periodic
//! functionals `eta`, `theta`, `zeta`, and the transform checks on `g1`.

pub mod fourier;
pub mod functional;
pub mod functions;
pub mod phi;

pub use fourier::{default_omegas, g1hat_check, g1hat_closed_form, g1hat_quadrature, FourierReport};
pub use functional::{eta_theta, u_of_r, zeta_curve, SmallBallCurve};
pub use functions::f_pair;
pub use phi::{phi_from_spectrum, PhiModel};
