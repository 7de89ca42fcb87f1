#pragma once

// Unit conventions: energies and frequencies are E/hbar in rad/ns ("rad GHz"),
// times in ns, photon fluxes in photons/ns, inductances in nH, capacitances in fF.

namespace ringcirc::units {

inline constexpr double hbar = 1.054571817e-34;             // J s
inline constexpr double planck = 6.62607015e-34;            // J s
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);
inline constexpr double cooper_pair_charge = 2.0 * elementary_charge;

inline constexpr double nano_henry = 1e-9;
inline constexpr double femto_farad = 1e-15;
inline constexpr double per_ns = 1e9; // s^-1 per ns^-1

/// 10 log10(x); -inf at 0.
double to_db(double ratio);
double from_db(double db);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Photon flux (photons/ns) carrying `dbm` at angular frequency `omega` (rad/ns),
/// with P = hbar * omega * flux.
double dbm_to_flux(double dbm, double omega);
double flux_to_dbm(double flux, double omega);

inline double flux_per_second(double flux_per_ns) { return flux_per_ns * per_ns; }

} // namespace ringcirc::units
