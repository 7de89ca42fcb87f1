#include "ringcirc/units.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ringcirc::units {

double to_db(double ratio)
{
    if (ratio < 0.0) {
        throw std::domain_error("to_db: negative flux ratio");
    }
    if (ratio == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(ratio);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

double dbm_to_flux(double dbm, double omega)
{
    const double photon_energy = hbar * omega * per_ns;
    return dbm_to_watts(dbm) / photon_energy / per_ns;
}

double flux_to_dbm(double flux, double omega)
{
    const double photon_energy = hbar * omega * per_ns;
    return watts_to_dbm(flux * per_ns * photon_energy);
}

} // namespace ringcirc::units
