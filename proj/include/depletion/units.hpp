#pragma once

// Conversions at the ingestion boundary. Internal units: EJ, EJ/y, $/GJ.
//   1 boe  = 6.1178632 GJ (5.8 MMBtu)
//   1 Mtoe = 0.041868 EJ
//   1 TWh  = 0.0036 EJ

#include <string_view>

namespace depletion::units {

inline constexpr double kGigajoulesPerBoe = 6.1178632;

/// Multiplier taking a quantity in `unit` to EJ. Accepts EJ, PJ, Mtoe, Gboe, TWh.
double energy_to_ej(std::string_view unit);

/// Multiplier taking a rate in `unit` to EJ/y (the energy units above with a "/y" suffix).
double rate_to_ej_per_year(std::string_view unit);

/// Multiplier taking a price in `unit` to $/GJ. Accepts $/GJ, $/boe, $/MWh.
double price_to_usd_per_gj(std::string_view unit);

}  // namespace depletion::units
