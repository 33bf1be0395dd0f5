#include "depletion/units.hpp"

#include "depletion/errors.hpp"

#include <string>

namespace depletion::units {

double energy_to_ej(std::string_view unit) {
    if (unit == "EJ") return 1.0;
    if (unit == "PJ") return 1e-3;
    if (unit == "Mtoe") return 0.041868;
    if (unit == "Gboe") return kGigajoulesPerBoe;  // 1e9 boe * GJ/boe = EJ
    if (unit == "TWh") return 0.0036;
    throw ValidationError("unknown energy unit '" + std::string(unit) + "'");
}

double rate_to_ej_per_year(std::string_view unit) {
    constexpr std::string_view suffix = "/y";
    if (unit.size() <= suffix.size() || unit.substr(unit.size() - suffix.size()) != suffix)
        throw ValidationError("rate unit '" + std::string(unit) + "' must end in /y");
    return energy_to_ej(unit.substr(0, unit.size() - suffix.size()));
}

double price_to_usd_per_gj(std::string_view unit) {
    if (unit == "$/GJ") return 1.0;
    if (unit == "$/boe") return 1.0 / kGigajoulesPerBoe;
    if (unit == "$/MWh") return 1.0 / 3.6;
    throw ValidationError("unknown price unit '" + std::string(unit) + "'");
}

}  // namespace depletion::units
