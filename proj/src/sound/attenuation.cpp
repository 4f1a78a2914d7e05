#include "physgen/sound/attenuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "physgen/core/error.hpp"

namespace physgen::sound {

double geometric_spreading(double distance_m) {
  if (!(distance_m > 0.0)) throw DomainError("geometric_spreading: distance must be positive");
  return 20.0 * std::log10(distance_m) + 11.0;
}

double atmospheric_absorption(double distance_m, double alpha_air_db_per_km) {
  if (!(distance_m >= 0.0) || !(alpha_air_db_per_km >= 0.0))
    throw DomainError("atmospheric_absorption: negative input");
  return alpha_air_db_per_km * distance_m / 1000.0;
}

double diffraction_attenuation(double delta_m, double wavelength_m, double c_dprime) {
  if (!(wavelength_m > 0.0)) throw DomainError("diffraction_attenuation: wavelength must be positive");
  if (!(delta_m >= 0.0)) throw DomainError("diffraction_attenuation: negative path difference");
  const double z = 40.0 / wavelength_m * c_dprime * delta_m;
  if (z < -2.0) return 0.0;
  return 10.0 * std::log10(3.0 + z);
}

double reflected_source_level(double base_level_db, int n_ref, double alpha_vert) {
  if (n_ref < 0) throw DomainError("reflected_source_level: negative order");
  if (!(alpha_vert >= 0.0) || !(alpha_vert < 1.0))
    throw DomainError("reflected_source_level: absorption coefficient must be in [0, 1)");
  const double step = 10.0 * std::log10(1.0 - alpha_vert);
  double level = base_level_db;
  for (int n = 1; n <= n_ref; ++n) level += n * step;
  return level;
}

double energetic_sum(std::span<const double> levels_db) {
  if (levels_db.empty()) return -std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(levels_db.begin(), levels_db.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double l : levels_db) acc += std::pow(10.0, (l - peak) / 10.0);
  return peak + 10.0 * std::log10(acc);
}

double wavelength(double frequency_hz, double speed_of_sound_m_s) {
  if (!(frequency_hz > 0.0) || !(speed_of_sound_m_s > 0.0))
    throw DomainError("wavelength: frequency and speed of sound must be positive");
  return speed_of_sound_m_s / frequency_hz;
}

}  // namespace physgen::sound
