#pragma once

#include <span>

namespace physgen::sound {

/// A_div = 20 log10(d) + 11. Throws DomainError for d <= 0.
double geometric_spreading(double distance_m);

/// A_atm = alpha_air * d / 1000.
double atmospheric_absorption(double distance_m, double alpha_air_db_per_km);

/// A_dif = 10 log10(3 + (40 / lambda) C'' delta) when (40 / lambda) C'' delta >= -2, else 0.
double diffraction_attenuation(double delta_m, double wavelength_m, double c_dprime = 1.0);

/// Source level after n reflections:
/// L(n) = L(n-1) + n * 10 log10(1 - alpha), L(0) = base.
double reflected_source_level(double base_level_db, int n_ref, double alpha_vert);

/// 10 log10(sum 10^(L/10)). Returns -infinity for an empty list.
double energetic_sum(std::span<const double> levels_db);

double wavelength(double frequency_hz, double speed_of_sound_m_s);

}  // namespace physgen::sound
