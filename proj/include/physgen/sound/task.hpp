#pragma once

#include <string>
#include <string_view>

namespace physgen::sound {

enum class Variant { kBaseline, kDiffraction, kReflection, kCombined };

std::string_view to_string(Variant v);
/// Accepts "baseline", "diffraction", "reflection", "combined" (any case).
Variant parse_variant(std::string_view name);

struct SoundTask {
  Variant variant = Variant::kBaseline;
  double source_level_db = 95.0;
  double frequency_hz = 500.0;
  double speed_of_sound_m_s = 343.0;
  double c_dprime = 1.0;
  double alpha_vert = 0.1;
  int reflection_order = 0;
  double alpha_air_db_per_km = 2.0;

  bool diffraction_enabled() const { return variant == Variant::kDiffraction || variant == Variant::kCombined; }
  bool reflections_enabled() const {
    return (variant == Variant::kReflection || variant == Variant::kCombined) && reflection_order > 0;
  }
  double wavelength_m() const;

  /// Defaults for a variant: reflection order 1 for Reflection and Combined.
  static SoundTask preset(Variant v);
};

/// Throws ValidationError when the task violates its invariants.
void validate(const SoundTask& task);

}  // namespace physgen::sound
