#include "physgen/sound/task.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "physgen/core/error.hpp"
#include "physgen/sound/attenuation.hpp"

namespace physgen::sound {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kBaseline: return "baseline";
    case Variant::kDiffraction: return "diffraction";
    case Variant::kReflection: return "reflection";
    case Variant::kCombined: return "combined";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Variant v : {Variant::kBaseline, Variant::kDiffraction, Variant::kReflection, Variant::kCombined})
    if (s == to_string(v)) return v;
  throw ValidationError("unknown sound task '" + std::string(name) + "'");
}

double SoundTask::wavelength_m() const { return wavelength(frequency_hz, speed_of_sound_m_s); }

SoundTask SoundTask::preset(Variant v) {
  SoundTask t;
  t.variant = v;
  if (v == Variant::kReflection || v == Variant::kCombined) t.reflection_order = 1;
  return t;
}

void validate(const SoundTask& t) {
  if (!(t.source_level_db >= 60.0 && t.source_level_db <= 115.0))
    throw ValidationError("source level must be within [60, 115] dB");
  if (!(t.frequency_hz > 0.0) || !(t.speed_of_sound_m_s > 0.0))
    throw ValidationError("frequency and speed of sound must be positive");
  if (!(t.alpha_vert >= 0.0 && t.alpha_vert < 1.0)) throw ValidationError("alpha_vert must be in [0, 1)");
  if (!(t.alpha_air_db_per_km >= 0.0)) throw ValidationError("alpha_air must be non-negative");
  if (!std::isfinite(t.c_dprime)) throw ValidationError("C'' must be finite");
  if (t.reflection_order < 0) throw ValidationError("reflection order must be non-negative");
  if ((t.variant == Variant::kBaseline || t.variant == Variant::kDiffraction) && t.reflection_order != 0)
    throw ValidationError(std::string(to_string(t.variant)) + " task requires reflection order 0");
}

}  // namespace physgen::sound
