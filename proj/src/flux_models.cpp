#include "vortexlayer/flux_models.hpp"

#include <cmath>

#include "vortexlayer/error.hpp"

namespace vortexlayer {

double FluxModel::g(double s) const {
  if (variant_ == Variant::MeanField) return std::abs(s);
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return s * (1.0 - s);
}

double FluxModel::g_prime(double s) const {
  if (variant_ == Variant::MeanField) return sign_of(s);
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 1.0 - 2.0 * s;
}

std::string_view FluxModel::name() const {
  return variant_ == Variant::MeanField ? "meanfield" : "kellersegel";
}

FluxModel parse_flux_model(std::string_view text) {
  if (text == "meanfield") return FluxModel::mean_field();
  if (text == "kellersegel") return FluxModel::keller_segel();
  fail(ErrorKind::Validation, "unknown model '" + std::string(text) + "' (expected meanfield or kellersegel)");
}

double EntropyPair::eta(double w) const {
  const double d = w - level_;
  switch (kind_) {
    case EntropyKind::Full: return std::abs(d);
    case EntropyKind::PlusPart: return d > 0.0 ? d : 0.0;
    case EntropyKind::MinusPart: return d < 0.0 ? -d : 0.0;
  }
  return 0.0;
}

double EntropyPair::q(double w) const {
  const double d = w - level_;
  const double dg = model_.g(w) - model_.g(level_);
  switch (kind_) {
    case EntropyKind::Full: return sign_of(d) * dg;
    case EntropyKind::PlusPart: return d > 0.0 ? dg : 0.0;
    case EntropyKind::MinusPart: return d < 0.0 ? -dg : 0.0;
  }
  return 0.0;
}

}  // namespace vortexlayer
