#pragma once

#include <string>
#include <string_view>

namespace vortexlayer {

/// The drift nonlinearity g of omega_t + div(g(omega) v) = 0.
///
/// MeanField: g(s) = |s| (vortex density in a type-II superconductor).
/// KellerSegel: g(s) = s(1-s) on [0,1] and 0 outside (cell density).
/// Both are Lipschitz with constant 1.
class FluxModel {
 public:
  enum class Variant { MeanField, KellerSegel };

  constexpr FluxModel() = default;
  constexpr explicit FluxModel(Variant variant) : variant_(variant) {}

  static constexpr FluxModel mean_field() { return FluxModel(Variant::MeanField); }
  static constexpr FluxModel keller_segel() { return FluxModel(Variant::KellerSegel); }

  constexpr Variant variant() const { return variant_; }
  /// Lipschitz constant K of g.
  constexpr double lipschitz() const { return 1.0; }

  double g(double s) const;
  /// A bounded selection of g': sign(s) with g'(0) = 0 for MeanField; 1-2s on
  /// (0,1) and 0 elsewhere for KellerSegel.
  double g_prime(double s) const;

  std::string_view name() const;

  friend bool operator==(const FluxModel&, const FluxModel&) = default;

 private:
  Variant variant_ = Variant::MeanField;
};

/// Accepts "meanfield" or "kellersegel".
FluxModel parse_flux_model(std::string_view text);

enum class EntropyKind { Full, PlusPart, MinusPart };

/// Kruzkov entropy pair at level xi:
///   Full      (|w-xi|,   sign(w-xi)(g(w)-g(xi)))
///   PlusPart  (|w-xi|_+, sign_+(w-xi)(g(w)-g(xi)))
///   MinusPart (|w-xi|_-, sign_-(w-xi)(g(xi)-g(w)))
class EntropyPair {
 public:
  EntropyPair(FluxModel model, double level, EntropyKind kind) : model_(model), level_(level), kind_(kind) {}

  double level() const { return level_; }
  EntropyKind kind() const { return kind_; }
  double eta(double w) const;
  double q(double w) const;

 private:
  FluxModel model_;
  double level_;
  EntropyKind kind_;
};

inline EntropyPair entropy_pair(FluxModel model, double level, EntropyKind kind) { return {model, level, kind}; }

inline double sign_of(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

}  // namespace vortexlayer
