#pragma once

#include "pdpsim/rate_expr.hpp"
#include "pdpsim/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pdpsim::model {

enum class SpeciesKind { Continuous, Discrete };

struct FastRange {
  Count lo = 0;
  Count hi = 0;  // inclusive
  Count size() const { return hi - lo + 1; }
};

struct SpeciesDecl {
  std::string name;
  SpeciesKind kind = SpeciesKind::Discrete;
  double init = 0.0;  // scaled concentration for continuous, integer count for discrete
  std::optional<FastRange> fast;  // membership in the fast discrete block
  bool is_theta = false;          // the regime-D switch
};

enum class ScalingOrder { Unit, N, NOverEps, OneOverEps };

enum class ThetaGate { None, Theta0, Theta1 };

struct ReactionDecl {
  std::string name;
  std::map<std::string, Count> delta;    // molecule-count stoichiometry
  std::map<std::string, double> sdelta;  // scaled O(1) jumps of continuous species
  rate_expr::RateExpr rate;              // scaled rate, evaluated on the scaled state
  std::string rate_text;
  ScalingOrder order = ScalingOrder::Unit;
  ThetaGate gate = ThetaGate::None;
};

struct NetworkModel {
  std::string name;
  std::vector<SpeciesDecl> species;
  std::vector<ReactionDecl> reactions;
  std::map<std::string, double> params;
  long default_N = 1;
  std::optional<double> default_eps;

  int species_index(const std::string& name) const;  // -1 if absent
  int reaction_index(const std::string& name) const;
};

/// Parses the line-oriented model file format and validates every
/// NetworkModel invariant. Errors carry 1-based line numbers.
NetworkModel parse_model(const std::string& text);

/// Convenience: read a file and parse it.
NetworkModel load_model(const std::string& path);

const char* order_name(ScalingOrder order);

enum class Regime { A, B, C, D };

Regime parse_regime(const std::string& text);
const char* regime_name(Regime regime);

enum class ReactionClass { RC, RD, RDC, S1, S2, ThetaFlip };

const char* class_name(ReactionClass c);

/// A model checked and compiled for one regime. Immutable; safe to share
/// across simulation workers.
class ClassifiedModel {
 public:
  static ClassifiedModel classify(const NetworkModel& model, Regime regime);

  const NetworkModel& model() const { return *model_; }
  Regime regime() const { return regime_; }
  int n_species() const { return static_cast<int>(model_->species.size()); }
  int n_reactions() const { return static_cast<int>(model_->reactions.size()); }

  ReactionClass reaction_class(int r) const { return classes_[r]; }
  const std::vector<ReactionClass>& classes() const { return classes_; }

  const std::vector<int>& continuous_indices() const { return continuous_; }
  const std::vector<int>& discrete_indices() const { return discrete_; }
  /// Regime C: slow discrete block (discrete minus fast); other regimes:
  /// equal to discrete_indices().
  const std::vector<int>& slow_discrete_indices() const { return slow_discrete_; }
  const std::vector<int>& fast_indices() const { return fast_; }
  int theta_index() const { return theta_; }

  /// Count-level stoichiometry over all species slots.
  const VecXi& delta(int r) const { return delta_[r]; }
  /// Scaled O(1) continuous jumps over all species slots (zero off S2).
  const VecXd& sdelta(int r) const { return sdelta_[r]; }
  bool reads_any(int r, const std::vector<int>& slots) const;

  /// Scaled state view: continuous slots hold count/N, discrete slots hold
  /// the integer count as a real.
  VecXd scaled_view(const VecXi& counts, long N) const;

  /// Applies reaction r to integer counts (delta plus round(N*sdelta)).
  void apply_reaction(VecXi& counts, int r, long N) const;

  /// Scaled rate of reaction r at a scaled state (no order factor).
  double rate_value(int r, const VecXd& scaled_state) const;

  bool gate_open(int r, const VecXd& scaled_state) const;

  double order_factor(int r, long N, std::optional<double> eps) const;

  /// Propensity vector: order factor times scaled rate, zero where a theta
  /// gate is closed. Throws SimulationError on a negative entry.
  void propensities(const VecXd& scaled_state, long N, std::optional<double> eps,
                    VecXd& out) const;

  /// Initial counts for scale N (continuous inits rounded to counts).
  VecXi initial_counts(long N) const;

  /// Assembles a scaled state from a continuous vector (ordered as
  /// continuous_indices) and a discrete vector (ordered as
  /// discrete_indices).
  VecXd assemble_scaled(const VecXd& y, const VecXi& xd) const;

  /// Gamma vectors in the ordering of continuous_indices /
  /// discrete_indices / slow_discrete_indices / fast_indices.
  VecXd gamma_c(int r) const;
  VecXd sdelta_c(int r) const;
  VecXi gamma_d(int r) const;
  VecXi gamma_d1(int r) const;
  VecXi gamma_d2(int r) const;

 private:
  std::shared_ptr<const NetworkModel> model_;
  Regime regime_ = Regime::A;
  std::vector<ReactionClass> classes_;
  std::vector<rate_expr::CompiledExpr> compiled_;
  std::vector<VecXi> delta_;
  std::vector<VecXd> sdelta_;
  std::vector<int> continuous_;
  std::vector<int> discrete_;
  std::vector<int> slow_discrete_;
  std::vector<int> fast_;
  int theta_ = -1;
};

/// Spec-level propensity over a named binding; binds every species, then
/// delegates to ClassifiedModel::propensities.
std::vector<double> propensity(const ClassifiedModel& classified, long N,
                               std::optional<double> eps,
                               const rate_expr::Binding& state);

}  // namespace pdpsim::model
