#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sievelab/rng.hpp"

#include <nlohmann/json_fwd.hpp>

namespace sievelab {

using Atoms = std::vector<std::pair<double, double>>;  // (value, probability)

// Distribution of the stick factor W on (0,1). GEM(theta) has density
// theta*x^(theta-1); DiscreteAtoms carries lattice environments, which stay
// first-class because nothing here assumes |log W| nonarithmetic.
class WeightLaw {
  public:
    enum class Kind { kGem, kBeta, kAtoms };

    static WeightLaw gem(double theta, std::string label = {});
    static WeightLaw beta(double a, double b, std::string label = {});
    static WeightLaw atoms(Atoms atoms, std::string label = {});

    Kind kind() const { return kind_; }
    double theta() const { return theta_; }
    double beta_a() const { return a_; }
    double beta_b() const { return b_; }
    const Atoms& atom_list() const { return atoms_; }
    const std::string& label() const { return label_; }

    double sample(Rng& rng) const;
    double cdf(double w) const;

    nlohmann::json to_json() const;
    static WeightLaw from_json(const nlohmann::json& j);

  private:
    WeightLaw() = default;
    Kind kind_ = Kind::kGem;
    double theta_ = 1.0;
    double a_ = 1.0, b_ = 1.0;
    Atoms atoms_;
    std::string label_;
};

// Marginal descriptor for a directly specified step component.
class Marginal {
  public:
    enum class Kind { kExponential, kGamma, kAtoms };

    static Marginal exponential(double rate);
    static Marginal gamma(double shape, double rate);
    static Marginal atoms(Atoms atoms);

    Kind kind() const { return kind_; }
    double rate() const { return rate_; }
    double shape() const { return shape_; }
    const Atoms& atom_list() const { return atoms_; }

    double sample(Rng& rng) const;
    double cdf(double x) const;
    double mean() const;
    double second_moment() const;
    double laplace(double s) const;  // E exp(-s X)
    bool is_lattice() const { return kind_ == Kind::kAtoms; }

    nlohmann::json to_json() const;
    static Marginal from_json(const nlohmann::json& j);

  private:
    Marginal() = default;
    Kind kind_ = Kind::kExponential;
    double rate_ = 1.0, shape_ = 1.0;
    Atoms atoms_;
};

// Law of the step pair (xi, eta). Derived laws keep the full dependence of
// (|log W|, |log(1-W)|) by construction: one W draw feeds both components.
class StepLaw {
  public:
    static StepLaw derived(WeightLaw weight);
    static StepLaw direct(Marginal xi, Marginal eta);

    bool is_derived() const { return derived_.has_value(); }
    const WeightLaw& weight() const;
    const Marginal& xi_marginal() const;
    const Marginal& eta_marginal() const;

    std::pair<double, double> sample(Rng& rng) const;

    double xi_cdf(double x) const;
    double eta_cdf(double x) const;
    double laplace_xi(double s) const;
    double laplace_eta(double s) const;

    bool xi_is_lattice() const;
    bool eta_is_lattice() const;
    // Marginal atom lists of xi resp. eta; only valid for lattice components.
    Atoms xi_atoms() const;
    Atoms eta_atoms() const;

    // True when the law of xi has an absolutely continuous component.
    bool has_ac_component() const;
    // True when E exp(b1*xi) and E exp(b2*eta) are finite for some b1,b2 > 0.
    bool has_exponential_moments() const;

    nlohmann::json to_json() const;
    static StepLaw from_json(const nlohmann::json& j);
    // Accepts either a step-law object or a bare weight-law object (treated
    // as derived).
    static StepLaw from_json_lenient(const nlohmann::json& j);

  private:
    StepLaw() = default;
    std::optional<WeightLaw> derived_;
    std::optional<Marginal> xi_, eta_;
};

// Moment constants feeding every normalization: mu = E xi, sigma2 = Var xi,
// e_eta = E eta, e_xi2 = E xi^2, gamma = e_xi2/(2 mu^2) - e_eta/mu.
struct MomentSet {
    double mu = 0.0;
    double sigma2 = 0.0;
    double e_eta = 0.0;
    double e_xi2 = 0.0;
    double gamma = 0.0;
};

// Closed forms for direct kinds (relative accuracy ~1e-15); tanh-sinh
// quadrature over (0,1) for derived kinds (relative accuracy ~1e-10).
MomentSet compute_moments(const StepLaw& law);

double sample_weight(const WeightLaw& law, Rng& rng);
std::pair<double, double> sample_step(const StepLaw& law, Rng& rng);

}  // namespace sievelab
