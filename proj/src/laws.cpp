#include "sievelab/laws.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/SpecialFunctions>

#include "sievelab/errors.hpp"
#include "sievelab/quadrature.hpp"

namespace sievelab {

namespace {

void validate_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError(std::string(what) + " must be strictly positive");
}

void validate_atoms(const Atoms& atoms, double lo, double hi, const char* what) {
    if (atoms.empty()) throw DomainError(std::string(what) + ": empty atom list");
    double total = 0.0;
    for (const auto& [v, p] : atoms) {
        if (!(v > lo) || !(v < hi))
            throw DomainError(std::string(what) + ": atom value outside open support");
        if (!(p > 0.0)) throw DomainError(std::string(what) + ": atom probability <= 0");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw DomainError(std::string(what) + ": atom probabilities do not sum to 1");
}

double atoms_cdf(const Atoms& atoms, double x) {
    double s = 0.0;
    for (const auto& [v, p] : atoms)
        if (v <= x) s += p;
    return s;
}

double atoms_sample(const Atoms& atoms, Rng& rng) {
    const double u = rng.uniform_open();
    double acc = 0.0;
    for (const auto& [v, p] : atoms) {
        acc += p;
        if (u <= acc) return v;
    }
    return atoms.back().first;
}

double beta_cdf(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    Eigen::ArrayXd aa(1), bb(1), xx(1);
    aa << a;
    bb << b;
    xx << x;
    return Eigen::betainc(aa, bb, xx)(0);
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// E f(W) for the weight law, by atom sum or tanh-sinh against the density.
double weight_expectation(const WeightLaw& law, const std::function<double(double)>& f) {
    switch (law.kind()) {
        case WeightLaw::Kind::kAtoms: {
            double s = 0.0;
            for (const auto& [v, p] : law.atom_list()) s += p * f(v);
            return s;
        }
        case WeightLaw::Kind::kGem: {
            const double theta = law.theta();
            return integrate_unit_interval(
                [&](double w) { return f(w) * theta * std::pow(w, theta - 1.0); });
        }
        case WeightLaw::Kind::kBeta: {
            const double a = law.beta_a(), b = law.beta_b();
            const double norm = std::exp(-log_beta(a, b));
            return integrate_unit_interval([&](double w) {
                return f(w) * norm * std::pow(w, a - 1.0) * std::pow(1.0 - w, b - 1.0);
            });
        }
    }
    throw DomainError("unreachable weight kind");
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightLaw

WeightLaw WeightLaw::gem(double theta, std::string label) {
    validate_positive(theta, "GEM theta");
    WeightLaw law;
    law.kind_ = Kind::kGem;
    law.theta_ = theta;
    law.label_ = std::move(label);
    return law;
}

WeightLaw WeightLaw::beta(double a, double b, std::string label) {
    validate_positive(a, "Beta a");
    validate_positive(b, "Beta b");
    WeightLaw law;
    law.kind_ = Kind::kBeta;
    law.a_ = a;
    law.b_ = b;
    law.label_ = std::move(label);
    return law;
}

WeightLaw WeightLaw::atoms(Atoms atoms, std::string label) {
    validate_atoms(atoms, 0.0, 1.0, "weight atoms");
    WeightLaw law;
    law.kind_ = Kind::kAtoms;
    law.atoms_ = std::move(atoms);
    law.label_ = std::move(label);
    return law;
}

double WeightLaw::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::kGem:
            return std::pow(rng.uniform_open(), 1.0 / theta_);
        case Kind::kBeta:
            return rng.beta(a_, b_);
        case Kind::kAtoms:
            return atoms_sample(atoms_, rng);
    }
    throw DomainError("unreachable weight kind");
}

double WeightLaw::cdf(double w) const {
    if (w <= 0.0) return 0.0;
    if (w >= 1.0) return 1.0;
    switch (kind_) {
        case Kind::kGem:
            return std::pow(w, theta_);
        case Kind::kBeta:
            return beta_cdf(a_, b_, w);
        case Kind::kAtoms:
            return atoms_cdf(atoms_, w);
    }
    throw DomainError("unreachable weight kind");
}

nlohmann::json WeightLaw::to_json() const {
    nlohmann::json j;
    switch (kind_) {
        case Kind::kGem:
            j = {{"kind", "gem"}, {"theta", theta_}};
            break;
        case Kind::kBeta:
            j = {{"kind", "beta"}, {"a", a_}, {"b", b_}};
            break;
        case Kind::kAtoms: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& [v, p] : atoms_) arr.push_back({v, p});
            j = {{"kind", "atoms"}, {"atoms", arr}};
            break;
        }
    }
    if (!label_.empty()) j["label"] = label_;
    return j;
}

WeightLaw WeightLaw::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    std::string label = j.value("label", std::string());
    if (kind == "gem") return gem(j.at("theta").get<double>(), std::move(label));
    if (kind == "beta")
        return beta(j.at("a").get<double>(), j.at("b").get<double>(), std::move(label));
    if (kind == "atoms") {
        Atoms atoms;
        for (const auto& e : j.at("atoms"))
            atoms.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
        return WeightLaw::atoms(std::move(atoms), std::move(label));
    }
    throw ConfigInvalid("unknown weight law kind: " + kind);
}

// ---------------------------------------------------------------------------
// Marginal

Marginal Marginal::exponential(double rate) {
    validate_positive(rate, "exponential rate");
    Marginal m;
    m.kind_ = Kind::kExponential;
    m.rate_ = rate;
    return m;
}

Marginal Marginal::gamma(double shape, double rate) {
    validate_positive(shape, "gamma shape");
    validate_positive(rate, "gamma rate");
    Marginal m;
    m.kind_ = Kind::kGamma;
    m.shape_ = shape;
    m.rate_ = rate;
    return m;
}

Marginal Marginal::atoms(Atoms atoms) {
    validate_atoms(atoms, 0.0, std::numeric_limits<double>::infinity(), "step atoms");
    Marginal m;
    m.kind_ = Kind::kAtoms;
    m.atoms_ = std::move(atoms);
    return m;
}

double Marginal::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::kExponential:
            return rng.exponential(rate_);
        case Kind::kGamma:
            return rng.gamma(shape_, rate_);
        case Kind::kAtoms:
            return atoms_sample(atoms_, rng);
    }
    throw DomainError("unreachable marginal kind");
}

double Marginal::cdf(double x) const {
    if (x < 0.0) return 0.0;
    switch (kind_) {
        case Kind::kExponential:
            return -std::expm1(-rate_ * x);
        case Kind::kGamma: {
            Eigen::ArrayXd aa(1), xx(1);
            aa << shape_;
            xx << rate_ * x;
            return Eigen::igamma(aa, xx)(0);
        }
        case Kind::kAtoms:
            return atoms_cdf(atoms_, x);
    }
    throw DomainError("unreachable marginal kind");
}

double Marginal::mean() const {
    switch (kind_) {
        case Kind::kExponential:
            return 1.0 / rate_;
        case Kind::kGamma:
            return shape_ / rate_;
        case Kind::kAtoms: {
            double s = 0.0;
            for (const auto& [v, p] : atoms_) s += p * v;
            return s;
        }
    }
    throw DomainError("unreachable marginal kind");
}

double Marginal::second_moment() const {
    switch (kind_) {
        case Kind::kExponential:
            return 2.0 / (rate_ * rate_);
        case Kind::kGamma:
            return shape_ * (shape_ + 1.0) / (rate_ * rate_);
        case Kind::kAtoms: {
            double s = 0.0;
            for (const auto& [v, p] : atoms_) s += p * v * v;
            return s;
        }
    }
    throw DomainError("unreachable marginal kind");
}

double Marginal::laplace(double s) const {
    switch (kind_) {
        case Kind::kExponential:
            return rate_ / (rate_ + s);
        case Kind::kGamma:
            return std::pow(rate_ / (rate_ + s), shape_);
        case Kind::kAtoms: {
            double acc = 0.0;
            for (const auto& [v, p] : atoms_) acc += p * std::exp(-s * v);
            return acc;
        }
    }
    throw DomainError("unreachable marginal kind");
}

nlohmann::json Marginal::to_json() const {
    switch (kind_) {
        case Kind::kExponential:
            return {{"kind", "exponential"}, {"rate", rate_}};
        case Kind::kGamma:
            return {{"kind", "gamma"}, {"shape", shape_}, {"rate", rate_}};
        case Kind::kAtoms: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& [v, p] : atoms_) arr.push_back({v, p});
            return {{"kind", "atoms"}, {"atoms", arr}};
        }
    }
    throw DomainError("unreachable marginal kind");
}

Marginal Marginal::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exponential") return exponential(j.at("rate").get<double>());
    if (kind == "gamma")
        return gamma(j.at("shape").get<double>(), j.at("rate").get<double>());
    if (kind == "atoms") {
        Atoms atoms;
        for (const auto& e : j.at("atoms"))
            atoms.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
        return Marginal::atoms(std::move(atoms));
    }
    throw ConfigInvalid("unknown marginal kind: " + kind);
}

// ---------------------------------------------------------------------------
// StepLaw

StepLaw StepLaw::derived(WeightLaw weight) {
    StepLaw law;
    law.derived_ = std::move(weight);
    return law;
}

StepLaw StepLaw::direct(Marginal xi, Marginal eta) {
    StepLaw law;
    law.xi_ = std::move(xi);
    law.eta_ = std::move(eta);
    return law;
}

const WeightLaw& StepLaw::weight() const {
    if (!derived_) throw DomainError("step law is not derived from a weight law");
    return *derived_;
}

const Marginal& StepLaw::xi_marginal() const {
    if (!xi_) throw DomainError("step law has no direct xi marginal");
    return *xi_;
}

const Marginal& StepLaw::eta_marginal() const {
    if (!eta_) throw DomainError("step law has no direct eta marginal");
    return *eta_;
}

std::pair<double, double> StepLaw::sample(Rng& rng) const {
    if (derived_) {
        const double w = derived_->sample(rng);
        return {-std::log(w), -std::log1p(-w)};
    }
    return {xi_->sample(rng), eta_->sample(rng)};
}

double StepLaw::xi_cdf(double x) const {
    if (x < 0.0) return 0.0;
    if (derived_) return 1.0 - derived_->cdf(std::exp(-x));
    return xi_->cdf(x);
}

double StepLaw::eta_cdf(double x) const {
    if (x < 0.0) return 0.0;
    if (derived_) return derived_->cdf(-std::expm1(-x));
    return eta_->cdf(x);
}

double StepLaw::laplace_xi(double s) const {
    if (derived_)
        return weight_expectation(*derived_, [s](double w) { return std::pow(w, s); });
    return xi_->laplace(s);
}

double StepLaw::laplace_eta(double s) const {
    if (derived_)
        return weight_expectation(*derived_,
                                  [s](double w) { return std::pow(1.0 - w, s); });
    return eta_->laplace(s);
}

bool StepLaw::xi_is_lattice() const {
    if (derived_) return derived_->kind() == WeightLaw::Kind::kAtoms;
    return xi_->is_lattice();
}

bool StepLaw::eta_is_lattice() const {
    if (derived_) return derived_->kind() == WeightLaw::Kind::kAtoms;
    return eta_->is_lattice();
}

Atoms StepLaw::xi_atoms() const {
    if (!xi_is_lattice()) throw DomainError("xi is not lattice");
    if (derived_) {
        Atoms out;
        for (const auto& [v, p] : derived_->atom_list()) out.emplace_back(-std::log(v), p);
        std::sort(out.begin(), out.end());
        return out;
    }
    return xi_->atom_list();
}

Atoms StepLaw::eta_atoms() const {
    if (!eta_is_lattice()) throw DomainError("eta is not lattice");
    if (derived_) {
        Atoms out;
        for (const auto& [v, p] : derived_->atom_list())
            out.emplace_back(-std::log1p(-v), p);
        std::sort(out.begin(), out.end());
        return out;
    }
    return eta_->atom_list();
}

bool StepLaw::has_ac_component() const { return !xi_is_lattice(); }

bool StepLaw::has_exponential_moments() const {
    // Every supported family has a finite exponential moment of some order:
    // exp/gamma up to their rate, GEM up to min(theta, 1), Beta up to min(a, b),
    // atom laws trivially.
    return true;
}

nlohmann::json StepLaw::to_json() const {
    if (derived_) return {{"kind", "derived"}, {"weight", derived_->to_json()}};
    return {{"kind", "direct"}, {"xi", xi_->to_json()}, {"eta", eta_->to_json()}};
}

StepLaw StepLaw::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "derived") return derived(WeightLaw::from_json(j.at("weight")));
    if (kind == "direct")
        return direct(Marginal::from_json(j.at("xi")), Marginal::from_json(j.at("eta")));
    throw ConfigInvalid("unknown step law kind: " + kind);
}

StepLaw StepLaw::from_json_lenient(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "derived" || kind == "direct") return from_json(j);
    return derived(WeightLaw::from_json(j));
}

// ---------------------------------------------------------------------------
// Moments

MomentSet compute_moments(const StepLaw& law) {
    MomentSet m;
    if (law.is_derived()) {
        const WeightLaw& w = law.weight();
        m.mu = weight_expectation(w, [](double x) { return -std::log(x); });
        m.e_xi2 = weight_expectation(w, [](double x) {
            const double l = std::log(x);
            return l * l;
        });
        m.e_eta = weight_expectation(w, [](double x) { return -std::log1p(-x); });
    } else {
        m.mu = law.xi_marginal().mean();
        m.e_xi2 = law.xi_marginal().second_moment();
        m.e_eta = law.eta_marginal().mean();
    }
    if (!std::isfinite(m.mu) || !std::isfinite(m.e_xi2) || !std::isfinite(m.e_eta))
        throw NonIntegrable("a required moment diverged");
    m.sigma2 = std::max(0.0, m.e_xi2 - m.mu * m.mu);
    m.gamma = m.e_xi2 / (2.0 * m.mu * m.mu) - m.e_eta / m.mu;
    return m;
}

double sample_weight(const WeightLaw& law, Rng& rng) { return law.sample(rng); }

std::pair<double, double> sample_step(const StepLaw& law, Rng& rng) {
    return law.sample(rng);
}

}  // namespace sievelab
