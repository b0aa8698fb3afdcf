#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stablegof/ecf_test.hpp"
#include "stablegof/random.hpp"

namespace stablegof {

struct Alternative {
    enum class Kind { stable, student_t, normal };
    Kind kind = Kind::stable;
    double param = 2.0;  // alpha, degrees of freedom (inf gives N(0,1)), or variance

    static Alternative stable(double alpha) { return {Kind::stable, alpha}; }
    static Alternative student_t(double dof) { return {Kind::student_t, dof}; }
    static Alternative normal(double variance) { return {Kind::normal, variance}; }

    double draw(UniformSource& u) const;
    std::string describe() const;  // "stable(1.5)", "t(3)", "normal(2)"
    static Alternative parse(const std::string& s);
};

struct ExperimentConfig {
    std::size_t n = 200;
    double alpha = 1.5;  // null index; alpha0 under H2
    std::vector<double> kappas{1.0};
    Hypothesis hypothesis = Hypothesis::H1;
    Estimator estimator = Estimator::mle;
    WeightSpec eise_weight = WeightSpec::exp_abs(1.0);
    std::size_t replications = 2000;
    std::uint64_t seed = 1;
    std::optional<Alternative> alternative;  // absent: standard stable(alpha) data
    int threads = 0;                         // 0: hardware concurrency

    void validate() const;
};

// D_{n,kappa} per kappa and replication, in replication order.
struct ReplicationSet {
    std::vector<std::vector<double>> statistics;  // [kappa][replication]
    std::vector<double> alpha_hat;
    std::size_t failures = 0;  // fits that failed and were redrawn
};

// Failed fits are redrawn from a derived substream; more than 1% failures is an error.
// Output does not depend on the thread count.
ReplicationSet run_replications(const ExperimentConfig& cfg);

struct QuantileEstimate {
    double xi = 0.0;     // upper-tail level
    double value = 0.0;
    double se = 0.0;     // half-width of the +-1 binomial SD order-statistic interval
};

// Upper-xi sample quantile: order statistic ceil(n(1 - xi)).
QuantileEstimate empirical_quantile(std::vector<double> sample, double xi);

struct CriticalCell {
    double kappa = 0.0;
    std::vector<QuantileEstimate> quantiles;
};

struct CriticalStudy {
    std::vector<CriticalCell> cells;
    std::size_t failures = 0;
};

CriticalStudy simulate_critical(const ExperimentConfig& cfg, const std::vector<double>& xis = {0.10, 0.05});

struct CriticalValue {
    double kappa = 0.0;
    double xi = 0.0;
    double value = 0.0;
};

struct PowerCell {
    double kappa = 0.0;
    double xi = 0.0;
    double critical_value = 0.0;
    double power = 0.0;
    double se = 0.0;  // sqrt(p(1-p)/R)
};

struct PowerStudy {
    std::vector<PowerCell> cells;
    std::size_t failures = 0;
};

// Every kappa in cfg must have at least one critical value; cells follow the order of crit.
PowerStudy power_study(const ExperimentConfig& cfg, const std::vector<CriticalValue>& crit);

// Critical values of one (kappa, xi) over a grid of alpha, ascending.
struct CriticalCurve {
    double kappa = 0.0;
    double xi = 0.0;
    std::vector<double> alpha;
    std::vector<double> value;

    void validate() const;
    double at(double a) const;  // linear interpolation; DomainError outside the grid
};

enum class H1Method { sup_all, sup_range, plugin };

struct H1Decision {
    bool reject = false;
    double threshold = 0.0;
};

// sup_all: max over the curve; sup_range: max over [a, b] (interpolated ends included);
// plugin: curve value at alpha_hat.
H1Decision h1_decision(double d_obs, H1Method method, const CriticalCurve& curve, double alpha_hat = 0.0,
                       double a = 0.0, double b = 2.0);

}  // namespace stablegof
