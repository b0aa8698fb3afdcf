#include "stablegof/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "stablegof/stable.hpp"

namespace stablegof {

namespace {

constexpr double kMaxFailureRate = 0.01;
constexpr int kMaxRedraws = 50;

int worker_count(int requested, std::size_t jobs) {
    int nt = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::max(1, std::min<int>(nt, static_cast<int>(jobs)));
}

}  // namespace

double Alternative::draw(UniformSource& u) const {
    switch (kind) {
    case Kind::stable: return rand_stable(param, u);
    case Kind::student_t: return rand_student_t(param, u);
    case Kind::normal: return std::sqrt(param) * rand_normal(u);
    }
    return 0.0;
}

std::string Alternative::describe() const {
    std::ostringstream os;
    os << (kind == Kind::stable ? "stable" : kind == Kind::student_t ? "t" : "normal") << "(" << param << ")";
    return os.str();
}

Alternative Alternative::parse(const std::string& s) {
    // Accepts name(value) or name:value.
    const auto open = s.find_first_of("(:");
    if (open == std::string::npos) throw DomainError("alternative must look like t(3), stable(1.5) or normal(2)");
    const std::string name = s.substr(0, open);
    std::string rest = s.substr(open + 1);
    if (!rest.empty() && rest.back() == ')') rest.pop_back();
    double v = 0.0;
    if (rest == "inf" || rest == "infinity")
        v = INFINITY;
    else {
        std::size_t used = 0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != rest.size()) throw DomainError("bad alternative parameter in '" + s + "'");
    }
    Alternative a;
    if (name == "stable") {
        if (!(v > 0.0 && v <= 2.0)) throw DomainError("stable alternative needs alpha in (0, 2]");
        a = stable(v);
    } else if (name == "t") {
        if (!(v > 0.0)) throw DomainError("t alternative needs positive degrees of freedom");
        a = student_t(v);
    } else if (name == "normal") {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("normal alternative needs a positive variance");
        a = normal(v);
    } else {
        throw DomainError("unknown alternative '" + name + "'");
    }
    return a;
}

void ExperimentConfig::validate() const {
    if (n < 20) throw DomainError("experiment needs n >= 20");
    if (replications < 100) throw DomainError("experiment needs at least 100 replications");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("null alpha must lie in (0, 2]");
    if (kappas.empty()) throw DomainError("experiment needs at least one kappa");
    for (double k : kappas)
        if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("kappa must be positive");
}

ReplicationSet run_replications(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t R = cfg.replications;
    ReplicationSet out;
    out.statistics.assign(cfg.kappas.size(), std::vector<double>(R));
    out.alpha_hat.resize(R);

    TestOptions topt;
    topt.hypothesis = cfg.hypothesis;
    topt.estimator = cfg.estimator;
    topt.eise_weight = cfg.eise_weight;
    if (cfg.hypothesis == Hypothesis::H2) topt.alpha0 = cfg.alpha;
    const Alternative source = cfg.alternative.value_or(Alternative::stable(cfg.alpha));
    const std::size_t max_failures = static_cast<std::size_t>(std::floor(kMaxFailureRate * R));

    std::atomic<std::size_t> failures{0};
    std::atomic<bool> abort{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    const int nt = worker_count(cfg.threads, R);
    auto work = [&](int tid) {
        std::vector<double> x(cfg.n);
        try {
            for (std::size_t r = tid; r < R && !abort; r += nt) {
                for (int attempt = 0;; ++attempt) {
                    UniformSource u(derive_seed(derive_seed(cfg.seed, r), attempt));
                    for (auto& v : x) v = source.draw(u);
                    try {
                        const auto res = fit_and_test(x, cfg.kappas, topt);
                        for (std::size_t k = 0; k < res.size(); ++k) out.statistics[k][r] = res[k].statistic;
                        out.alpha_hat[r] = res.front().fitted.alpha;
                        break;
                    } catch (const NumericalError&) {
                        if (++failures > max_failures || attempt >= kMaxRedraws)
                            throw NumericalError("replication failure rate above 1% (" + std::to_string(failures.load()) +
                                                 " of " + std::to_string(R) + ")");
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            abort = true;
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    out.failures = failures;
    return out;
}

QuantileEstimate empirical_quantile(std::vector<double> sample, double xi) {
    if (sample.empty()) throw DomainError("quantile of an empty sample");
    if (!(xi > 0.0 && xi < 1.0)) throw DomainError("upper-tail level must lie in (0, 1)");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    const double p = 1.0 - xi;
    auto at = [&](double rank) {
        // 1-based rank clamped to the sample.
        const long i = std::clamp<long>(std::lround(rank), 1, static_cast<long>(sample.size()));
        return sample[i - 1];
    };
    const double j = std::ceil(n * p);
    const double d = std::sqrt(n * p * (1.0 - p));
    QuantileEstimate q;
    q.xi = xi;
    q.value = at(j);
    q.se = 0.5 * (at(j + d) - at(j - d));
    return q;
}

CriticalStudy simulate_critical(const ExperimentConfig& cfg, const std::vector<double>& xis) {
    if (cfg.alternative) throw DomainError("critical-value simulation runs under the null; drop the alternative");
    const ReplicationSet rs = run_replications(cfg);
    CriticalStudy s;
    s.failures = rs.failures;
    for (std::size_t k = 0; k < cfg.kappas.size(); ++k) {
        CriticalCell c;
        c.kappa = cfg.kappas[k];
        for (double xi : xis) c.quantiles.push_back(empirical_quantile(rs.statistics[k], xi));
        s.cells.push_back(std::move(c));
    }
    return s;
}

PowerStudy power_study(const ExperimentConfig& cfg, const std::vector<CriticalValue>& crit) {
    if (crit.empty()) throw DomainError("power study needs critical values");
    for (const auto& c : crit)
        if (std::find(cfg.kappas.begin(), cfg.kappas.end(), c.kappa) == cfg.kappas.end())
            throw DomainError("critical value given for a kappa not in the experiment");
    const ReplicationSet rs = run_replications(cfg);
    PowerStudy s;
    s.failures = rs.failures;
    const double R = static_cast<double>(cfg.replications);
    for (const auto& c : crit) {
        const std::size_t k = std::find(cfg.kappas.begin(), cfg.kappas.end(), c.kappa) - cfg.kappas.begin();
        const auto& d = rs.statistics[k];
        const double rej = static_cast<double>(std::count_if(d.begin(), d.end(), [&](double v) { return v > c.value; }));
        PowerCell p;
        p.kappa = c.kappa;
        p.xi = c.xi;
        p.critical_value = c.value;
        p.power = rej / R;
        p.se = std::sqrt(p.power * (1.0 - p.power) / R);
        s.cells.push_back(p);
    }
    return s;
}

void CriticalCurve::validate() const {
    if (alpha.empty() || alpha.size() != value.size()) throw DomainError("critical curve needs matching alpha and value lists");
    for (std::size_t i = 1; i < alpha.size(); ++i)
        if (!(alpha[i] > alpha[i - 1])) throw DomainError("critical curve alpha grid must be strictly increasing");
}

double CriticalCurve::at(double a) const {
    validate();
    if (a < alpha.front() || a > alpha.back())
        throw DomainError("alpha " + std::to_string(a) + " is outside the tabulated range");
    const auto it = std::lower_bound(alpha.begin(), alpha.end(), a);
    const std::size_t i = it - alpha.begin();
    if (*it == a) return value[i];
    const double w = (a - alpha[i - 1]) / (alpha[i] - alpha[i - 1]);
    return (1.0 - w) * value[i - 1] + w * value[i];
}

H1Decision h1_decision(double d_obs, H1Method method, const CriticalCurve& curve, double alpha_hat, double a, double b) {
    curve.validate();
    H1Decision d;
    switch (method) {
    case H1Method::sup_all: d.threshold = *std::max_element(curve.value.begin(), curve.value.end()); break;
    case H1Method::sup_range: {
        if (!(a < b)) throw DomainError("sup_range needs a < b");
        const double lo = std::max(a, curve.alpha.front()), hi = std::min(b, curve.alpha.back());
        if (lo > hi) throw DomainError("sup_range interval does not meet the tabulated alpha range");
        d.threshold = std::max(curve.at(lo), curve.at(hi));
        for (std::size_t i = 0; i < curve.alpha.size(); ++i)
            if (curve.alpha[i] >= lo && curve.alpha[i] <= hi) d.threshold = std::max(d.threshold, curve.value[i]);
        break;
    }
    case H1Method::plugin: d.threshold = curve.at(alpha_hat); break;
    }
    d.reject = d_obs > d.threshold;
    return d;
}

}  // namespace stablegof
