#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stablegof/inversion.hpp"
#include "stablegof/montecarlo.hpp"

namespace stablegof::cli {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kDigits = 10;

class UsageError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(kDigits) << v;
    return os.str();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    return v;
}

// "a,b,c" or "start:stop:step".
std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        std::vector<double> p;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ':')) {
            const auto v = to_double(tok);
            if (!v) throw UsageError("bad " + what + " range '" + s + "'");
            p.push_back(*v);
        }
        if (p.size() != 3 || !(p[2] > 0.0) || p[1] < p[0]) throw UsageError("bad " + what + " range '" + s + "'");
        const int count = static_cast<int>(std::floor((p[1] - p[0]) / p[2] + 1e-9)) + 1;
        for (int i = 0; i < count; ++i) out.push_back(std::round((p[0] + i * p[2]) * 1e10) / 1e10);
        return out;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto v = to_double(tok);
        if (!v) throw UsageError("bad " + what + " value '" + tok + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw UsageError("empty " + what + " list");
    return out;
}

Hypothesis parse_hypothesis(const std::string& s) {
    if (s == "H1" || s == "h1") return Hypothesis::H1;
    if (s == "H2" || s == "h2") return Hypothesis::H2;
    throw UsageError("hypothesis must be H1 or H2");
}

const char* hypothesis_name(Hypothesis h) { return h == Hypothesis::H1 ? "H1" : "H2"; }

Estimator parse_estimator(const std::string& s) {
    if (s == "mle") return Estimator::mle;
    if (s == "eise") return Estimator::eise;
    throw UsageError("estimator must be mle or eise");
}

// exp_abs:kappa or exp_power:nu:bar_alpha
WeightSpec parse_weight(const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':')) f.push_back(tok);
    auto num = [&](std::size_t i) {
        const auto v = i < f.size() ? to_double(f[i]) : std::nullopt;
        if (!v) throw UsageError("bad weight '" + s + "' (use exp_abs:KAPPA or exp_power:NU:ALPHA)");
        return *v;
    };
    WeightSpec w;
    if (!f.empty() && f[0] == "exp_abs" && f.size() == 2)
        w = WeightSpec::exp_abs(num(1));
    else if (!f.empty() && f[0] == "exp_power" && f.size() == 3)
        w = WeightSpec::exp_power(num(1), num(2));
    else
        throw UsageError("bad weight '" + s + "' (use exp_abs:KAPPA or exp_power:NU:ALPHA)");
    w.validate();
    return w;
}

// One numeric value per line; the first field of delimited rows is used. A single
// non-numeric first line is taken as a header.
std::vector<double> read_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::vector<double> x;
    std::string line;
    int lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const std::string field = line.substr(0, line.find_first_of(",;\t "));
        const auto v = to_double(field);
        if (!v || !std::isfinite(*v)) {
            if (header_allowed && !v) {
                header_allowed = false;
                continue;
            }
            throw InputError(path + ":" + std::to_string(lineno) + ": not a finite number: '" + field + "'");
        }
        header_allowed = false;
        x.push_back(*v);
    }
    if (x.empty()) throw InputError(path + " contains no data");
    return x;
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    // Pinned clock for reproducible output files.
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct Manifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> items;

    void add(const std::string& k, const std::string& v) { items.emplace_back(k, v); }
    void write(std::ostream& os) const {
        os << "# stablegof " << kVersion << "\n# command: " << command << "\n# created: " << timestamp() << "\n";
        for (const auto& [k, v] : items) os << "# " << k << ": " << v << "\n";
    }
};

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

// ---- spectrum cache ----

std::optional<std::filesystem::path> cache_dir(bool disabled) {
    if (disabled) return std::nullopt;
    if (const char* d = std::getenv("STABLEGOF_CACHE_DIR"); d && *d) return std::filesystem::path(d);
    if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return std::filesystem::path(x) / "stablegof";
    if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "stablegof";
    return std::nullopt;
}

std::string checksum(const Spectrum& s) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (double l : s.lambdas) {
        const auto* p = reinterpret_cast<const unsigned char*>(&l);
        for (std::size_t i = 0; i < sizeof l; ++i) h = (h ^ p[i]) * 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

struct CachedSpectrum {
    std::shared_ptr<const Spectrum> spectrum;
    std::string name;
    std::string sum;
};

CachedSpectrum get_spectrum(const KernelSpec& spec, int N, const std::optional<std::filesystem::path>& dir) {
    CachedSpectrum c;
    c.name = spectrum_cache_name(spec, N);
    if (dir) {
        const auto path = *dir / c.name;
        if (std::filesystem::exists(path)) {
            try {
                auto s = std::make_shared<Spectrum>(load_spectrum(path.string()));
                if (s->N == N && s->kernel.kind == spec.kind && s->kernel.alpha == spec.alpha &&
                    s->kernel.kappa == spec.kappa) {
                    c.spectrum = s;
                    c.sum = checksum(*s);
                    return c;
                }
            } catch (const Error&) {
                // Unreadable cache entries are rebuilt.
            }
        }
    }
    auto s = std::make_shared<Spectrum>(compute_spectrum(spec, N));
    if (dir) {
        std::filesystem::create_directories(*dir);
        save_spectrum(*s, (*dir / c.name).string());
    }
    c.spectrum = s;
    c.sum = checksum(*s);
    return c;
}

KernelSpec mle_kernel(Hypothesis h, double alpha, double kappa) {
    return h == Hypothesis::H1 ? KernelSpec::mle_h1(alpha, kappa) : KernelSpec::mle_h2(alpha, kappa);
}

// ---- critical-value tables ----

struct TableRow {
    double alpha, kappa, xi, value, bound;
};

struct Table {
    std::map<std::string, std::string> manifest;
    std::vector<TableRow> rows;
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read table " + path);
    Table t;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos) t.manifest[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
            continue;
        }
        if (!header) {
            if (line != "alpha,kappa,xi,critical_value,series_bound") throw InputError(path + " is not a critical-value table");
            header = true;
            continue;
        }
        std::vector<double> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto v = to_double(tok);
            if (!v) throw InputError("malformed row in " + path + ": " + line);
            f.push_back(*v);
        }
        if (f.size() != 5) throw InputError("malformed row in " + path + ": " + line);
        if (std::isfinite(f[3])) t.rows.push_back({f[0], f[1], f[2], f[3], f[4]});
    }
    if (!header) throw InputError(path + " is not a critical-value table");
    return t;
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

CriticalCurve curve_from(const Table& t, double kappa, double xi) {
    CriticalCurve c;
    c.kappa = kappa;
    c.xi = xi;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : t.rows)
        if (same(r.kappa, kappa) && same(r.xi, xi)) pts.emplace_back(r.alpha, r.value);
    std::sort(pts.begin(), pts.end());
    for (const auto& [a, v] : pts) {
        c.alpha.push_back(a);
        c.value.push_back(v);
    }
    return c;
}

// ---- commands ----

struct EstimateArgs {
    std::string input;
    std::string estimator = "mle";
    std::string weight = "exp_abs:1";
    std::optional<double> alpha0;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    const auto x = read_column(a.input);
    FitOptions fo;
    if (a.alpha0) fo.fixed_alpha = *a.alpha0;
    const Estimator est = parse_estimator(a.estimator);
    const WeightSpec w = parse_weight(a.weight);
    const FitReport r = est == Estimator::mle ? mle_fit(x, fo) : eise_fit(x, w, fo);
    const StableParams& p = r.params;

    // Asymptotic covariance of sqrt(n)(theta_hat - theta) at the standard case.
    Eigen::Matrix3d V = Eigen::Matrix3d::Zero();
    const bool alpha_free = !a.alpha0 && p.alpha < 2.0;
    if (est == Estimator::mle) {
        const FisherInfo fi = p.alpha < 2.0 ? fisher_info(p.alpha) : gaussian_location_scale_info();
        if (alpha_free) {
            V = fi.inverse();
        } else {
            V(0, 0) = 1.0 / fi.I11;
            V(1, 1) = 1.0 / fi.I22;
        }
    } else {
        const EiseMatrices m = eise_matrices(p.alpha, w);
        if (alpha_free) {
            V = m.J;
        } else {
            V(0, 0) = m.H(0, 0) / (m.A(0, 0) * m.A(0, 0));
            V(1, 1) = m.H(1, 1) / (m.A(1, 1) * m.A(1, 1));
        }
    }
    const double n = static_cast<double>(x.size());
    const double se_mu = p.sigma * std::sqrt(V(0, 0) / n);
    const double se_sigma = p.sigma * std::sqrt(V(1, 1) / n);
    const double se_alpha = alpha_free ? std::sqrt(V(2, 2) / n) : NAN;

    Manifest m{"estimate", {}};
    m.add("input", a.input);
    m.add("estimator", a.estimator);
    if (est == Estimator::eise) m.add("weight", a.weight);
    m.add("alpha0", a.alpha0 ? fmt(*a.alpha0) : "free");
    m.write(out);
    out << "n," << x.size() << "\n";
    out << "mu," << fmt(p.mu) << "\nsigma," << fmt(p.sigma) << "\nalpha," << fmt(p.alpha) << "\n";
    out << "se_mu," << fmt(se_mu) << "\nse_sigma," << fmt(se_sigma) << "\nse_alpha," << fmt(se_alpha) << "\n";
    out << "objective," << fmt(r.objective) << "\niterations," << r.iterations << "\nprojected_gradient,"
        << fmt(r.projected_gradient) << "\nconverged," << (r.converged ? "true" : "false") << "\nalpha_at_boundary,"
        << (r.alpha_at_boundary ? "true" : "false") << "\n";
    return kOk;
}

struct TestArgs {
    std::string input;
    double kappa = 1.0;
    std::string hypothesis = "H1";
    std::optional<double> alpha0;
    std::string table;
    std::string method = "plugin";
    std::vector<double> range{0.0, 2.0};
    bool csv = false;
};

int cmd_test(const TestArgs& a, std::ostream& out) {
    const Hypothesis h = parse_hypothesis(a.hypothesis);
    if (h == Hypothesis::H2 && !a.alpha0) throw UsageError("H2 requires --alpha0");
    if (h == Hypothesis::H1 && a.alpha0) throw UsageError("--alpha0 applies to H2 only");
    H1Method method;
    if (a.method == "plugin")
        method = H1Method::plugin;
    else if (a.method == "sup_all")
        method = H1Method::sup_all;
    else if (a.method == "sup_range")
        method = H1Method::sup_range;
    else
        throw UsageError("method must be plugin, sup_all or sup_range");
    if (a.range.size() != 2) throw UsageError("--range takes two values a,b");

    const auto x = read_column(a.input);
    TestOptions to;
    to.hypothesis = h;
    to.alpha0 = a.alpha0;
    const TestOutcome t = fit_and_test(x, {a.kappa}, to).front();

    const double a_key = h == Hypothesis::H2 ? *a.alpha0 : t.fitted.alpha;
    std::ostringstream hint;
    hint << "run: stablegof table --hypothesis " << hypothesis_name(h) << " --kappa " << fmt(a.kappa)
         << (h == Hypothesis::H2 ? " --alpha " + fmt(*a.alpha0) : std::string()) << " --output <file>, then pass --table <file>";
    if (a.table.empty()) throw InputError("no critical-value table given; " + hint.str());
    const Table tab = read_table(a.table);
    if (auto it = tab.manifest.find("hypothesis"); it != tab.manifest.end() && it->second != hypothesis_name(h))
        throw InputError(a.table + " holds " + it->second + " critical values; " + hint.str());

    double crit[2];
    const double xis[2] = {0.10, 0.05};
    for (int i = 0; i < 2; ++i) {
        const CriticalCurve c = curve_from(tab, a.kappa, xis[i]);
        if (c.alpha.empty())
            throw InputError("no critical values for kappa " + fmt(a.kappa) + " in " + a.table + "; " + hint.str());
        if (h == Hypothesis::H2) {
            const auto it = std::find_if(c.alpha.begin(), c.alpha.end(), [&](double v) { return same(v, a_key); });
            if (it == c.alpha.end())
                throw InputError("no critical values for alpha " + fmt(a_key) + ", kappa " + fmt(a.kappa) + " in " +
                                 a.table + "; " + hint.str());
            crit[i] = c.value[it - c.alpha.begin()];
        } else {
            crit[i] = h1_decision(t.statistic, method, c, t.fitted.alpha, a.range[0], a.range[1]).threshold;
        }
    }

    Manifest m{"test", {}};
    m.add("input", a.input);
    m.add("hypothesis", hypothesis_name(h));
    if (a.alpha0) m.add("alpha0", fmt(*a.alpha0));
    m.add("kappa", fmt(a.kappa));
    m.add("table", a.table);
    if (h == Hypothesis::H1) m.add("method", a.method);
    m.write(out);
    auto decision = [&](int i) { return t.statistic > crit[i] ? "reject" : "accept"; };
    if (a.csv) {
        out << "n,mu,sigma,alpha,kappa,hypothesis,statistic,critical_10,critical_05,decision_10,decision_05\n";
        out << t.n << "," << fmt(t.fitted.mu) << "," << fmt(t.fitted.sigma) << "," << fmt(t.fitted.alpha) << ","
            << fmt(t.kappa) << "," << hypothesis_name(h) << "," << fmt(t.statistic) << "," << fmt(crit[0]) << ","
            << fmt(crit[1]) << "," << decision(0) << "," << decision(1) << "\n";
    } else {
        out << "n: " << t.n << "\nmu: " << fmt(t.fitted.mu) << "\nsigma: " << fmt(t.fitted.sigma)
            << "\nalpha: " << fmt(t.fitted.alpha) << "\nkappa: " << fmt(t.kappa) << "\nstatistic: " << fmt(t.statistic)
            << "\ncritical_10: " << fmt(crit[0]) << "  " << decision(0) << "\ncritical_05: " << fmt(crit[1]) << "  "
            << decision(1) << "\n";
    }
    return kOk;
}

struct TableArgs {
    std::string hypothesis = "H1";
    std::string alpha;
    std::string kappa = "1,2.5,5,10";
    std::string xi = "0.10,0.05";
    int N = 800;
    int l = 0;
    int m = 0;
    std::string output;
    bool no_cache = false;
    int threads = 0;
};

int cmd_table(const TableArgs& a, std::ostream& out, std::ostream& err) {
    const Hypothesis h = parse_hypothesis(a.hypothesis);
    const std::vector<double> alphas =
        parse_list(a.alpha.empty() ? (h == Hypothesis::H1 ? "0.5:1.9:0.1" : "0.5:2.0:0.1") : a.alpha, "alpha");
    const std::vector<double> kappas = parse_list(a.kappa, "kappa");
    const std::vector<double> xis = parse_list(a.xi, "xi");
    for (double k : kappas)
        if (!(k >= 1.0)) throw DomainError("table kappa values must be >= 1");
    for (double al : alphas)
        if (!(al > 0.0 && al <= 2.0) || (h == Hypothesis::H1 && al >= 2.0))
            throw DomainError("alpha " + fmt(al) + " is outside the range for " + hypothesis_name(h));
    for (double xi : xis)
        if (!(xi > 0.0 && xi < 0.5)) throw DomainError("xi must lie in (0, 0.5)");
    if (a.N < 16 || a.N % 2) throw DomainError("N must be even and at least 16");
    const auto dir = cache_dir(a.no_cache);

    struct Cell {
        double alpha, kappa;
        std::vector<QuantileResult> q;
        std::string spectrum, sum, error;
    };
    std::vector<Cell> cells;
    for (double al : alphas)
        for (double k : kappas) cells.push_back({al, k, {}, {}, {}, {}});

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < cells.size();) {
            Cell& c = cells[i];
            try {
                const CachedSpectrum cs = get_spectrum(mle_kernel(h, c.alpha, c.kappa), a.N, dir);
                c.spectrum = cs.name;
                c.sum = cs.sum;
                InversionConfig ic = InversionConfig::defaults(cs.spectrum);
                if (a.l > 0) ic.l = a.l;
                if (a.m > 0) ic.m = a.m;
                for (double xi : xis) c.q.push_back(quantile_dk_bounded(xi, ic));
            } catch (const std::exception& e) {
                c.error = e.what();
            }
        }
    };
    const int nt = std::max(1, std::min<int>(a.threads > 0 ? a.threads : std::thread::hardware_concurrency(),
                                             static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    Manifest m{"table", {}};
    m.add("hypothesis", hypothesis_name(h));
    m.add("kernel", h == Hypothesis::H1 ? "mle_h1" : "mle_h2");
    m.add("alpha", join(alphas));
    m.add("kappa", join(kappas));
    m.add("xi", join(xis));
    m.add("N", std::to_string(a.N));
    m.add("l", a.l > 0 ? std::to_string(a.l) : "default (25 for kappa <= 2.5, else 10)");
    m.add("m", a.m > 0 ? std::to_string(a.m) : "default (500 for kappa <= 5, else 300)");
    m.add("cache", dir ? dir->string() : "disabled");
    bool partial = false;
    for (const auto& c : cells) {
        if (!c.error.empty()) {
            partial = true;
            m.add("failed", "alpha " + fmt(c.alpha) + " kappa " + fmt(c.kappa) + ": " + c.error);
            err << "cell alpha=" << fmt(c.alpha) << " kappa=" << fmt(c.kappa) << " failed: " << c.error << "\n";
        } else {
            m.add("spectrum", c.spectrum + " " + c.sum);
        }
    }
    if (partial) m.add("partial", "true");

    std::ofstream file;
    if (!a.output.empty()) {
        file.open(a.output);
        if (!file) throw InputError("cannot write " + a.output);
    }
    std::ostream& os = a.output.empty() ? out : file;
    m.write(os);
    os << "alpha,kappa,xi,critical_value,series_bound\n";
    for (const auto& c : cells)
        for (std::size_t j = 0; j < xis.size(); ++j) {
            os << fmt(c.alpha) << "," << fmt(c.kappa) << "," << fmt(xis[j]) << ",";
            if (c.error.empty())
                os << fmt(c.q[j].x) << "," << fmt(c.q[j].series_bound) << "\n";
            else
                os << "nan,nan\n";
        }
    return partial ? kNumerical : kOk;
}

struct SimulateArgs {
    std::string config;
    std::uint64_t seed = 1;
    std::string output;
    int threads = 0;
    bool no_cache = false;
};

struct Experiment {
    std::string name;
    ExperimentConfig cfg;
    std::vector<double> xis{0.10, 0.05};
    std::vector<CriticalValue> critical;  // explicit values for power runs
    int N = 800;
};

Experiment parse_experiment(const std::string& name, const boost::property_tree::ptree& sec, const SimulateArgs& a) {
    static const std::vector<std::string> known{"n", "alpha", "kappa", "hypothesis", "estimator", "weight", "replications",
                                                "seed", "xi", "alternative", "critical", "N"};
    for (const auto& kv : sec)
        if (std::find(known.begin(), known.end(), kv.first) == known.end())
            throw InputError("[" + name + "]: unknown key '" + kv.first + "'");
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        if (auto v = sec.get_optional<std::string>(k)) return trim(*v);
        return std::nullopt;
    };
    auto require = [&](const std::string& k) {
        auto v = get(k);
        if (!v) throw InputError("[" + name + "]: missing key '" + k + "'");
        return *v;
    };
    auto integer = [&](const std::string& k, const std::string& s) {
        const auto v = to_double(s);
        if (!v || *v < 0 || *v != std::floor(*v)) throw InputError("[" + name + "]: " + k + " must be a non-negative integer");
        return static_cast<std::uint64_t>(*v);
    };
    auto number = [&](const std::string& k, const std::string& s) {
        const auto v = to_double(s);
        if (!v) throw InputError("[" + name + "]: " + k + " must be a number");
        return *v;
    };
    Experiment e;
    e.name = name;
    ExperimentConfig& c = e.cfg;
    c.n = integer("n", require("n"));
    c.alpha = number("alpha", require("alpha"));
    c.kappas = parse_list(require("kappa"), "kappa");
    c.hypothesis = parse_hypothesis(get("hypothesis").value_or("H1"));
    c.estimator = parse_estimator(get("estimator").value_or("mle"));
    if (auto w = get("weight")) c.eise_weight = parse_weight(*w);
    c.replications = integer("replications", get("replications").value_or("2000"));
    c.seed = get("seed") ? integer("seed", *get("seed")) : a.seed;
    c.threads = a.threads;
    if (auto x = get("xi")) e.xis = parse_list(*x, "xi");
    if (auto n = get("N")) e.N = static_cast<int>(integer("N", *n));
    if (auto alt = get("alternative")) c.alternative = Alternative::parse(*alt);
    if (auto crit = get("critical"); crit && *crit != "asymptotic") {
        if (!c.alternative) throw InputError("[" + name + "]: critical values apply to power runs only");
        // kappa:xi:value entries separated by commas
        std::stringstream ss(*crit);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::vector<double> f;
            std::stringstream ts(trim(tok));
            std::string part;
            while (std::getline(ts, part, ':')) f.push_back(number("critical", part));
            if (f.size() != 3) throw InputError("[" + name + "]: critical entries are kappa:xi:value");
            e.critical.push_back({f[0], f[1], f[2]});
        }
    }
    c.validate();
    if (c.hypothesis == Hypothesis::H1 && c.alpha >= 2.0) throw DomainError("[" + name + "]: H1 needs alpha < 2");
    for (double xi : e.xis)
        if (!(xi > 0.0 && xi < 0.5)) throw DomainError("[" + name + "]: xi must lie in (0, 0.5)");
    return e;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::ini_parser::read_ini(a.config, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(std::string("cannot parse config: ") + e.what());
    }
    std::vector<Experiment> exps;
    for (const auto& [name, sec] : pt) {
        if (sec.empty()) throw InputError("config key '" + name + "' is outside any [experiment] section");
        exps.push_back(parse_experiment(name, sec, a));
    }
    if (exps.empty()) throw InputError("config defines no experiments");
    const auto dir = cache_dir(a.no_cache);

    Manifest m{"simulate", {}};
    m.add("config", a.config);
    m.add("seed", std::to_string(a.seed));
    std::ostringstream rows;
    rows << "experiment,kind,n,alpha,hypothesis,estimator,alternative,kappa,xi,value,se,critical_value,replications,"
            "failures,seed\n";
    bool failed = false;
    for (const auto& e : exps) {
        const ExperimentConfig& c = e.cfg;
        std::ostringstream desc;
        desc << "n=" << c.n << " alpha=" << fmt(c.alpha) << " kappa=" << join(c.kappas) << " "
             << hypothesis_name(c.hypothesis) << " " << (c.estimator == Estimator::mle ? "mle" : "eise")
             << " replications=" << c.replications << " seed=" << c.seed
             << (c.alternative ? " alternative=" + c.alternative->describe() : std::string());
        m.add("experiment " + e.name, desc.str());
        auto prefix = [&](const char* kind) {
            std::ostringstream p;
            p << e.name << "," << kind << "," << c.n << "," << fmt(c.alpha) << "," << hypothesis_name(c.hypothesis) << ","
              << (c.estimator == Estimator::mle ? "mle" : "eise") << ","
              << (c.alternative ? c.alternative->describe() : "null") << ",";
            return p.str();
        };
        try {
            std::ostringstream block;
            if (!c.alternative) {
                const CriticalStudy s = simulate_critical(c, e.xis);
                for (const auto& cell : s.cells)
                    for (const auto& q : cell.quantiles)
                        block << prefix("critical") << fmt(cell.kappa) << "," << fmt(q.xi) << "," << fmt(q.value) << ","
                              << fmt(q.se) << ",nan," << c.replications << "," << s.failures << "," << c.seed << "\n";
            } else {
                std::vector<CriticalValue> crit = e.critical;
                if (crit.empty()) {
                    for (double k : c.kappas) {
                        const CachedSpectrum cs = get_spectrum(mle_kernel(c.hypothesis, c.alpha, k), e.N, dir);
                        m.add("spectrum", cs.name + " " + cs.sum);
                        const InversionConfig ic = InversionConfig::defaults(cs.spectrum);
                        for (double xi : e.xis) crit.push_back({k, xi, quantile_dk(xi, ic)});
                    }
                }
                const PowerStudy s = power_study(c, crit);
                for (const auto& p : s.cells)
                    block << prefix("power") << fmt(p.kappa) << "," << fmt(p.xi) << "," << fmt(p.power) << ","
                          << fmt(p.se) << "," << fmt(p.critical_value) << "," << c.replications << "," << s.failures << ","
                          << c.seed << "\n";
            }
            rows << block.str();
        } catch (const std::exception& ex) {
            failed = true;
            m.add("failed " + e.name, ex.what());
            err << "experiment " << e.name << " failed: " << ex.what() << "\n";
        }
    }
    if (failed) m.add("partial", "true");

    std::ofstream file;
    if (!a.output.empty()) {
        file.open(a.output);
        if (!file) throw InputError("cannot write " + a.output);
    }
    std::ostream& os = a.output.empty() ? out : file;
    m.write(os);
    os << rows.str();
    return failed ? kNumerical : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Goodness-of-fit tests for symmetric stable laws via the empirical characteristic function"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    EstimateArgs ea;
    auto* est = app.add_subcommand("estimate", "Fit (mu, sigma, alpha) to one column of data");
    est->add_option("input", ea.input, "Data file, one value per line")->required();
    est->add_option("--estimator", ea.estimator, "mle or eise")->capture_default_str();
    est->add_option("--weight", ea.weight, "EISE weight: exp_abs:KAPPA or exp_power:NU:ALPHA")->capture_default_str();
    est->add_option("--alpha0", ea.alpha0, "Hold alpha fixed at this value");

    TestArgs ta;
    auto* tst = app.add_subcommand("test", "Compute D_{n,kappa} and compare with tabulated critical values");
    tst->add_option("input", ta.input, "Data file, one value per line")->required();
    tst->add_option("--kappa", ta.kappa, "Weight parameter kappa")->required();
    tst->add_option("--hypothesis", ta.hypothesis, "H1 (alpha estimated) or H2 (alpha fixed)")->capture_default_str();
    tst->add_option("--alpha0", ta.alpha0, "Null alpha under H2");
    tst->add_option("--table", ta.table, "Critical-value table written by 'table'");
    tst->add_option("--method", ta.method, "H1 threshold: plugin, sup_all or sup_range")->capture_default_str();
    tst->add_option("--range", ta.range, "Alpha interval a,b for sup_range")->delimiter(',')->expected(2);
    tst->add_flag("--csv", ta.csv, "Machine-readable output");

    TableArgs tb;
    auto* tab = app.add_subcommand("table", "Asymptotic critical values from the kernel spectrum");
    tab->add_option("--hypothesis", tb.hypothesis, "H1 or H2")->capture_default_str();
    tab->add_option("--alpha", tb.alpha, "Alpha list a,b,c or range start:stop:step");
    tab->add_option("--kappa", tb.kappa, "Kappa list (each >= 1)")->capture_default_str();
    tab->add_option("--xi", tb.xi, "Upper-tail levels")->capture_default_str();
    tab->add_option("--N", tb.N, "Quadrature nodes")->capture_default_str();
    tab->add_option("--l", tb.l, "Series terms (default by kappa)");
    tab->add_option("--m", tb.m, "Product terms (default by kappa)");
    tab->add_option("--output,-o", tb.output, "Output file (default stdout)");
    tab->add_flag("--no-cache", tb.no_cache, "Do not read or write the spectrum cache");
    tab->add_option("--threads", tb.threads, "Worker threads (0 = all cores)");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo critical values and power from a config file");
    sim->add_option("config", sa.config, "INI config, one [section] per experiment")->required();
    sim->add_option("--seed", sa.seed, "Master seed for sections without their own")->capture_default_str();
    sim->add_option("--output,-o", sa.output, "Output file (default stdout)");
    sim->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");
    sim->add_flag("--no-cache", sa.no_cache, "Do not read or write the spectrum cache");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*est) return cmd_estimate(ea, out);
        if (*tst) return cmd_test(ta, out);
        if (*tab) return cmd_table(tb, out, err);
        if (*sim) return cmd_simulate(sa, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const Error& e) {
        err << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return kInput;
    }
    return kUsage;
}

}  // namespace stablegof::cli
