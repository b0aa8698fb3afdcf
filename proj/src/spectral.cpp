#include "stablegof/spectral.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace stablegof {

namespace {
constexpr double kEigenCutoff = 1e-13;
}

double Spectrum::mean() const {
    double s = 0.0;
    for (double l : lambdas) s += 1.0 / l;
    return s;
}

Discretization discretize(const Kernel& k, int N) {
    if (N < 16 || N % 2 != 0) throw DomainError("node count must be even and at least 16");
    Discretization d;
    d.grid.resize(N);
    for (int i = 0; i < N; ++i) d.grid[i] = -1.0 + (2.0 * i + 1.0) / N;
    d.K.resize(N, N);

    // Rows are dealt round-robin so triangular work balances across threads.
    const int nt = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    auto work = [&](int first) {
        for (int i = first; i < N; i += nt)
            for (int j = 0; j <= i; ++j) d.K(i, j) = k.transformed(d.grid[i], d.grid[j]);
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) d.K(i, j) = d.K(j, i);
    return d;
}

Spectrum eigen_spectrum(const Discretization& d, const KernelSpec& spec) {
    const int N = static_cast<int>(d.grid.size());
    const Eigen::MatrixXd M = d.K * (2.0 / N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolve failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double vmax = ev.maxCoeff();
    Spectrum s;
    s.N = N;
    s.grid = d.grid;
    s.kernel = spec;
    s.matrix_trace = M.trace();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] > kEigenCutoff * vmax)
            s.lambdas.push_back(1.0 / ev[i]);
        else
            ++s.discarded;
    }
    std::sort(s.lambdas.begin(), s.lambdas.end());
    return s;
}

Spectrum compute_spectrum(const KernelSpec& spec, int N) {
    const Kernel k(spec);
    return eigen_spectrum(discretize(k, N), spec);
}

double fredholm_det(double lambda, const Spectrum& s, int m) {
    if (m > static_cast<int>(s.lambdas.size())) throw DomainError("not enough eigenvalues for the requested product");
    double p = 1.0;
    for (int j = 0; j < m; ++j) p *= 1.0 - lambda / s.lambdas[j];
    return p;
}

double kernel_trace(const Kernel& k) {
    // Even in u; the diagonal has an endpoint singularity only for kappa <= 1.
    auto f = [&](double u) { return k.transformed(u, u); };
    const quad::Options opt{1e-9, 1e-14, 8000};
    auto a = quad::adaptive(f, 0.0, 0.5, opt);
    auto b = quad::adaptive(f, 0.5, 1.0, opt);
    return 2.0 * (quad::require(a, "kernel trace") + quad::require(b, "kernel trace"));
}

std::string spectrum_cache_name(const KernelSpec& spec, int N) {
    std::ostringstream os;
    os << kernel_kind_name(spec.kind) << "_a" << std::setprecision(10) << spec.alpha << "_k" << spec.kappa;
    if (spec.kind == KernelKind::eise_h1 || spec.kind == KernelKind::eise_fixed)
        os << "_w" << (spec.weight.kind == WeightSpec::Kind::exp_abs ? "abs" : "pow") << spec.weight.kappa_or_nu << "_"
           << spec.weight.bar_alpha;
    os << "_N" << N << ".spec";
    return os.str();
}

void save_spectrum(const Spectrum& s, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write spectrum file " + path);
        out << std::setprecision(17);
        out << "stablegof-spectrum 1\n";
        out << "kind " << kernel_kind_name(s.kernel.kind) << "\n";
        out << "alpha " << s.kernel.alpha << "\n";
        out << "kappa " << s.kernel.kappa << "\n";
        out << "weight " << (s.kernel.weight.kind == WeightSpec::Kind::exp_abs ? "exp_abs" : "exp_power") << " "
            << s.kernel.weight.kappa_or_nu << " " << s.kernel.weight.bar_alpha << "\n";
        out << "N " << s.N << "\n";
        out << "discarded " << s.discarded << "\n";
        out << "matrix_trace " << s.matrix_trace << "\n";
        out << "grid " << s.grid.size() << "\n";
        for (double g : s.grid) out << g << "\n";
        out << "lambdas " << s.lambdas.size() << "\n";
        for (double l : s.lambdas) out << l << "\n";
        if (!out) throw Error("error writing spectrum file " + path);
    }
    // Atomic replace so concurrent readers never see a partial file.
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot move spectrum file into " + path);
}

Spectrum load_spectrum(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read spectrum file " + path);
    auto expect = [&](const char* key) {
        std::string k;
        if (!(in >> k) || k != key) throw Error("malformed spectrum file " + path + " (expected '" + key + "')");
    };
    Spectrum s;
    int version = 0;
    expect("stablegof-spectrum");
    in >> version;
    if (version != 1) throw Error("unsupported spectrum file version in " + path);
    std::string kind, wkind;
    expect("kind");
    in >> kind;
    s.kernel.kind = parse_kernel_kind(kind);
    expect("alpha");
    in >> s.kernel.alpha;
    expect("kappa");
    in >> s.kernel.kappa;
    expect("weight");
    in >> wkind >> s.kernel.weight.kappa_or_nu >> s.kernel.weight.bar_alpha;
    s.kernel.weight.kind = wkind == "exp_abs" ? WeightSpec::Kind::exp_abs : WeightSpec::Kind::exp_power;
    expect("N");
    in >> s.N;
    expect("discarded");
    in >> s.discarded;
    expect("matrix_trace");
    in >> s.matrix_trace;
    std::size_t n = 0;
    expect("grid");
    in >> n;
    s.grid.resize(n);
    for (auto& g : s.grid) in >> g;
    expect("lambdas");
    in >> n;
    s.lambdas.resize(n);
    for (auto& l : s.lambdas) in >> l;
    if (!in) throw Error("truncated spectrum file " + path);
    return s;
}

}  // namespace stablegof
