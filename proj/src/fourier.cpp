#include "kamred/fourier.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace kamred {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_same_dim(const FourierMatrixSeries& f, const FourierMatrixSeries& g) {
    if (f.dim() != g.dim())
        throw std::invalid_argument("fourier: dimension mismatch");
}

} // namespace

int l1_norm(const MultiIndex& k) {
    int s = 0;
    for (int c : k)
        s += std::abs(c);
    return s;
}

bool is_zero_index(const MultiIndex& k) {
    for (int c : k)
        if (c != 0)
            return false;
    return true;
}

MultiIndex negate(const MultiIndex& k) {
    MultiIndex m(k);
    for (int& c : m)
        c = -c;
    return m;
}

FourierMatrixSeries::FourierMatrixSeries(int d, bool real_symmetric)
    : d_(d), real_symmetric_(real_symmetric) {
    if (d < 1)
        throw std::invalid_argument("FourierMatrixSeries: dimension must be >= 1");
}

FourierMatrixSeries FourierMatrixSeries::constant(int d, const Mat2& A) {
    FourierMatrixSeries f(d, true);
    f.set_coefficient(MultiIndex(static_cast<std::size_t>(d), 0), Mat2c(A));
    return f;
}

FourierMatrixSeries FourierMatrixSeries::constant(int d, const Mat2c& A, bool real_symmetric) {
    FourierMatrixSeries f(d, real_symmetric);
    f.set_coefficient(MultiIndex(static_cast<std::size_t>(d), 0), A);
    return f;
}

FourierMatrixSeries FourierMatrixSeries::identity(int d) {
    return constant(d, Mat2::identity());
}

void FourierMatrixSeries::add_tail_mass(double m) {
    if (m < 0)
        throw std::invalid_argument("FourierMatrixSeries: tail mass must be non-negative");
    tail_bound_ += m;
}

int FourierMatrixSeries::max_order() const {
    int n = 0;
    for (const auto& [k, c] : coeffs_)
        n = std::max(n, l1_norm(k));
    return n;
}

Mat2c FourierMatrixSeries::coefficient(const MultiIndex& k) const {
    auto it = coeffs_.find(k);
    return it == coeffs_.end() ? Mat2c{} : it->second;
}

void FourierMatrixSeries::set_coefficient(const MultiIndex& k, const Mat2c& value) {
    if (static_cast<int>(k.size()) != d_)
        throw std::invalid_argument("FourierMatrixSeries: multi-index dimension mismatch");
    if (value.is_zero())
        coeffs_.erase(k);
    else
        coeffs_[k] = value;
}

void FourierMatrixSeries::add_to_coefficient(const MultiIndex& k, const Mat2c& value) {
    set_coefficient(k, coefficient(k) + value);
}

void FourierMatrixSeries::set_real_pair(const MultiIndex& k, const Mat2c& value) {
    set_coefficient(k, value);
    if (!is_zero_index(k))
        set_coefficient(negate(k), value.conj());
}

Mat2c FourierMatrixSeries::average() const {
    return coefficient(MultiIndex(static_cast<std::size_t>(d_), 0));
}

Mat2c FourierMatrixSeries::evaluate(std::span<const double> theta) const {
    if (static_cast<int>(theta.size()) != d_)
        throw std::invalid_argument("FourierMatrixSeries::evaluate: theta dimension mismatch");
    Mat2c sum{};
    for (const auto& [k, c] : coeffs_) {
        double phase = 0;
        for (std::size_t i = 0; i < k.size(); ++i)
            phase += k[i] * theta[i];
        sum = sum + c * std::polar(1.0, two_pi * phase);
    }
    return sum;
}

Mat2 FourierMatrixSeries::evaluate_real(std::span<const double> theta, double tol) const {
    Mat2c v = evaluate(theta);
    if (v.max_imag() > tol * (1.0 + op_norm(v)))
        throw std::runtime_error("FourierMatrixSeries::evaluate_real: imaginary part above tolerance");
    return v.real_part();
}

double FourierMatrixSeries::coefficient_l1() const {
    double s = 0;
    for (const auto& [k, c] : coeffs_)
        s += op_norm(c);
    return s;
}

void FourierMatrixSeries::check_real_symmetry(double tol) const {
    if (!real_symmetric_)
        return;
    for (const auto& [k, c] : coeffs_) {
        Mat2c mirror = coefficient(negate(k));
        if (op_norm(c - mirror.conj()) > tol * (1.0 + op_norm(c)))
            throw std::runtime_error("FourierMatrixSeries: conjugate symmetry violated");
    }
}

double weighted_norm(const FourierMatrixSeries& f, const WeightSpec& w, double r) {
    if (!(r > 0))
        throw std::domain_error("weighted_norm: radius must be positive");
    double s = 0;
    for (const auto& [k, c] : f.coefficients()) {
        int n = l1_norm(k);
        double weight = (n == 0) ? 1.0 : std::exp(two_pi * w.value(n) * r);
        s += op_norm(c) * weight;
    }
    return s + f.tail_bound();
}

double sup_norm(const FourierMatrixSeries& f, int samples_per_dim) {
    int d = f.dim();
    std::vector<double> theta(static_cast<std::size_t>(d), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    double best = 0;
    while (true) {
        for (int i = 0; i < d; ++i)
            theta[static_cast<std::size_t>(i)] = static_cast<double>(idx[static_cast<std::size_t>(i)]) / samples_per_dim;
        best = std::max(best, op_norm(f.evaluate(theta)));
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < samples_per_dim)
                break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d)
            break;
    }
    return best;
}

FourierMatrixSeries add(const FourierMatrixSeries& f, const FourierMatrixSeries& g) {
    require_same_dim(f, g);
    FourierMatrixSeries out(f.dim(), f.real_symmetric() && g.real_symmetric());
    out.add_tail_mass(f.tail_bound() + g.tail_bound());
    for (const auto& [k, c] : f.coefficients())
        out.add_to_coefficient(k, c);
    for (const auto& [k, c] : g.coefficients())
        out.add_to_coefficient(k, c);
    return out;
}

FourierMatrixSeries subtract(const FourierMatrixSeries& f, const FourierMatrixSeries& g) {
    return add(f, scale(g, -1.0));
}

FourierMatrixSeries scale(const FourierMatrixSeries& f, double s) {
    FourierMatrixSeries out(f.dim(), f.real_symmetric());
    out.add_tail_mass(f.tail_bound() * std::abs(s));
    for (const auto& [k, c] : f.coefficients())
        out.set_coefficient(k, c * s);
    return out;
}

FourierMatrixSeries scale(const FourierMatrixSeries& f, cplx s) {
    FourierMatrixSeries out(f.dim(), f.real_symmetric() && s.imag() == 0.0);
    out.add_tail_mass(f.tail_bound() * std::abs(s));
    for (const auto& [k, c] : f.coefficients())
        out.set_coefficient(k, c * s);
    return out;
}

FourierMatrixSeries multiply(const FourierMatrixSeries& f, const FourierMatrixSeries& g) {
    require_same_dim(f, g);
    FourierMatrixSeries out(f.dim(), f.real_symmetric() && g.real_symmetric());
    MultiIndex k(static_cast<std::size_t>(f.dim()), 0);
    for (const auto& [m, a] : f.coefficients()) {
        for (const auto& [n, b] : g.coefficients()) {
            for (std::size_t i = 0; i < k.size(); ++i)
                k[i] = m[i] + n[i];
            out.add_to_coefficient(k, a * b);
        }
    }
    // Cross terms with mass already pushed into the tails, bounded through
    // the coefficient l1 norms (<= any weighted norm).
    double tf = f.tail_bound(), tg = g.tail_bound();
    if (tf > 0 || tg > 0)
        out.add_tail_mass(tf * (g.coefficient_l1() + tg) + tg * f.coefficient_l1());
    return out;
}

FourierMatrixSeries conjugate_constant(const Mat2& P, const FourierMatrixSeries& f, const Mat2& P_inv) {
    FourierMatrixSeries out(f.dim(), f.real_symmetric());
    Mat2c Pc(P), Pic(P_inv);
    out.add_tail_mass(f.tail_bound() * op_norm(P) * op_norm(P_inv));
    for (const auto& [k, c] : f.coefficients())
        out.set_coefficient(k, Pc * c * Pic);
    return out;
}

FourierMatrixSeries left_multiply(const Mat2& P, const FourierMatrixSeries& f) {
    FourierMatrixSeries out(f.dim(), f.real_symmetric());
    Mat2c Pc(P);
    out.add_tail_mass(f.tail_bound() * op_norm(P));
    for (const auto& [k, c] : f.coefficients())
        out.set_coefficient(k, Pc * c);
    return out;
}

FourierMatrixSeries right_multiply(const FourierMatrixSeries& f, const Mat2& P) {
    FourierMatrixSeries out(f.dim(), f.real_symmetric());
    Mat2c Pc(P);
    out.add_tail_mass(f.tail_bound() * op_norm(P));
    for (const auto& [k, c] : f.coefficients())
        out.set_coefficient(k, c * Pc);
    return out;
}

FourierMatrixSeries truncate(const FourierMatrixSeries& f, double N, bool dotted) {
    if (N < 0)
        throw std::invalid_argument("truncate: N must be non-negative");
    FourierMatrixSeries out(f.dim(), f.real_symmetric());
    out.add_tail_mass(f.tail_bound());
    for (const auto& [k, c] : f.coefficients()) {
        int n = l1_norm(k);
        if (n > N + 1e-9)
            continue;
        if (dotted && n == 0)
            continue;
        out.set_coefficient(k, c);
    }
    return out;
}

FourierMatrixSeries directional_derivative(const FourierMatrixSeries& f, const Frequency& freq) {
    if (freq.dim() != f.dim())
        throw std::invalid_argument("directional_derivative: frequency dimension mismatch");
    FourierMatrixSeries out(f.dim(), f.real_symmetric());
    for (const auto& [k, c] : f.coefficients()) {
        if (is_zero_index(k))
            continue;
        double dot = 0;
        for (std::size_t i = 0; i < k.size(); ++i)
            dot += k[i] * freq.omega[i];
        out.set_coefficient(k, c * cplx(0.0, two_pi * dot));
    }
    return out;
}

FourierMatrixSeries compress(const FourierMatrixSeries& f, const WeightSpec& w, double r,
                             double rel_tol) {
    double norm = weighted_norm(f, w, r);
    double cut = rel_tol * norm;
    FourierMatrixSeries out(f.dim(), f.real_symmetric());
    out.add_tail_mass(f.tail_bound());
    double dropped = 0;
    for (const auto& [k, c] : f.coefficients()) {
        int n = l1_norm(k);
        double weight = (n == 0) ? 1.0 : std::exp(two_pi * w.value(n) * r);
        double mass = op_norm(c) * weight;
        if (mass <= cut && n != 0)
            dropped += mass;
        else
            out.set_coefficient(k, c);
    }
    out.add_tail_mass(dropped);
    return out;
}

std::pair<Mat2c, double> average_and_trace(const FourierMatrixSeries& f) {
    Mat2c avg = f.average();
    return {avg, avg.trace().real()};
}

namespace {

void print_num(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

} // namespace

void write_series(std::ostream& out, const FourierMatrixSeries& f) {
    out << "fourier-series 1\n";
    out << "d " << f.dim() << "\n";
    out << "real_symmetric " << (f.real_symmetric() ? 1 : 0) << "\n";
    out << "tail_bound ";
    print_num(out, f.tail_bound());
    out << "\n";
    out << "coefficients " << f.support_size() << "\n";
    for (const auto& [k, c] : f.coefficients()) {
        for (int v : k)
            out << v << " ";
        for (cplx e : {c.m11, c.m12, c.m21, c.m22}) {
            print_num(out, e.real());
            out << " ";
            print_num(out, e.imag());
            out << " ";
        }
        out << "\n";
    }
}

FourierMatrixSeries read_series(std::istream& in) {
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (!in || tag != "fourier-series" || version != 1)
        throw std::runtime_error("read_series: bad header");
    auto expect = [&](const char* key) {
        in >> tag;
        if (!in || tag != key)
            throw std::runtime_error(std::string("read_series: expected '") + key + "'");
    };
    int d = 0, rs = 0;
    double tail = 0;
    std::size_t count = 0;
    expect("d");
    in >> d;
    expect("real_symmetric");
    in >> rs;
    expect("tail_bound");
    in >> tail;
    expect("coefficients");
    in >> count;
    if (!in)
        throw std::runtime_error("read_series: truncated header");
    FourierMatrixSeries f(d, rs != 0);
    for (std::size_t i = 0; i < count; ++i) {
        MultiIndex k(static_cast<std::size_t>(d), 0);
        for (int& v : k)
            in >> v;
        double re[4], im[4];
        for (int j = 0; j < 4; ++j)
            in >> re[j] >> im[j];
        if (!in)
            throw std::runtime_error("read_series: truncated record");
        f.set_coefficient(k, Mat2c{{re[0], im[0]}, {re[1], im[1]}, {re[2], im[2]}, {re[3], im[3]}});
    }
    f.add_tail_mass(tail);
    return f;
}

void write_series_file(const std::string& path, const FourierMatrixSeries& f) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_series_file: cannot open " + path);
    write_series(out, f);
}

FourierMatrixSeries read_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_series_file: cannot open " + path);
    return read_series(in);
}

} // namespace kamred
