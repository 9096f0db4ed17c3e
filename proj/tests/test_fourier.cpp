#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kamred/fourier.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace kamred;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
const Mat2 J = Mat2::rotation_generator();

// cos(2 pi k.theta) * M as a real-symmetric series
FourierMatrixSeries cosine_series(int d, const MultiIndex& k, const Mat2& M) {
    FourierMatrixSeries f(d, true);
    f.set_real_pair(k, Mat2c(M) * 0.5);
    return f;
}

FourierMatrixSeries random_trig(std::mt19937_64& rng, int d, int max_order, int modes,
                                double amp = 1.0) {
    std::uniform_real_distribution<double> unif(-amp, amp);
    std::uniform_int_distribution<int> comp(-max_order, max_order);
    FourierMatrixSeries f(d, true);
    for (int m = 0; m < modes; ++m) {
        MultiIndex k(static_cast<std::size_t>(d));
        int budget = max_order;
        for (int i = 0; i < d; ++i) {
            int c = comp(rng);
            c = std::clamp(c, -budget, budget);
            k[static_cast<std::size_t>(i)] = c;
            budget -= std::abs(c);
        }
        Mat2c coeff{cplx(unif(rng), unif(rng)), cplx(unif(rng), unif(rng)),
                    cplx(unif(rng), unif(rng)), cplx(unif(rng), unif(rng))};
        if (is_zero_index(k))
            coeff = Mat2c(coeff.real_part()); // keep the mean real
        f.set_real_pair(k, coeff);
    }
    return f;
}

} // namespace

TEST_CASE("weighted norm examples") {
    WeightSpec an = WeightSpec::analytic();
    SUBCASE("zero series") {
        CHECK(weighted_norm(FourierMatrixSeries(2), an, 0.3) == 0.0);
    }
    SUBCASE("cosine mode") {
        FourierMatrixSeries f = cosine_series(2, {1, 0}, J);
        CHECK(weighted_norm(f, an, 0.1) == doctest::Approx(std::exp(0.2 * std::numbers::pi)).epsilon(1e-12));
        CHECK(weighted_norm(f, an, 0.1) == doctest::Approx(1.874455).epsilon(1e-6));
    }
    SUBCASE("constant series gets weight one") {
        Mat2 A{0.3, 1.1, -0.4, -0.3};
        CHECK(weighted_norm(FourierMatrixSeries::constant(2, A), an, 0.7) ==
              doctest::Approx(op_norm(A)).epsilon(1e-14));
    }
    SUBCASE("radius must be positive") {
        CHECK_THROWS_AS(weighted_norm(FourierMatrixSeries(2), an, 0.0), std::domain_error);
    }
}

TEST_CASE("multiplication") {
    WeightSpec an = WeightSpec::analytic();
    std::mt19937_64 rng(17);
    SUBCASE("constant identity is the unit") {
        FourierMatrixSeries f = random_trig(rng, 2, 4, 5);
        FourierMatrixSeries p = multiply(f, FourierMatrixSeries::identity(2));
        REQUIRE(p.support_size() == f.support_size());
        for (const auto& [k, c] : f.coefficients())
            CHECK(op_norm(p.coefficient(k) - c) < 1e-15);
    }
    SUBCASE("hand convolution of cos^2") {
        FourierMatrixSeries f = cosine_series(1, {1}, Mat2::identity());
        FourierMatrixSeries p = multiply(f, f);
        CHECK(op_norm(p.coefficient({0}) - Mat2c(Mat2::identity()) * 0.5) < 1e-15);
        CHECK(op_norm(p.coefficient({2}) - Mat2c(Mat2::identity()) * 0.25) < 1e-15);
        CHECK(op_norm(p.coefficient({-2}) - Mat2c(Mat2::identity()) * 0.25) < 1e-15);
        CHECK(p.support_size() == 3);
    }
    SUBCASE("Banach algebra inequality") {
        std::uniform_real_distribution<double> rad(0.05, 0.5);
        for (int i = 0; i < 100; ++i) {
            int d = 1 + (i % 2);
            FourierMatrixSeries f = random_trig(rng, d, 5, 4);
            FourierMatrixSeries g = random_trig(rng, d, 5, 4);
            double r = rad(rng);
            const WeightSpec& w = (i % 3 == 0) ? an : WeightSpec::gevrey(2.0);
            CHECK(weighted_norm(multiply(f, g), w, r) <=
                  weighted_norm(f, w, r) * weighted_norm(g, w, r) + 1e-12);
        }
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(multiply(FourierMatrixSeries(1), FourierMatrixSeries(2)),
                        std::invalid_argument);
    }
}

TEST_CASE("truncation") {
    SUBCASE("dotted truncation of a constant is zero") {
        FourierMatrixSeries c = FourierMatrixSeries::constant(2, J);
        CHECK(truncate(c, 5.0, true).support_size() == 0);
    }
    SUBCASE("support filter") {
        FourierMatrixSeries f = add(cosine_series(1, {1}, J), cosine_series(1, {2}, J));
        FourierMatrixSeries t = truncate(f, 1.0, false);
        CHECK(t.support_size() == 2);
        CHECK(op_norm(t.coefficient({1}) - Mat2c(J) * 0.5) < 1e-15);
        CHECK(t.coefficient({2}).is_zero());
    }
    SUBCASE("dotted truncation has zero mean") {
        std::mt19937_64 rng(3);
        FourierMatrixSeries f = random_trig(rng, 2, 4, 6);
        f.add_to_coefficient({0, 0}, Mat2c(J) * 0.7);
        CHECK(truncate(f, 10.0, true).average().is_zero());
    }
    SUBCASE("remainder decay at a reduced radius") {
        std::mt19937_64 rng(9);
        WeightSpec specs[] = {WeightSpec::analytic(), WeightSpec::gevrey(2.0)};
        std::uniform_real_distribution<double> rad(0.1, 0.5);
        for (int i = 0; i < 200; ++i) {
            const WeightSpec& w = specs[i % 2];
            FourierMatrixSeries f = random_trig(rng, 2, 6, 5);
            double r = rad(rng);
            double sigma = rad(rng) * 0.5 * r;
            double N = 1.0 + 4.0 * rad(rng);
            FourierMatrixSeries rem = subtract(f, truncate(f, N, false));
            double lhs = weighted_norm(rem, w, r - sigma);
            double rhs = weighted_norm(f, w, r) * std::exp(-two_pi * w.value(N) * sigma);
            CHECK(lhs <= rhs + 1e-12);
        }
    }
}

TEST_CASE("directional derivative") {
    Frequency f2 = golden_frequency();
    SUBCASE("constants differentiate to zero") {
        CHECK(directional_derivative(FourierMatrixSeries::constant(2, J), f2).support_size() == 0);
    }
    SUBCASE("single mode scaling") {
        FourierMatrixSeries f(2);
        f.set_coefficient({3, -1}, Mat2c(J) * 0.25);
        FourierMatrixSeries d = directional_derivative(f, f2);
        double dot = 3.0 * f2.omega[0] - 1.0 * f2.omega[1];
        CHECK(op_norm(d.coefficient({3, -1}) - Mat2c(J) * (0.25 * cplx(0, two_pi * dot))) < 1e-15);
    }
    SUBCASE("finite-difference oracle along the flow") {
        std::mt19937_64 rng(21);
        FourierMatrixSeries f = random_trig(rng, 2, 3, 4);
        FourierMatrixSeries d = directional_derivative(f, f2);
        double h = 1e-5;
        std::vector<double> tp{h * f2.omega[0], h * f2.omega[1]};
        std::vector<double> tm{-h * f2.omega[0], -h * f2.omega[1]};
        Mat2c fd = (f.evaluate(tp) - f.evaluate(tm)) * (1.0 / (2.0 * h));
        std::vector<double> zero{0.0, 0.0};
        CHECK(op_norm(fd - d.evaluate(zero)) < 1e-6 * (1.0 + op_norm(fd)));
    }
    SUBCASE("Leibniz rule") {
        std::mt19937_64 rng(22);
        FourierMatrixSeries f = random_trig(rng, 2, 3, 4);
        FourierMatrixSeries g = random_trig(rng, 2, 3, 4);
        FourierMatrixSeries lhs = directional_derivative(multiply(f, g), f2);
        FourierMatrixSeries rhs = add(multiply(directional_derivative(f, f2), g),
                                      multiply(f, directional_derivative(g, f2)));
        FourierMatrixSeries diff = subtract(lhs, rhs);
        for (const auto& [k, c] : diff.coefficients())
            CHECK(op_norm(c) < 1e-12);
    }
}

TEST_CASE("average and trace") {
    FourierMatrixSeries f(2);
    f.set_coefficient({0, 0}, Mat2c(J) * 0.4);
    auto [avg, tr] = average_and_trace(f);
    CHECK(op_norm(avg - Mat2c(J) * 0.4) < 1e-15);
    CHECK(tr == 0.0);
    f.set_coefficient({0, 0}, Mat2c{1.0, 0.0, 0.0, -1.0});
    CHECK(average_and_trace(f).second == 0.0);
    std::mt19937_64 rng(1);
    FourierMatrixSeries g = random_trig(rng, 2, 4, 5);
    g.add_to_coefficient({0, 0}, Mat2c(J));
    CHECK(average_and_trace(truncate(g, 10.0, true)).first.is_zero());
}

TEST_CASE("evaluation") {
    SUBCASE("cosine sum at zero") {
        FourierMatrixSeries f = cosine_series(2, {1, 0}, J);
        std::vector<double> zero{0.0, 0.0};
        CHECK(op_norm(f.evaluate(zero) - Mat2c(J)) < 1e-15);
    }
    SUBCASE("real symmetric series evaluates real") {
        std::mt19937_64 rng(12);
        FourierMatrixSeries f = random_trig(rng, 2, 5, 6);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> theta{unif(rng), unif(rng)};
            CHECK(f.evaluate(theta).max_imag() <= 1e-12 * (1.0 + op_norm(f.evaluate(theta))));
        }
    }
    SUBCASE("quarter period of a single mode") {
        FourierMatrixSeries f(2);
        f.set_coefficient({1, 0}, Mat2c(Mat2::identity()));
        std::vector<double> theta{0.25, 0.0};
        CHECK(op_norm(f.evaluate(theta) - Mat2c(Mat2::identity()) * cplx(0, 1)) < 1e-14);
    }
    SUBCASE("evaluation is linear and multiplicative") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        FourierMatrixSeries f = random_trig(rng, 2, 4, 4);
        FourierMatrixSeries g = random_trig(rng, 2, 4, 4);
        FourierMatrixSeries s = add(f, g), p = multiply(f, g);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> theta{unif(rng), unif(rng)};
            Mat2c fe = f.evaluate(theta), ge = g.evaluate(theta);
            CHECK(op_norm(s.evaluate(theta) - (fe + ge)) <= 1e-10 * (1.0 + op_norm(fe) + op_norm(ge)));
            CHECK(op_norm(p.evaluate(theta) - fe * ge) <=
                  1e-10 * (1.0 + op_norm(fe) * op_norm(ge)));
        }
    }
}

TEST_CASE("series text format round trip") {
    std::mt19937_64 rng(31);
    FourierMatrixSeries f = random_trig(rng, 2, 5, 7);
    f.add_tail_mass(3.25e-17);
    std::stringstream buf;
    write_series(buf, f);
    FourierMatrixSeries g = read_series(buf);
    CHECK(g.dim() == f.dim());
    CHECK(g.real_symmetric() == f.real_symmetric());
    CHECK(g.tail_bound() == f.tail_bound());
    REQUIRE(g.support_size() == f.support_size());
    for (const auto& [k, c] : f.coefficients())
        CHECK(op_norm(g.coefficient(k) - c) == 0.0); // %.17g round-trips doubles
}

TEST_CASE("compression accounts dropped mass exactly") {
    WeightSpec an = WeightSpec::analytic();
    FourierMatrixSeries f(2, true);
    f.set_real_pair({1, 0}, Mat2c(J) * 0.5);
    f.set_real_pair({4, -2}, Mat2c(J) * 1e-22);
    double before = weighted_norm(f, an, 0.2);
    FourierMatrixSeries g = compress(f, an, 0.2, 1e-16);
    CHECK(g.support_size() == 2);
    CHECK(g.tail_bound() > 0.0);
    CHECK(weighted_norm(g, an, 0.2) == doctest::Approx(before).epsilon(1e-15));
    // tail only grows
    FourierMatrixSeries h = compress(g, an, 0.2, 1e-16);
    CHECK(h.tail_bound() >= g.tail_bound());
}

TEST_CASE("real pair setter keeps the symmetry checkable") {
    FourierMatrixSeries f(2, true);
    f.set_real_pair({2, 1}, Mat2c{cplx(0.1, 0.2), cplx(-0.3, 0.05), cplx(0, 1), cplx(-0.1, -0.2)});
    CHECK_NOTHROW(f.check_real_symmetry());
    f.set_coefficient({1, 1}, Mat2c(J)); // breaks the mirror
    CHECK_THROWS_AS(f.check_real_symmetry(), std::runtime_error);
}
