#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <dfactor/options.hpp>
#include <dfactor/random.hpp>

using namespace dfactor;
using namespace dfactor::options;

namespace {

OptionQuote quote(double s, double k, double r, double t, OptionKind kind = OptionKind::call) {
    OptionQuote q;
    q.spot = s;
    q.strike = k;
    q.rate = r;
    q.maturity = t;
    q.kind = kind;
    return q;
}

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) {
        for (int i = 1; i <= n; ++i) {
            double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1.0);
                double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16)
                    break;
            }
            x.push_back(z);
            w.push_back(2.0 / ((1.0 - z * z) * dp * dp));
        }
    }
    template <class F>
    double integrate(F f, double a, double b, int panels) const {
        double total = 0.0, h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            double lo = a + p * h, mid = lo + 0.5 * h;
            for (std::size_t i = 0; i < x.size(); ++i)
                total += 0.5 * h * w[i] * f(mid + 0.5 * h * x[i]);
        }
        return total;
    }
};

double density(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Discounted expected payoff under the lognormal terminal law, integrated
// over the standard normal driver on each side of the exercise boundary.
double quadrature_price(const OptionQuote& q, double sigma) {
    static const GaussLegendre gl(20);
    const double drift = (q.rate - 0.5 * sigma * sigma) * q.maturity, vol = sigma * std::sqrt(q.maturity);
    auto terminal = [&](double z) { return q.spot * std::exp(drift + vol * z); };
    const double kink = (std::log(q.strike / q.spot) - drift) / vol;
    double v;
    if (q.kind == OptionKind::call)
        v = gl.integrate([&](double z) { return (terminal(z) - q.strike) * density(z); }, kink, kink + 40.0, 400);
    else
        v = gl.integrate([&](double z) { return (q.strike - terminal(z)) * density(z); }, kink - 40.0, kink, 400);
    return std::exp(-q.rate * q.maturity) * v;
}

} // namespace

TEST(NormCdf, Examples) {
    EXPECT_EQ(norm_cdf(0.0), 0.5);
    EXPECT_NEAR(norm_cdf(40.0), 1.0, 1e-15);
    static const GaussLegendre gl(20);
    const double oracle = 0.5 + gl.integrate(density, 0.0, 1.0, 50);
    EXPECT_NEAR(oracle, 0.841344746068543, 1e-14);
    EXPECT_NEAR(norm_cdf(1.0), oracle, 1e-14);
    EXPECT_THROW(norm_cdf(std::nan("")), NumericalError);
}

TEST(NormCdf, SymmetryAndMonotonicity) {
    double prev = 0.0;
    for (double x = -9.0; x <= 9.0; x += 0.01) {
        double p = norm_cdf(x);
        EXPECT_GE(p, prev);
        EXPECT_NEAR(norm_cdf(-x), 1.0 - p, 1e-15);
        prev = p;
    }
}

TEST(NormCdf, TailAgainstQuadrature) {
    static const GaussLegendre gl(20);
    for (double x : {-8.0, -5.0, -2.5, -0.3, 0.7, 3.1}) {
        double oracle = gl.integrate(density, x - 30.0, x, 600);
        EXPECT_NEAR(norm_cdf(x), oracle, 1e-13) << x;
    }
}

TEST(D1D2, AtTheMoneyZeroRate) {
    auto [d1, d2] = bs_d1_d2(quote(100, 100, 0, 1), 0.2);
    EXPECT_NEAR(d1, 0.1, 1e-15);
    EXPECT_NEAR(d2, -0.1, 1e-15);
}

TEST(D1D2, DefinitionalIdentity) {
    SplitMix64 rng(2);
    for (int i = 0; i < 200; ++i) {
        auto q = quote(50 + 100 * rng.uniform(), 50 + 100 * rng.uniform(), 0.1 * rng.uniform(), 0.1 + 3 * rng.uniform());
        double s = 0.05 + 2 * rng.uniform();
        auto [d1, d2] = bs_d1_d2(q, s);
        EXPECT_EQ(d2, d1 - s * std::sqrt(q.maturity));
    }
}

TEST(D1D2, ExtendedPrecisionOracle) {
    using big = boost::multiprecision::cpp_bin_float_50;
    big s = 100, k = 90, r = big(5) / 100, sig = big(3) / 10, t = big(1) / 2;
    big d1 = (log(s / k) + (r + sig * sig / 2) * t) / (sig * sqrt(t));
    big d2 = d1 - sig * sqrt(t);
    auto [a, b] = bs_d1_d2(quote(100, 90, 0.05, 0.5), 0.3);
    EXPECT_NEAR(a, d1.convert_to<double>(), 1e-15);
    EXPECT_NEAR(b, d2.convert_to<double>(), 1e-15);
}

TEST(D1D2, DegenerateInputs) {
    EXPECT_THROW(bs_d1_d2(quote(100, 0, 0, 1), 0.2), NumericalError);
    EXPECT_THROW(bs_d1_d2(quote(100, 100, 0, 1), 0.0), NumericalError);
}

TEST(Call, LimitsAndQuadrature) {
    EXPECT_EQ(bs_call(quote(100, 0, 0.05, 1), 0.3), 100.0);
    EXPECT_NEAR(bs_call(quote(120, 100, 0, 1), 1e-9), 20.0, 1e-6);
    auto q = quote(100, 100, 0.05, 1);
    EXPECT_NEAR(bs_call(q, 0.2), quadrature_price(q, 0.2), 1e-8);
    EXPECT_NEAR(bs_call(q, 0.2), 10.450583572185565, 1e-10);
}

TEST(Put, LimitsAndQuadrature) {
    EXPECT_EQ(bs_put(quote(100, 0, 0.05, 1, OptionKind::put), 0.3), 0.0);
    auto q = quote(100, 110, 0.03, 2, OptionKind::put);
    EXPECT_NEAR(bs_put(q, 0.25), quadrature_price(q, 0.25), 1e-8);
    auto fwd = quote(100 * std::exp(-0.04 * 1.5), 100, 0.04, 1.5);
    EXPECT_NEAR(bs_put(fwd, 0.3), bs_call(fwd, 0.3), 1e-12);
}

TEST(Pricing, BoundsAndMonotonicity) {
    SplitMix64 rng(9);
    for (int i = 0; i < 100; ++i) {
        auto q = quote(50 + 100 * rng.uniform(), 50 + 100 * rng.uniform(), 0.1 * rng.uniform(), 0.1 + 3 * rng.uniform());
        auto pq = q;
        pq.kind = OptionKind::put;
        auto [cl, cu] = no_arb_bounds(q);
        auto [pl, pu] = no_arb_bounds(pq);
        double prev = -1.0;
        for (double s = 1e-4; s <= 5.0; s *= 1.3) {
            double c = bs_call(q, s), p = bs_put(q, s);
            EXPECT_GE(c, cl - 1e-12);
            EXPECT_LE(c, cu + 1e-12);
            EXPECT_GE(p, pl - 1e-12);
            EXPECT_LE(p, pu + 1e-12);
            EXPECT_GE(c, prev - 1e-13 * q.spot);
            prev = c;
            EXPECT_LT(std::abs(c + q.strike * std::exp(-q.rate * q.maturity) - p - q.spot), 1e-10);
        }
    }
}

TEST(Bounds, Examples) {
    auto [lo, hi] = no_arb_bounds(quote(100, 0, 0.05, 1));
    EXPECT_EQ(lo, 100.0);
    EXPECT_EQ(hi, 100.0);
    auto [l2, h2] = no_arb_bounds(quote(100, 100, 0, 1));
    EXPECT_EQ(l2, 0.0);
    EXPECT_EQ(h2, 100.0);
}

TEST(Vega, MatchesCentralDifferences) {
    auto q = quote(100, 95, 0.03, 0.75);
    for (double s : {0.1, 0.25, 0.6, 1.2}) {
        const double h = 1e-5;
        double fd = (bs_call(q, s + h) - bs_call(q, s - h)) / (2 * h);
        EXPECT_NEAR(fd / bs_vega(q, s), 1.0, 1e-5) << s;
    }
}

TEST(ImpliedVol, RoundTrips) {
    auto q = quote(100, 105, 0.02, 1.0);
    q.price = bs_call(q, 0.25);
    EXPECT_NEAR(implied_vol(q).sigma, 0.25, 1e-8);
    auto p = quote(100, 90, 0.02, 0.5, OptionKind::put);
    p.price = bs_put(p, 0.6);
    auto r = implied_vol(p);
    EXPECT_NEAR(r.sigma, 0.6, 1e-8);
    EXPECT_LE(std::abs(r.residual), 1e-10 * 100);
    auto itm = quote(100, 70, 0.02, 0.5);
    itm.price = bs_call(itm, 0.4);
    EXPECT_NEAR(implied_vol(itm).sigma, 0.4, 1e-8);
}

TEST(ImpliedVol, RandomSweep) {
    SplitMix64 rng(77);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        auto q = quote(100, 100 / (0.8 + 0.45 * rng.uniform()), 0.08 * rng.uniform(), 0.25 + 2 * rng.uniform(),
                       rng.uniform() < 0.5 ? OptionKind::call : OptionKind::put);
        double s = 0.05 + 1.95 * rng.uniform();
        q.price = bs_price(q, s);
        worst = std::max(worst, std::abs(implied_vol(q).sigma - s));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(ImpliedVol, Errors) {
    auto q = quote(100, 90, 0, 1);
    q.price = 10.0;
    try {
        implied_vol(q);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_STREQ(e.what(), "below intrinsic");
    }
    q.price = 100.0;
    try {
        implied_vol(q);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_STREQ(e.what(), "above upper bound");
    }
    q.price = 99.0;
    try {
        implied_vol(q);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_STREQ(e.what(), "vol out of range");
    }
}

TEST(Quote, Validation) {
    EXPECT_THROW(quote(0, 100, 0, 1).validate(), DataError);
    EXPECT_THROW(quote(100, -1, 0, 1).validate(), DataError);
    EXPECT_THROW(quote(100, 100, 0, 0).validate(), DataError);
}
