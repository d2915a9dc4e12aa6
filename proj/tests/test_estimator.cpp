#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "showwork/estimator.hpp"
#include "test_support.hpp"

using namespace showwork;
using showwork::testkit::kToy;
using showwork::testkit::make_run;
using showwork::testkit::random_values;

namespace {

// Independent brute force: recursively visit every ordered n-tuple of the raw
// values and accumulate the max and its square.
struct Brute {
    double mean;
    double std;
};

Brute brute_force(const std::vector<double>& values, int n) {
    long double sum = 0, sum_sq = 0, count = 0;
    std::function<void(int, double)> rec = [&](int depth, double best) {
        if (depth == n) {
            sum += best;
            sum_sq += static_cast<long double>(best) * best;
            count += 1;
            return;
        }
        for (double v : values) rec(depth + 1, depth == 0 ? v : std::max(best, v));
    };
    rec(0, 0.0);
    const long double mean = sum / count;
    const long double var = sum_sq / count - mean * mean;
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(std::max(var, 0.0L)))};
}

EmpiricalDistribution dist_of(const std::vector<double>& v) { return EmpiricalDistribution::from_values(v); }

}  // namespace

TEST(Distribution, CountsAndCdf) {
    auto d = dist_of({0.2, 0.1, 0.3, 0.2});
    EXPECT_EQ(d.support(), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_EQ(d.counts(), (std::vector<std::uint64_t>{1, 2, 1}));
    EXPECT_EQ(d.total(), 4u);
    EXPECT_EQ(d.cdf_at(0.1), 0.25);
    EXPECT_EQ(d.cdf_at(0.2), 0.75);
    EXPECT_EQ(d.cdf_at(0.3), 1.0);
    EXPECT_EQ(d.strict_cdf_at(0.2), 0.25);
    EXPECT_EQ(d.strict_cdf_at(0.1), 0.0);
    EXPECT_EQ(d.cdf_at(0.05), 0.0);
}

TEST(Distribution, Degenerate) {
    auto d = dist_of({0.5, 0.5, 0.5});
    EXPECT_EQ(d.support().size(), 1u);
    EXPECT_EQ(d.cdf_at(0.5), 1.0);
}

TEST(Distribution, FiftyDistinctValues) {
    std::vector<double> v(50);
    for (int i = 0; i < 50; ++i) v[i] = 0.3 + 0.002 * i;
    auto d = dist_of(v);
    ASSERT_EQ(d.support().size(), 50u);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(d.counts()[i], 1u);
        EXPECT_NEAR(d.cdf_step(i), static_cast<double>(i + 1) / 50.0, 1e-15);
    }
    EXPECT_EQ(d.cdf_step(49), 1.0);
}

TEST(Distribution, EmptyRunThrows) {
    FamilyRun empty;
    EXPECT_THROW(build_distribution(empty), DomainError);
}

TEST(PmfOfMax, ToyPairFromEnumeration) {
    // 9 ordered pairs over {0.1, 0.2, 0.3}: max is 0.1 once, 0.2 three times, 0.3 five times.
    auto pmf = pmf_of_max(dist_of(kToy), 2);
    ASSERT_EQ(pmf.size(), 3u);
    EXPECT_NEAR(pmf[0].probability, 1.0 / 9, 1e-15);
    EXPECT_NEAR(pmf[1].probability, 3.0 / 9, 1e-15);
    EXPECT_NEAR(pmf[2].probability, 5.0 / 9, 1e-15);
}

TEST(PmfOfMax, SingleDrawIsEmpiricalFrequency) {
    auto d = dist_of({0.1, 0.4, 0.4, 0.9, 0.9, 0.9});
    auto pmf = pmf_of_max(d, 1);
    EXPECT_NEAR(pmf[0].probability, 1.0 / 6, 1e-15);
    EXPECT_NEAR(pmf[1].probability, 2.0 / 6, 1e-15);
    EXPECT_NEAR(pmf[2].probability, 3.0 / 6, 1e-15);
}

TEST(PmfOfMax, SinglePoint) {
    auto pmf = pmf_of_max(dist_of({0.7, 0.7}), 2);
    ASSERT_EQ(pmf.size(), 1u);
    EXPECT_EQ(pmf[0].probability, 1.0);
}

TEST(PmfOfMax, BudgetOutOfRange) {
    auto d = dist_of(kToy);
    EXPECT_THROW(pmf_of_max(d, 0), BudgetOutOfRange);
    EXPECT_THROW(pmf_of_max(d, 4), BudgetOutOfRange);
    EXPECT_THROW(expected_max(d, 4), BudgetOutOfRange);
    EXPECT_THROW(std_of_max(d, -1), BudgetOutOfRange);
}

TEST(ExpectedMax, ToyValues) {
    auto d = dist_of(kToy);
    EXPECT_NEAR(expected_max(d, 1), 0.2, 1e-15);
    EXPECT_NEAR(expected_max(d, 2), 2.2 / 9, 1e-15);
    EXPECT_NEAR(expected_max(d, 3), 7.2 / 27, 1e-15);
    EXPECT_NEAR(std_of_max(d, 2), std::sqrt(0.58 / 9 - (2.2 / 9) * (2.2 / 9)), 1e-15);
    EXPECT_NEAR(std_of_max(d, 2), 0.0685, 5e-5);
}

TEST(ExpectedMax, ConstantValues) {
    auto d = dist_of({0.5, 0.5, 0.5});
    EXPECT_EQ(expected_max(d, 3), 0.5);
    for (int n = 1; n <= 3; ++n) EXPECT_EQ(std_of_max(d, n), 0.0);
}

TEST(ExpectedMax, EqualsSumOverPmf) {
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 50; ++rep) {
        auto d = dist_of(random_values(gen, 2 + gen() % 30));
        for (std::int64_t n = 1; n <= static_cast<std::int64_t>(d.total()); ++n) {
            double s = 0;
            for (auto [v, p] : pmf_of_max(d, n)) s += v * p;
            EXPECT_NEAR(expected_max(d, n), s, 1e-14);
        }
    }
}

TEST(Enumeration, ToyAndSingleDraw) {
    auto d = dist_of(kToy);
    auto e2 = expected_max_by_enumeration(d, 2);
    EXPECT_NEAR(e2.expected, 2.2 / 9, 1e-15);
    EXPECT_NEAR(e2.std, std::sqrt(0.58 / 9 - (2.2 / 9) * (2.2 / 9)), 1e-15);

    std::vector<double> v{0.3, 0.9, 0.1, 0.4};
    auto e1 = expected_max_by_enumeration(dist_of(v), 1);
    const double mean = (0.3 + 0.9 + 0.1 + 0.4) / 4;
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean) / 4;
    EXPECT_NEAR(e1.expected, mean, 1e-15);
    EXPECT_NEAR(e1.std, std::sqrt(var), 1e-15);
}

TEST(Enumeration, FiveValuesBudgetFourMatchesClosedForm) {
    std::mt19937_64 gen(625);
    auto v = random_values(gen, 5);
    auto d = dist_of(v);
    auto e = expected_max_by_enumeration(d, 4);
    auto b = brute_force(v, 4);
    EXPECT_NEAR(e.expected, b.mean, 1e-12);
    EXPECT_NEAR(e.std, b.std, 1e-12);
    EXPECT_NEAR(expected_max(d, 4), e.expected, 1e-12);
    EXPECT_NEAR(std_of_max(d, 4), e.std, 1e-12);
}

TEST(Enumeration, GuardRefusesHugeTupleCounts) {
    std::vector<double> v(50, 0.0);
    std::iota(v.begin(), v.end(), 0.0);
    try {
        expected_max_by_enumeration(dist_of(v), 5);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("closed form"), std::string::npos);
    }
}

// Property: closed form equals exhaustive enumeration for every small case,
// including ties.
TEST(Properties, OracleEquivalence) {
    std::mt19937_64 gen(2019);
    for (int rep = 0; rep < 150; ++rep) {
        const auto big_n = 1 + gen() % 6;
        auto v = random_values(gen, big_n);
        if (rep % 3 == 0 && big_n > 2) v[1] = v[0];  // force a tie
        auto d = dist_of(v);
        for (std::int64_t n = 1; n <= static_cast<std::int64_t>(big_n); ++n) {
            auto e = expected_max_by_enumeration(d, n);
            EXPECT_NEAR(expected_max(d, n), e.expected, 1e-12);
            EXPECT_NEAR(std_of_max(d, n), e.std, 1e-12);
            if (n <= 4) {
                auto b = brute_force(v, static_cast<int>(n));
                EXPECT_NEAR(e.expected, b.mean, 1e-12);
            }
        }
    }
}

TEST(Properties, MonotoneBoundedAndPmfValid) {
    std::mt19937_64 gen(7);
    for (int rep = 0; rep < 100; ++rep) {
        auto v = random_values(gen, 1 + gen() % 80);
        if (rep % 4 == 0)
            for (auto& x : v) x = std::round(x * 10) / 10;  // heavy ties
        auto d = dist_of(v);
        const auto big_n = static_cast<std::int64_t>(d.total());
        EXPECT_NEAR(expected_max(d, 1), d.mean(), 1e-12);
        double prev = -1;
        for (std::int64_t n = 1; n <= big_n; ++n) {
            const double e = expected_max(d, n);
            EXPECT_GE(e, prev);
            EXPECT_LE(e, d.max());
            EXPECT_GE(e, d.mean() - 1e-12);
            EXPECT_GE(std_of_max(d, n), 0.0);
            prev = e;
            double total = 0;
            for (auto [_, p] : pmf_of_max(d, n)) {
                EXPECT_GE(p, 0.0);
                total += p;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(Properties, AffineEquivariance) {
    std::mt19937_64 gen(99);
    for (int rep = 0; rep < 60; ++rep) {
        auto v = random_values(gen, 2 + gen() % 20);
        const double a = 0.1 + 3.0 * std::uniform_real_distribution<double>(0, 1)(gen);
        const double b = std::uniform_real_distribution<double>(-1, 1)(gen);
        std::vector<double> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = a * v[i] + b;
        auto dv = dist_of(v), dw = dist_of(w);
        for (std::int64_t n = 1; n <= static_cast<std::int64_t>(v.size()); ++n) {
            EXPECT_NEAR(expected_max(dw, n), a * expected_max(dv, n) + b, 1e-12);
            EXPECT_NEAR(std_of_max(dw, n), a * std_of_max(dv, n), 1e-12);
        }
    }
}

TEST(Properties, DuplicatingTrialsChangesNothing) {
    std::mt19937_64 gen(21);
    for (int rep = 0; rep < 40; ++rep) {
        auto v = random_values(gen, 2 + gen() % 15);
        auto doubled = v;
        doubled.insert(doubled.end(), v.begin(), v.end());
        auto d1 = dist_of(v), d2 = dist_of(doubled);
        for (std::int64_t n = 1; n <= static_cast<std::int64_t>(v.size()); ++n) {
            EXPECT_NEAR(expected_max(d1, n), expected_max(d2, n), 1e-12);
            EXPECT_NEAR(std_of_max(d1, n), std_of_max(d2, n), 1e-12);
        }
    }
}

TEST(StdOfMax, FullBudgetSpreadBelowSingleDraw) {
    std::mt19937_64 gen(20);
    auto d = dist_of(random_values(gen, 20));
    EXPECT_LT(std_of_max(d, 20), std_of_max(d, 1));
}

TEST(StdOfMax, MatchesRawMomentFormula) {
    std::mt19937_64 gen(4);
    auto d = dist_of(random_values(gen, 25));
    for (std::int64_t n : {1, 3, 10, 25}) {
        double m1 = 0, m2 = 0;
        for (auto [v, p] : pmf_of_max(d, n)) {
            m1 += v * p;
            m2 += v * v * p;
        }
        EXPECT_NEAR(std_of_max(d, n), std::sqrt(std::max(0.0, m2 - m1 * m1)), 1e-12);
    }
}

// Large budgets with tiny CDF steps go through log space; compare with direct pow.
TEST(ExpectedMax, LogSpacePowersAgreeWithDirectPowering) {
    std::mt19937_64 gen(1234);
    auto d = dist_of(random_values(gen, 3000));
    for (std::int64_t n : {51, 120, 1000, 3000}) {
        double direct = 0;
        for (std::size_t i = 0; i < d.support().size(); ++i)
            direct += d.support()[i] *
                      (std::pow(d.cdf_step(i), static_cast<double>(n)) - std::pow(d.strict_cdf_step(i), static_cast<double>(n)));
        EXPECT_NEAR(expected_max(d, n), direct, 1e-12) << n;
    }
}

TEST(Curve, ToyPoints) {
    auto c = build_curve(make_run(kToy));
    ASSERT_EQ(c.points.size(), 3u);
    EXPECT_EQ(c.points[0].n, 1);
    EXPECT_NEAR(c.points[0].expected_max, 0.2, 1e-15);
    EXPECT_NEAR(c.points[1].expected_max, 2.2 / 9, 1e-15);
    EXPECT_NEAR(c.points[2].expected_max, (0.1 * 1 + 0.2 * 7 + 0.3 * 19) / 27, 1e-15);
    EXPECT_EQ(c.observed_min, 0.1);
    EXPECT_EQ(c.observed_max, 0.3);
}

TEST(Curve, ConstantRunIsFlat) {
    auto c = build_curve(make_run({0.4, 0.4, 0.4, 0.4}));
    for (const auto& p : c.points) {
        EXPECT_EQ(p.expected_max, 0.4);
        EXPECT_EQ(p.std, 0.0);
    }
}

TEST(Curve, LowerIsBetterMirrorsNegatedRun) {
    std::vector<double> loss{0.9, 0.4, 0.6, 0.5};
    std::vector<double> neg;
    for (double x : loss) neg.push_back(-x);
    auto c = build_curve(make_run(loss, "m", 1.0, false));
    auto r = build_curve(make_run(neg));
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        EXPECT_EQ(c.points[i].expected_max, -r.points[i].expected_max);
        EXPECT_EQ(c.points[i].std, r.points[i].std);
    }
    EXPECT_NEAR(c.points.back().expected_max, 0.4, 0.1);
    EXPECT_GE(c.points.back().expected_max, c.observed_min);
}

TEST(Curve, CsvRoundTripIsExact) {
    std::mt19937_64 gen(8);
    std::vector<ExpectedMaxCurve> curves{build_curve(make_run(random_values(gen, 12), "a")),
                                         build_curve(make_run(random_values(gen, 7), "b", 1.0, false))};
    std::stringstream ss;
    for (const auto& c : curves) write_curve_csv(ss, c);
    const std::string text = ss.str();
    EXPECT_EQ(text.rfind("# family=a N=12 observed_min=", 0), 0u);
    EXPECT_NE(text.find("\nn,expected_max,std\n1,"), std::string::npos);
    auto back = read_curve_csv(ss);
    EXPECT_EQ(back, curves);
}

TEST(Curve, CsvUses17SignificantDigits) {
    std::ostringstream ss;
    write_curve_csv(ss, build_curve(make_run(kToy)));
    EXPECT_NE(ss.str().find("\n2,0.2444444444444444"), std::string::npos) << ss.str();
}
