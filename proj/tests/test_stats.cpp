#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "duet/errors.hpp"
#include "duet/stats.hpp"
#include "test_util.hpp"

namespace duet::stats {
namespace {

AccuracyPairs make_pairs(const std::vector<double>& x, const std::vector<double>& y) {
    AccuracyPairs p;
    for (std::size_t i = 0; i < x.size(); ++i) p.pairs.emplace_back(x[i], y[i]);
    return p;
}

TEST(Fixture, ThirtyReferencePairs) {
    const auto f = table5_fixture();
    ASSERT_EQ(f.n(), 30);
    EXPECT_EQ(f.pairs[10], (std::pair<double, double>{82, 80}));
    EXPECT_EQ(f.pairs[19], (std::pair<double, double>{28, 20}));
    EXPECT_NO_THROW(f.validate());
}

TEST(Pearson, FixtureValue) {
    const double rho = pearson(table5_fixture());
    EXPECT_NEAR(rho, 0.91, 0.005);
    // Frozen from an independent two-pass computation in extended precision.
    EXPECT_NEAR(rho, 0.9107665540896588, 1e-12);
}

TEST(Pearson, PerfectLinearRelations) {
    EXPECT_NEAR(pearson(make_pairs({1, 2, 3, 4}, {3, 5, 7, 9})), 1.0, 1e-15);
    EXPECT_NEAR(pearson(make_pairs({1, 2, 3, 4}, {9, 7, 5, 3})), -1.0, 1e-15);
}

TEST(Pearson, ZeroVarianceIsUndefined) {
    EXPECT_THROW(pearson(make_pairs({5, 5, 5}, {1, 2, 3})), DomainError);
    EXPECT_THROW(pearson(make_pairs({1, 2, 3}, {4, 4, 4})), DomainError);
}

TEST(Pearson, TooFewOrNonFinitePairsRejected) {
    EXPECT_THROW(pearson(make_pairs({1, 2}, {1, 2})), ContractError);
    EXPECT_THROW(pearson(make_pairs({1, 2, NAN}, {1, 2, 3})), ContractError);
}

TEST(Pearson, InvariantUnderPositiveAffineMaps) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(12), y(12);
        for (int i = 0; i < 12; ++i) {
            x[i] = g(rng);
            y[i] = 0.5 * x[i] + g(rng);
        }
        const double base = pearson(make_pairs(x, y));
        std::vector<double> x2 = x, y2 = y;
        for (auto& v : x2) v = 3.0 * v + 7.0;
        for (auto& v : y2) v = 0.25 * v - 2.0;
        EXPECT_NEAR(pearson(make_pairs(x2, y2)), base, 1e-12);
        for (auto& v : y2) v = -v;
        EXPECT_NEAR(pearson(make_pairs(x2, y2)), -base, 1e-12);
    }
}

TEST(IncompleteBeta, MatchesBoost) {
    for (double a : {0.5, 1.0, 2.5, 14.0}) {
        for (double b : {0.5, 3.0, 14.0, 50.0}) {
            for (double x : {0.001, 0.1, 0.37, 0.5, 0.8, 0.999}) {
                EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12)
                    << a << " " << b << " " << x;
            }
        }
    }
    EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
    EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
    EXPECT_THROW(incomplete_beta(0, 1, 0.5), ContractError);
    EXPECT_THROW(incomplete_beta(1, 1, 1.5), ContractError);
}

TEST(StudentT, FrozenHighPrecisionTable) {
    // Frozen from a 30-digit arbitrary-precision evaluation of the t tail.
    struct Row {
        double df, t, p;
    };
    const Row rows[] = {
        {5, -2, 0.94903026058507082188},   {5, 0.3, 0.38812452113163723331},
        {5, 1.7, 0.074938393424161951487}, {5, 4, 0.0051617077404157269022},
        {5, 11, 0.000054026102772491427056},
        {28, -2, 0.97235738117902154618},  {28, 0.3, 0.38319656238429034062},
        {28, 1.7, 0.05010752524824497923}, {28, 4, 0.00021010342855327889965},
        {28, 11, 5.6359522469921068174e-12},
        {100, -2, 0.9758939106344331602},  {100, 0.3, 0.38239994015015174392},
        {100, 1.7, 0.046119663501509630562}, {100, 4, 0.000060761822150380838601},
        {100, 11, 3.2178247127021300618e-19},
    };
    for (const auto& r : rows) EXPECT_NEAR(student_t_upper(r.t, r.df), r.p, 1e-10) << r.df << " " << r.t;
}

TEST(StudentT, MatchesBoostDistribution) {
    for (double df : {1.0, 3.0, 10.0, 28.0, 200.0}) {
        const boost::math::students_t dist(df);
        for (double t = -6.0; t <= 6.0; t += 0.37) {
            EXPECT_NEAR(student_t_upper(t, df), boost::math::cdf(boost::math::complement(dist, t)), 1e-12);
        }
    }
}

TEST(StudentT, SymmetryAndMonotonicity) {
    EXPECT_DOUBLE_EQ(student_t_upper(0.0, 28), 0.5);
    double prev = 1.0;
    for (double t = -5.0; t <= 5.0; t += 0.25) {
        const double p = student_t_upper(t, 28);
        EXPECT_NEAR(p + student_t_upper(-t, 28), 1.0, 1e-14);
        EXPECT_LT(p, prev);
        prev = p;
    }
    EXPECT_THROW(student_t_upper(1.0, 0.0), ContractError);
}

TEST(OneTailed, ZeroCorrelationIsCoinFlip) {
    const auto r = one_tailed_p(0.0, 30);
    EXPECT_EQ(r.t_statistic, 0.0);
    EXPECT_DOUBLE_EQ(r.p_one_tailed, 0.5);
}

TEST(OneTailed, FixtureStatistic) {
    const auto r = one_tailed_p(pearson(table5_fixture()), 30);
    EXPECT_NEAR(r.t_statistic, 11.7, 0.05);
    EXPECT_LT(r.p_one_tailed, 2e-6);
    EXPECT_NEAR(r.t_statistic, 11.67127875471378, 1e-10);
    EXPECT_NEAR(r.p_one_tailed, 1.43025e-12, 1e-16);
    EXPECT_FALSE(r.exact_fit);
}

TEST(OneTailed, PDecreasesWithRhoAndN) {
    double prev = 1.0;
    for (double rho = -0.9; rho < 0.95; rho += 0.1) {
        const double p = one_tailed_p(rho, 20).p_one_tailed;
        EXPECT_LT(p, prev);
        prev = p;
    }
    EXPECT_LT(one_tailed_p(0.4, 40).p_one_tailed, one_tailed_p(0.4, 10).p_one_tailed);
}

TEST(OneTailed, ExactFits) {
    const auto up = one_tailed_p(1.0, 10);
    EXPECT_TRUE(up.exact_fit);
    EXPECT_EQ(up.p_one_tailed, 0.0);
    const auto down = one_tailed_p(-1.0, 10);
    EXPECT_TRUE(down.exact_fit);
    EXPECT_EQ(down.p_one_tailed, 1.0);
}

TEST(Fisher, FixtureInterval) {
    const auto [lo, hi] = fisher_ci(pearson(table5_fixture()), 30);
    EXPECT_NEAR(std::round(lo * 100) / 100, 0.82, 1e-12);
    EXPECT_NEAR(std::round(hi * 100) / 100, 0.96, 1e-12);
    EXPECT_NEAR(lo, 0.8193401797452055, 1e-12);
    EXPECT_NEAR(hi, 0.9570179414514097, 1e-12);
}

TEST(Fisher, SymmetricInRhoAndShrinksWithN) {
    const auto [lo, hi] = fisher_ci(0.3, 25);
    const auto [nlo, nhi] = fisher_ci(-0.3, 25);
    EXPECT_NEAR(lo, -nhi, 1e-15);
    EXPECT_NEAR(hi, -nlo, 1e-15);
    double width = 2.0;
    for (int n : {5, 10, 20, 40, 80, 160}) {
        const auto [a, b] = fisher_ci(0.5, n);
        EXPECT_LT(a, 0.5);
        EXPECT_GT(b, 0.5);
        EXPECT_LT(b - a, width);
        width = b - a;
    }
}

TEST(Fisher, UnsupportedInputsRejected) {
    EXPECT_THROW(fisher_ci(0.5, 30, 0.9), ContractError);
    EXPECT_THROW(fisher_ci(0.5, 3), ContractError);
    EXPECT_THROW(fisher_ci(1.0, 30), ContractError);
}

TEST(Report, FixtureRejectsNull) {
    const auto r = hypothesis_report(table5_fixture());
    EXPECT_EQ(r.decision, Decision::RejectH0);
    EXPECT_EQ(r.n, 30);
    EXPECT_LE(r.ci_lo, r.rho);
    EXPECT_GE(r.ci_hi, r.rho);
    const auto text = report_text(r);
    EXPECT_NE(text.find("rho 0.91"), std::string::npos);
    EXPECT_NE(text.find("[0.82, 0.96]"), std::string::npos);
    EXPECT_NE(text.find("reject_H0"), std::string::npos);
    const auto j = report_json(r);
    EXPECT_EQ(j.at("decision"), "reject_H0");
    EXPECT_EQ(j.at("n"), 30);
}

TEST(Report, WeakCorrelationRetainsNull) {
    const auto r = hypothesis_report(make_pairs({1, 2, 3, 4, 5, 6}, {3, 1, 4, 1, 5, 2}));
    EXPECT_EQ(r.decision, Decision::FailToReject);
}

TEST(Report, ExactFitHasDegenerateInterval) {
    const auto r = hypothesis_report(make_pairs({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}));
    EXPECT_TRUE(r.exact_fit);
    EXPECT_EQ(r.decision, Decision::RejectH0);
    EXPECT_EQ(r.ci_lo, r.rho);
    EXPECT_EQ(r.ci_hi, r.rho);
}

TEST(Report, NullRejectionRateMatchesAlpha) {
    // Independent normal pairs: the one-tailed test should reject about alpha of the time.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    const int trials = 1000;
    int rejected = 0;
    for (int k = 0; k < trials; ++k) {
        AccuracyPairs p;
        for (int i = 0; i < 30; ++i) p.pairs.emplace_back(g(rng), g(rng));
        rejected += hypothesis_report(p).decision == Decision::RejectH0;
    }
    const auto [lo, hi] = duet::testing::binomial_band(trials, 0.05, 0.999);
    EXPECT_GE(rejected / double(trials), lo);
    EXPECT_LE(rejected / double(trials), hi);
}

TEST(ResultsCsv, SkipsSentinelsAndComments) {
    const std::string text =
        "# duet 0.1.0\n"
        "experiment,num_interactions,labels,stgcn_acc,cnn_acc\n"
        "0,2,0 1,70,63\n"
        "1,2,0 2,nan,nan\n"
        "2,2,1 2,31,28\n"
        "3,2,1 3,74,72\n";
    const auto p = pairs_from_results_csv(text);
    ASSERT_EQ(p.n(), 3);
    EXPECT_EQ(p.pairs[1], (std::pair<double, double>{31, 28}));
    EXPECT_THROW(pairs_from_results_csv("experiment,stgcn_acc\n0,1\n"), FormatError);
}

}  // namespace
}  // namespace duet::stats
