#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace duet::stats {

/// Paired stage accuracies in percent: (backbone, head).
struct AccuracyPairs {
    std::vector<std::pair<double, double>> pairs;

    [[nodiscard]] int n() const noexcept { return static_cast<int>(pairs.size()); }
    /// Throws ContractError unless n >= 3 and every value is finite.
    void validate() const;
};

enum class Decision { RejectH0, FailToReject };

struct TTest {
    double t_statistic = 0.0;
    double p_one_tailed = 0.0;
    bool exact_fit = false;  // |rho| = 1: t is infinite and p is 0 or 1
};

struct CorrelationReport {
    double rho = 0.0;
    double t_statistic = 0.0;
    double p_one_tailed = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double alpha = 0.05;
    int n = 0;
    bool exact_fit = false;
    Decision decision = Decision::FailToReject;
};

/// The thirty reference (backbone, head) accuracy pairs in experiment order.
AccuracyPairs table5_fixture();

/// Product-moment correlation. Throws DomainError if either coordinate has zero variance.
double pearson(const AccuracyPairs& pairs);

/// Regularised incomplete beta I_x(a, b) by the modified Lentz continued fraction, switching to
/// 1 - I_{1-x}(b, a) above the convergence crossover x = (a + 1) / (a + b + 2).
double incomplete_beta(double a, double b, double x);

/// Upper tail P(T > t) of Student's t with df degrees of freedom.
double student_t_upper(double t, double df);

/// t = rho sqrt(n - 2) / sqrt(1 - rho^2) and its upper-tail probability on n - 2 degrees of
/// freedom. |rho| = 1 returns p = 0 (rho = 1) or 1 (rho = -1) with exact_fit set.
TTest one_tailed_p(double rho, int n);

/// Fisher z interval tanh(atanh(rho) -+ z_crit / sqrt(n - 3)). Only level 0.95 is supported
/// (z_crit = 1.959964); other levels, n < 4 or |rho| >= 1 throw ContractError.
std::pair<double, double> fisher_ci(double rho, int n, double level = 0.95);

/// H0: no positive linear correlation. Rejected when p < alpha. An exact fit reports the
/// degenerate interval [rho, rho].
CorrelationReport hypothesis_report(const AccuracyPairs& pairs, double alpha = 0.05);

std::string report_text(const CorrelationReport& r);
nlohmann::json report_json(const CorrelationReport& r);

/// Reads "stgcn_acc" and "cnn_acc" columns from a results CSV; rows with a non-finite or
/// negative value (failed experiments) and leading '#' lines are skipped. Throws FormatError on a missing column.
AccuracyPairs pairs_from_results_csv(const std::string& text);

}  // namespace duet::stats
