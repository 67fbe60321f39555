#include "duet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "duet/errors.hpp"

namespace duet::stats {

namespace {

constexpr double kZCrit95 = 1.959964;

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

/// Continued fraction for I_x(a, b) without the prefactor; modified Lentz.
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw ContractError("incomplete beta: continued fraction did not converge");
}

}  // namespace

void AccuracyPairs::validate() const {
    if (pairs.size() < 3) throw ContractError("accuracy pairs: need at least 3");
    for (const auto& [x, y] : pairs) {
        if (!std::isfinite(x) || !std::isfinite(y)) throw ContractError("accuracy pairs: non-finite value");
    }
}

AccuracyPairs table5_fixture() {
    static const double backbone[30] = {70, 31, 74, 78, 80, 85, 34, 82, 74, 57, 82, 69, 61, 69, 60,
                                        58, 70, 33, 73, 28, 56, 66, 68, 41, 56, 58, 76, 55, 65, 82};
    static const double head[30] = {63, 28, 72, 68, 58, 74, 28, 77, 55, 55, 80, 67, 50, 70, 53,
                                    58, 55, 39, 55, 20, 51, 61, 56, 39, 46, 55, 62, 46, 46, 79};
    AccuracyPairs out;
    for (int i = 0; i < 30; ++i) out.pairs.emplace_back(backbone[i], head[i]);
    return out;
}

double pearson(const AccuracyPairs& p) {
    p.validate();
    const double n = p.n();
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : p.pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& [x, y] : p.pairs) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson: zero variance, correlation undefined");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0) || !(x >= 0 && x <= 1)) throw ContractError("incomplete beta: argument out of range");
    if (x == 0.0 || x == 1.0) return x;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_upper(double t, double df) {
    if (!(df > 0)) throw ContractError("student t: df must be positive");
    if (std::isnan(t)) throw ContractError("student t: t is NaN");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    // P(|T| > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2).
    const double two_sided = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return t >= 0 ? 0.5 * two_sided : 1.0 - 0.5 * two_sided;
}

TTest one_tailed_p(double rho, int n) {
    if (n < 3) throw ContractError("t test: n < 3");
    if (!(rho >= -1.0 && rho <= 1.0)) throw ContractError("t test: rho outside [-1, 1]");
    if (std::abs(rho) == 1.0) {
        return {rho * std::numeric_limits<double>::infinity(), rho > 0 ? 0.0 : 1.0, true};
    }
    const double df = n - 2;
    const double t = rho * std::sqrt(df) / std::sqrt(1.0 - rho * rho);
    return {t, student_t_upper(t, df), false};
}

std::pair<double, double> fisher_ci(double rho, int n, double level) {
    if (level != 0.95) throw ContractError("fisher ci: only the 0.95 level is supported");
    if (n < 4) throw ContractError("fisher ci: n < 4");
    if (!(std::abs(rho) < 1.0)) throw ContractError("fisher ci: |rho| must be < 1");
    const double z = std::atanh(rho);
    const double hw = kZCrit95 / std::sqrt(static_cast<double>(n - 3));
    return {std::tanh(z - hw), std::tanh(z + hw)};
}

CorrelationReport hypothesis_report(const AccuracyPairs& pairs, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw ContractError("hypothesis report: alpha outside (0, 1)");
    CorrelationReport r;
    r.n = pairs.n();
    r.alpha = alpha;
    r.rho = pearson(pairs);
    const TTest t = one_tailed_p(r.rho, r.n);
    r.t_statistic = t.t_statistic;
    r.p_one_tailed = t.p_one_tailed;
    r.exact_fit = t.exact_fit;
    if (t.exact_fit) {
        r.ci_lo = r.ci_hi = r.rho;
    } else if (r.n >= 4) {
        std::tie(r.ci_lo, r.ci_hi) = fisher_ci(r.rho, r.n);
    } else {
        r.ci_lo = -1.0;  // n = 3 leaves the Fisher interval undefined; report the whole range
        r.ci_hi = 1.0;
    }
    r.decision = r.p_one_tailed < alpha ? Decision::RejectH0 : Decision::FailToReject;
    return r;
}

std::string report_text(const CorrelationReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "n %d\nrho %.2f (%.6f)\nt %.4f (df %d)\np_one_tailed %.3e\nci95 [%.2f, %.2f] (%.6f, %.6f)\n"
                  "alpha %.3g\ndecision %s\n",
                  r.n, r.rho, r.rho, r.t_statistic, r.n - 2, r.p_one_tailed, r.ci_lo, r.ci_hi, r.ci_lo, r.ci_hi,
                  r.alpha, r.decision == Decision::RejectH0 ? "reject_H0" : "fail_to_reject");
    std::string out = buf;
    if (r.exact_fit) out += "exact_fit true\n";
    return out;
}

nlohmann::json report_json(const CorrelationReport& r) {
    nlohmann::json j = {{"n", r.n},
                        {"rho", r.rho},
                        {"t_statistic", std::isfinite(r.t_statistic) ? nlohmann::json(r.t_statistic)
                                                                     : nlohmann::json(r.t_statistic > 0 ? "inf" : "-inf")},
                        {"df", r.n - 2},
                        {"p_one_tailed", r.p_one_tailed},
                        {"ci95", {r.ci_lo, r.ci_hi}},
                        {"alpha", r.alpha},
                        {"exact_fit", r.exact_fit},
                        {"decision", r.decision == Decision::RejectH0 ? "reject_H0" : "fail_to_reject"}};
    return j;
}

AccuracyPairs pairs_from_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool got = false;
    while ((got = static_cast<bool>(std::getline(in, line))) && line.starts_with('#')) {
    }
    if (!got) throw FormatError("results: empty file");
    const auto header = split(line, ',');
    const auto col = [&](const char* name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw FormatError(std::string("results: missing column ") + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ix = col("stgcn_acc");
    const std::size_t iy = col("cnn_acc");
    AccuracyPairs out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw FormatError("results: row " + std::to_string(row) + " has the wrong number of cells");
        }
        double x = 0.0, y = 0.0;
        try {
            x = std::stod(cells[ix]);
            y = std::stod(cells[iy]);
        } catch (const std::exception&) {
            throw FormatError("results: row " + std::to_string(row) + " has a non-numeric accuracy");
        }
        if (!std::isfinite(x) || !std::isfinite(y) || x < 0 || y < 0) continue;
        out.pairs.emplace_back(x, y);
    }
    return out;
}

}  // namespace duet::stats
