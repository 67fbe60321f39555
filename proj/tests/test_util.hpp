#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>

namespace duet::testing {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("duet_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

/// Two-sided binomial band holding at least `coverage` of the mass, as success fractions.
inline std::pair<double, double> binomial_band(int n, double p, double coverage) {
    const double tail = (1.0 - coverage) / 2.0;
    double cdf = 0.0;
    int lo = 0;
    int hi = n;
    bool lo_set = false;
    for (int k = 0; k <= n; ++k) {
        const double pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                    k * std::log(p) + (n - k) * std::log1p(-p));
        const double before = cdf;
        cdf += pmf;
        if (!lo_set && cdf > tail) {
            lo = k;
            lo_set = true;
        }
        if (before < 1.0 - tail && cdf >= 1.0 - tail) hi = k;
    }
    return {static_cast<double>(lo) / n, static_cast<double>(hi) / n};
}

}  // namespace duet::testing
