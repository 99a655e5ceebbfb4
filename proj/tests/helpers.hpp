#pragma once

#include <cmath>
#include <utility>
#include <vector>

// shared measurement helpers for simulated traces

namespace test_helpers {

//! Zero-crossing frequency and log-decrement damping ratio of an oscillatory
//! signal. Uses `periods` upward crossings of the mean and the peak ratio
//! between the first and last period.
struct OscillationFit {
    bool ok = false;
    double omega = 0.0;
    double delta = 0.0;
};

inline OscillationFit fit_oscillation(const std::vector<double>& t,
                                      const std::vector<double>& y, int periods = 10) {
    OscillationFit fit;
    if (t.size() != y.size() || t.size() < 4) return fit;
    double mean = 0;
    for (const double v : y) mean += v;
    mean /= static_cast<double>(y.size());

    std::vector<double> crossings;
    std::vector<std::size_t> cross_idx;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const double a = y[i] - mean, b = y[i + 1] - mean;
        if (a < 0 && b >= 0) {
            const double frac = -a / (b - a);
            crossings.push_back(t[i] + frac * (t[i + 1] - t[i]));
            cross_idx.push_back(i);
        }
    }
    if (static_cast<int>(crossings.size()) < periods + 1) return fit;

    const double period =
        (crossings[periods] - crossings[0]) / static_cast<double>(periods);
    fit.omega = 2.0 * M_PI / period;

    auto peak_between = [&](std::size_t a, std::size_t b) {
        double best = 0;
        for (std::size_t i = a; i < b; ++i) best = std::max(best, std::abs(y[i] - mean));
        return best;
    };
    const double first = peak_between(cross_idx[0], cross_idx[1]);
    const double last = peak_between(cross_idx[periods - 1], cross_idx[periods]);
    if (first <= 0 || last <= 0) return fit;
    const double d = std::log(first / last) / (2.0 * M_PI * static_cast<double>(periods - 1));
    fit.delta = d / std::sqrt(1.0 + d * d);
    fit.ok = true;
    return fit;
}

//! Least-squares sinusoid fit at a known frequency: returns (amplitude, phase).
inline std::pair<double, double> fit_sinusoid(const std::vector<double>& t,
                                              const std::vector<double>& y, double omega) {
    double scc = 0, scs = 0, sss = 0, syc = 0, sys_ = 0, sc = 0, ss = 0, sy = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double c = std::cos(omega * t[i]), s = std::sin(omega * t[i]);
        scc += c * c;
        scs += c * s;
        sss += s * s;
        sc += c;
        ss += s;
        syc += y[i] * c;
        sys_ += y[i] * s;
        sy += y[i];
    }
    // solve [scc scs sc; scs sss ss; sc ss n] [a;b;c0] = [syc; sys; sy]
    double m[3][4] = {{scc, scs, sc, syc}, {scs, sss, ss, sys_}, {sc, ss, n, sy}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        for (int c = 0; c < 4; ++c) std::swap(m[col][c], m[piv][c]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    const double a = m[0][3] / m[0][0], b = m[1][3] / m[1][1];
    // y ~ a cos + b sin = A sin(wt + phi), A = hypot, phi = atan2(a, b)
    return {std::hypot(a, b), std::atan2(a, b)};
}

}  // namespace test_helpers
