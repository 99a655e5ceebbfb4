#include "ncs/frequency.hpp"

#include <algorithm>
#include <cmath>

namespace ncs {

namespace {

double inv_sens_db(const TransferFn& L, double omega) {
    return 20.0 * std::log10(1.0 / std::abs(1.0 + L(omega)));
}

//! Golden-section maximization of f on [a, b] to 1e-6 relative.
template <typename F>
double golden_max(F f, double a, double b) {
    constexpr double g = 0.6180339887498949;
    double c1 = b - g * (b - a), c2 = a + g * (b - a);
    double f1 = f(c1), f2 = f(c2);
    while (b - a > 1e-6 * std::abs(a) + 1e-14) {
        if (f1 > f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = f(c2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

MarginReport sensitivity_peak(const TransferFn& L, const FreqGrid& grid) {
    if (grid.size() == 0) throw Error("sensitivity_peak needs a non-empty grid");
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = 1.0 / std::abs(1.0 + L(grid.omegas[i]));
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = grid.omegas[best > 0 ? best - 1 : 0];
    const double hi = grid.omegas[std::min(best + 1, grid.size() - 1)];
    const double wpk =
        (lo < hi) ? golden_max([&](double w) { return 1.0 / std::abs(1.0 + L(w)); }, lo, hi)
                  : grid.omegas[best];

    MarginReport rep;
    const double refined = 1.0 / std::abs(1.0 + L(wpk));
    if (refined >= best_val) {
        rep.s_max_db = 20.0 * std::log10(refined);
        rep.s_max_freq = wpk;
    } else {
        rep.s_max_db = 20.0 * std::log10(best_val);
        rep.s_max_freq = grid.omegas[best];
    }
    return rep;
}

MarginReport margins(const TransferFn& L, const FreqGrid& grid) {
    if (grid.size() < 2) throw Error("margins needs at least two grid points");
    const std::size_t n = grid.size();

    std::vector<double> mag(n), ph(n);  // ph: unwrapped phase, radians
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> v = L(grid.omegas[i]);
        mag[i] = std::abs(v);
        double p = std::arg(v);
        if (i > 0) {
            while (p - ph[i - 1] > M_PI) p -= 2.0 * M_PI;
            while (p - ph[i - 1] < -M_PI) p += 2.0 * M_PI;
        }
        ph[i] = p;
    }

    MarginReport rep = sensitivity_peak(L, grid);

    // continuous unwrapped phase at a refined point, anchored to sample i
    auto phase_near = [&](double w, std::size_t i) {
        double p = std::arg(L(w));
        while (p - ph[i] > M_PI) p -= 2.0 * M_PI;
        while (p - ph[i] < -M_PI) p += 2.0 * M_PI;
        return p;
    };

    // |L| = 1 crossings -> phase margin (smallest wins)
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if ((mag[i] - 1.0) * (mag[i + 1] - 1.0) > 0.0) continue;
        if (mag[i] == mag[i + 1]) continue;
        double a = grid.omegas[i], b = grid.omegas[i + 1];
        const bool rising = mag[i + 1] > mag[i];
        for (int it = 0; it < 100 && (b - a) > 1e-6 * a; ++it) {
            const double m = 0.5 * (a + b);
            if ((std::abs(L(m)) > 1.0) == rising)
                b = m;
            else
                a = m;
        }
        const double wc = 0.5 * (a + b);
        double pm = 180.0 + phase_near(wc, i) * 180.0 / M_PI;
        // report in (-180, 180]
        while (pm > 180.0) pm -= 360.0;
        while (pm <= -180.0) pm += 360.0;
        if (!rep.has_gain_crossover || pm < rep.phase_margin_deg) {
            rep.phase_margin_deg = pm;
            rep.gain_crossover = wc;
        }
        rep.has_gain_crossover = true;
    }

    // unwrapped-phase crossings of -180 + k 360 -> gain margin (smallest wins)
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lo = std::min(ph[i], ph[i + 1]), hi = std::max(ph[i], ph[i + 1]);
        const long k0 = static_cast<long>(std::ceil((lo + M_PI) / (2.0 * M_PI)));
        const long k1 = static_cast<long>(std::floor((hi + M_PI) / (2.0 * M_PI)));
        for (long k = k0; k <= k1; ++k) {
            const double level = -M_PI + 2.0 * M_PI * static_cast<double>(k);
            if (level <= lo || level > hi) continue;
            double a = grid.omegas[i], b = grid.omegas[i + 1];
            const bool rising = ph[i + 1] > ph[i];
            for (int it = 0; it < 100 && (b - a) > 1e-6 * a; ++it) {
                const double m = 0.5 * (a + b);
                if ((phase_near(m, i) > level) == rising)
                    b = m;
                else
                    a = m;
            }
            const double wc = 0.5 * (a + b);
            const double gm = -20.0 * std::log10(std::abs(L(wc)));
            if (!rep.has_phase_crossover || gm < rep.gain_margin_db) {
                rep.gain_margin_db = gm;
                rep.phase_crossover = wc;
            }
            rep.has_phase_crossover = true;
        }
    }

    return rep;
}

}  // namespace ncs
