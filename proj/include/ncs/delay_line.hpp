#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ncs/errors.hpp"

namespace ncs {

//! Fixed-rate ring buffer serving y(t - d) lookups with linear interpolation.
//! Before the history covers d, the oldest available sample is returned
//! (constant-history padding).
class DelayLine {
public:
    DelayLine() = default;

    //! Capacity covers max_delay: ceil(max_delay/dt) + 2 slots.
    DelayLine(double dt, double max_delay) : dt_(dt) {
        if (!(dt > 0) || !(max_delay >= 0)) throw Error("bad delay line setup");
        buf_.assign(static_cast<std::size_t>(std::ceil(max_delay / dt)) + 2, 0.0);
    }

    void push(double v) {
        buf_[head_] = v;
        head_ = (head_ + 1) % buf_.size();
        if (filled_ < buf_.size()) ++filled_;
    }

    //! Interpolated sample delay seconds before the most recent push.
    double at_delay(double delay) const {
        if (filled_ == 0) return 0.0;
        if (delay < 0) delay = 0;
        const double d = delay / dt_;
        const std::size_t k = static_cast<std::size_t>(d);
        const double frac = d - static_cast<double>(k);
        return (1.0 - frac) * back(k) + frac * back(k + 1);
    }

    double dt() const { return dt_; }
    double max_delay() const { return dt_ * static_cast<double>(buf_.size() - 2); }
    //! Time currently covered by real samples.
    double span() const { return filled_ ? dt_ * static_cast<double>(filled_ - 1) : 0.0; }

private:
    double back(std::size_t k) const {  // k pushes ago, clamped to history
        const std::size_t avail = filled_ - 1;
        if (k > avail) k = avail;
        return buf_[(head_ + buf_.size() - 1 - k) % buf_.size()];
    }

    double dt_ = 1.0;
    std::vector<double> buf_{0.0, 0.0};
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
};

}  // namespace ncs
