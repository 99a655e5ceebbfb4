#pragma once

#include <stdexcept>
#include <string>

namespace ncs {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoOscillatoryMode : Error {
    NoOscillatoryMode() : Error("spectrum contains no complex-conjugate pair") {}
};

struct SingularAtFrequency : Error {
    explicit SingularAtFrequency(double omega)
        : Error("frequency response singular at omega = " + std::to_string(omega)) {}
};

struct NotControllable : Error {
    explicit NotControllable(long rank)
        : Error("system not controllable (rank " + std::to_string(rank) + ")") {}
};

struct NotObservable : Error {
    explicit NotObservable(long rank)
        : Error("system not observable (rank " + std::to_string(rank) + ")") {}
};

struct IllConditioned : Error {
    using Error::Error;
};

struct NonFinite : Error {
    explicit NonFinite(long step)
        : Error("state left the finite range at step " + std::to_string(step)) {}
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace ncs
