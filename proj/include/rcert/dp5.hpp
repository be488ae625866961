#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

namespace rcert {

/// Dormand-Prince 5(4) stepper with PI step-size control and the
/// continuous extension of Hairer & Wanner (dopri5). N is the system size.
template <std::size_t N>
class DormandPrince {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<State(double, const State&)>;

    struct Tolerance {
        double rel = 1e-10;
        double abs = 1e-12;
        /// Error per unit step: the estimate is divided by min(h / unit, 1)
        /// before it is compared with the tolerance. Global error then shrinks
        /// like tol^(5/4) instead of tol.
        bool per_unit_step = true;
        /// Length the step is measured against; callers pass the span.
        double unit = 1.0;
    };

    /// Coefficients of the dense interpolant over one accepted step.
    struct Dense {
        double t0 = 0.0;
        double h = 0.0;
        std::array<State, 5> r{};

        State operator()(double t) const {
            const double s = h == 0.0 ? 0.0 : (t - t0) / h;
            const double s1 = 1.0 - s;
            State y{};
            for (std::size_t i = 0; i < N; ++i) {
                y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
            }
            return y;
        }
    };

    enum class Outcome { Accepted, Rejected };

    DormandPrince(Rhs f, Tolerance tol) : f_(std::move(f)), tol_(tol) {}

    /// Starting step from the Hairer-Norsett-Wanner heuristic.
    double initial_step(double t, const State& y, double h_max) {
        const State f0 = f_(t, y);
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = tol_.abs + tol_.rel * std::abs(y[i]);
            d0 += sq(y[i] / sc);
            d1 += sq(f0[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, h_max);
        State y1{};
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h0 * f0[i];
        const State f1 = f_(t + h0, y1);
        double d2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = tol_.abs + tol_.rel * std::abs(y[i]);
            d2 += sq((f1[i] - f0[i]) / sc);
        }
        d2 = std::sqrt(d2 / N) / h0;
        const double m = std::max(d1, d2);
        const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
        fsal_ = f0;
        have_fsal_ = true;
        return std::min({100.0 * h0, h1, h_max});
    }

    /// Attempts one step of size h from (t, y). On acceptance y is advanced,
    /// `dense` describes the step and h holds the proposed next size; on
    /// rejection only h changes.
    Outcome step(double& t, State& y, double& h, Dense& dense) {
        if (!have_fsal_) {
            fsal_ = f_(t, y);
            have_fsal_ = true;
        }
        const State& k1 = fsal_;
        State tmp{};
        auto stage = [&](std::initializer_list<std::pair<const State*, double>> terms) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                for (const auto& [k, a] : terms) acc += a * (*k)[i];
                tmp[i] = y[i] + h * acc;
            }
            return tmp;
        };
        const State k2 = f_(t + c2 * h, stage({{&k1, a21}}));
        const State k3 = f_(t + c3 * h, stage({{&k1, a31}, {&k2, a32}}));
        const State k4 = f_(t + c4 * h, stage({{&k1, a41}, {&k2, a42}, {&k3, a43}}));
        const State k5 = f_(t + c5 * h, stage({{&k1, a51}, {&k2, a52}, {&k3, a53}, {&k4, a54}}));
        const State k6 =
            f_(t + h, stage({{&k1, a61}, {&k2, a62}, {&k3, a63}, {&k4, a64}, {&k5, a65}}));
        const State y1 = stage({{&k1, a71}, {&k3, a73}, {&k4, a74}, {&k5, a75}, {&k6, a76}});
        const double t1 = t + h;
        const State k7 = f_(t1, y1);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = tol_.abs + tol_.rel * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += sq(e / sc);
            finite = finite && std::isfinite(y1[i]) && std::isfinite(k7[i]);
        }
        err = finite ? std::sqrt(err / N) : std::numeric_limits<double>::infinity();
        if (tol_.per_unit_step) err /= std::min(std::abs(h) / tol_.unit, 1.0);

        const double fac11 = std::pow(err, expo1());
        if (err <= 1.0) {
            double fac = fac11 / std::pow(facold_, kBeta);
            fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
            facold_ = std::max(err, 1e-4);
            dense.t0 = t;
            dense.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                dense.r[0][i] = y[i];
                dense.r[1][i] = ydiff;
                dense.r[2][i] = bspl;
                dense.r[3][i] = ydiff - h * k7[i] - bspl;
                dense.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                     d6 * k6[i] + d7 * k7[i]);
            }
            double hnew = h / fac;
            if (last_rejected_) hnew = std::min(hnew, h);
            last_rejected_ = false;
            t = t1;
            y = y1;
            fsal_ = k7;
            h = hnew;
            last_error_ = err;
            return Outcome::Accepted;
        }
        const double shrink = std::isfinite(fac11) ? std::min(1.0 / kFacMin, fac11 / kSafe) : 10.0;
        h = h / shrink;
        last_rejected_ = true;
        last_error_ = err;
        return Outcome::Rejected;
    }

    double last_error() const noexcept { return last_error_; }
    const State& derivative() const noexcept { return fsal_; }

private:
    static double sq(double x) { return x * x; }
    double expo1() const { return (tol_.per_unit_step ? 0.25 : 0.2) - kBeta * 0.75; }

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    static constexpr double kBeta = 0.04;
    static constexpr double kSafe = 0.9;
    static constexpr double kFacMin = 0.2;
    static constexpr double kFacMax = 10.0;

    Rhs f_;
    Tolerance tol_;
    State fsal_{};
    bool have_fsal_ = false;
    bool last_rejected_ = false;
    double facold_ = 1e-4;
    double last_error_ = 0.0;
};

}  // namespace rcert
