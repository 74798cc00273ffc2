#pragma once

#include <array>
#include <cmath>

namespace fanbeam {

/// Forward-mode dual number carrying N directional derivatives. Only the
/// operations the ray tracer needs are provided.
template <int N>
struct Jet {
    double v = 0.0;
    std::array<double, N> d{};

    Jet() = default;
    Jet(double value) : v(value) {} // NOLINT(google-explicit-constructor)

    static Jet variable(double value, int slot) {
        Jet j(value);
        j.d[slot] = 1.0;
        return j;
    }

    Jet& operator+=(const Jet& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Jet& operator*=(const Jet& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Jet& operator/=(const Jet& o) {
        const double inv = 1.0 / o.v;
        for (int i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
        v *= inv;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
    friend Jet operator/(Jet a, const Jet& b) { return a /= b; }
    friend Jet operator*(Jet a, double s) {
        a.v *= s;
        for (auto& x : a.d) x *= s;
        return a;
    }
    friend Jet operator*(double s, Jet a) { return a * s; }
    friend Jet operator+(Jet a, double s) {
        a.v += s;
        return a;
    }
    friend Jet operator+(double s, Jet a) { return a + s; }
    friend Jet operator-(Jet a, double s) {
        a.v -= s;
        return a;
    }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator-(Jet a) {
        a.v = -a.v;
        for (auto& x : a.d) x = -x;
        return a;
    }
};

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) { return x.v; }

template <int N>
Jet<N> sqrt(const Jet<N>& x) {
    Jet<N> r(std::sqrt(x.v));
    const double scale = 0.5 / r.v;
    for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * scale;
    return r;
}

template <int N>
Jet<N> sin(const Jet<N>& x) {
    Jet<N> r(std::sin(x.v));
    const double c = std::cos(x.v);
    for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * c;
    return r;
}

template <int N>
Jet<N> cos(const Jet<N>& x) {
    Jet<N> r(std::cos(x.v));
    const double s = -std::sin(x.v);
    for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * s;
    return r;
}

} // namespace fanbeam
