#pragma once

#include <array>
#include <cmath>
#include <cassert>
#include <initializer_list>
#include <vector>

namespace setreg {

// Fixed-capacity vector for points in R^n. Dimensions stay tiny (n <= 16:
// scenes live in R^1..R^3, product-mapping graphs in R^{n+m*n}), so a stack
// array avoids allocations in the estimator hot loops.
class Vec {
  public:
    static constexpr int kMaxDim = 16;

    Vec() = default;
    explicit Vec(int n) : n_(n) { assert(n >= 0 && n <= kMaxDim); }
    Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
        assert(n_ <= kMaxDim);
        int i = 0;
        for (double x : xs) v_[i++] = x;
    }
    static Vec zeros(int n) { return Vec(n); }
    static Vec from(const std::vector<double>& xs) {
        Vec v(static_cast<int>(xs.size()));
        for (int i = 0; i < v.n_; ++i) v.v_[i] = xs[i];
        return v;
    }

    int size() const { return n_; }
    double& operator[](int i) { return v_[i]; }
    double operator[](int i) const { return v_[i]; }
    const double* data() const { return v_.data(); }
    double* data() { return v_.data(); }

    std::vector<double> to_std() const { return {v_.begin(), v_.begin() + n_}; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double t) {
        for (int i = 0; i < n_; ++i) v_[i] *= t;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double t, Vec a) { return a *= t; }
    friend Vec operator*(Vec a, double t) { return a *= t; }
    friend Vec operator-(Vec a) { return a *= -1.0; }

    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

  private:
    std::array<double, kMaxDim> v_{};
    int n_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) {
    return std::sqrt(dot(a, a));
}

inline double dist2(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Concatenate (x, y) into a single point of R^{|x|+|y|}.
inline Vec concat(const Vec& x, const Vec& y) {
    Vec r(x.size() + y.size());
    for (int i = 0; i < x.size(); ++i) r[i] = x[i];
    for (int i = 0; i < y.size(); ++i) r[x.size() + i] = y[i];
    return r;
}

inline Vec slice(const Vec& x, int offset, int len) {
    Vec r(len);
    for (int i = 0; i < len; ++i) r[i] = x[offset + i];
    return r;
}

inline Vec normalized(const Vec& a) {
    double n = norm2(a);
    assert(n > 0);
    return (1.0 / n) * a;
}

}  // namespace setreg
