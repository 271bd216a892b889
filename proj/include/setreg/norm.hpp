#pragma once

#include <algorithm>
#include <vector>

#include "setreg/vec.hpp"

namespace setreg {

// Norm on R^n of "maximum type": the space is split into contiguous blocks,
// each block carries the Euclidean norm, and the full norm is the max over
// blocks. A single block is the plain Euclidean norm; the blocks of a
// product space X^m give max_i ||x_i||. The dual norm is the sum of block
// norms.
class Norm {
  public:
    Norm() = default;
    static Norm euclidean(int dim) { return Norm({dim}); }
    explicit Norm(std::vector<int> block_sizes) {
        int off = 0;
        for (int s : block_sizes) {
            offs_.push_back(off);
            lens_.push_back(s);
            off += s;
        }
        dim_ = off;
    }

    int dim() const { return dim_; }
    int blocks() const { return static_cast<int>(offs_.size()); }
    int block_offset(int b) const { return offs_[b]; }
    int block_len(int b) const { return lens_[b]; }
    bool is_euclidean() const { return blocks() <= 1; }

    double block_norm(const Vec& v, int b) const {
        double s = 0;
        for (int i = offs_[b]; i < offs_[b] + lens_[b]; ++i) s += v[i] * v[i];
        return std::sqrt(s);
    }

    double operator()(const Vec& v) const {
        if (is_euclidean()) return norm2(v);
        double m = 0;
        for (int b = 0; b < blocks(); ++b) m = std::max(m, block_norm(v, b));
        return m;
    }

    double dual(const Vec& v) const {
        if (is_euclidean()) return norm2(v);
        double s = 0;
        for (int b = 0; b < blocks(); ++b) s += block_norm(v, b);
        return s;
    }

    double dist(const Vec& a, const Vec& b) const { return (*this)(a - b); }

    // Clamp a point into the ball B_r(c): blocks of v-c that exceed r are
    // scaled back to radius r. The result is a ball member (not necessarily
    // the nearest one), which is all the samplers need.
    Vec clamp_to_ball(const Vec& v, const Vec& c, double r) const {
        Vec d = v - c;
        if (is_euclidean()) {
            double n = norm2(d);
            if (n <= r) return v;
            return c + (r / n) * d;
        }
        Vec out = v;
        for (int b = 0; b < blocks(); ++b) {
            double n = block_norm(d, b);
            if (n > r && n > 0) {
                double t = r / n;
                for (int i = offs_[b]; i < offs_[b] + lens_[b]; ++i)
                    out[i] = c[i] + t * d[i];
            }
        }
        return out;
    }

    // Concatenate two block structures (used to build X x Y norms).
    static Norm product(const Norm& a, const Norm& b) {
        std::vector<int> sizes;
        for (int i = 0; i < a.blocks(); ++i) sizes.push_back(a.block_len(i));
        for (int i = 0; i < b.blocks(); ++i) sizes.push_back(b.block_len(i));
        return Norm(sizes);
    }

  private:
    std::vector<int> offs_, lens_;
    int dim_ = 0;
};

}  // namespace setreg
