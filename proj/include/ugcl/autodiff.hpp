#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ugcl/errors.hpp"

namespace ugcl {

// Scalar reverse-mode differentiation. A Tape owns an append-only sequence of
// nodes in topological order (parents always precede children); Var is a thin
// handle carrying the value plus the node index. Vars built from plain doubles
// are constants and record nothing, which lets templated geometry code mix
// literals and tracked values freely — constant subexpressions fold away.
namespace ad {

class Tape;

class Var {
  public:
    Var() = default;
    Var(double value) : value_(value) {}  // NOLINT: implicit constant lift

    double value() const { return value_; }
    bool tracked() const { return tape_ != nullptr; }
    std::int32_t index() const { return index_; }
    Tape* tape() const { return tape_; }

  private:
    friend class Tape;
    Var(double value, Tape* tape, std::int32_t index) : value_(value), tape_(tape), index_(index) {}

    double value_ = 0.0;
    Tape* tape_ = nullptr;
    std::int32_t index_ = -1;
};

class Tape {
  public:
    // Tracked input; its adjoint is read back after gradient().
    Var leaf(double value) {
        nodes_.push_back(Node{0.0, 0.0, kNone, kNone});
        return Var(value, this, static_cast<std::int32_t>(nodes_.size() - 1));
    }

    std::size_t size() const { return nodes_.size(); }

    // Keeps capacity so per-iteration reuse does not reallocate.
    void reset() { nodes_.clear(); }

    Var record1(double value, const Var& a, double da) {
        assert(a.tracked() && a.tape() == this);
        nodes_.push_back(Node{da, 0.0, a.index(), kNone});
        return Var(value, this, static_cast<std::int32_t>(nodes_.size() - 1));
    }

    Var record2(double value, const Var& a, double da, const Var& b, double db) {
        assert(a.tracked() && b.tracked() && a.tape() == this && b.tape() == this);
        nodes_.push_back(Node{da, db, a.index(), b.index()});
        return Var(value, this, static_cast<std::int32_t>(nodes_.size() - 1));
    }

    // Reverse sweep from `seed` (seed adjoint 1). Returns the adjoint of every
    // node; the entry at a leaf's index is d(seed)/d(leaf).
    std::vector<double> gradient(const Var& seed) const {
        assert(seed.tracked() && seed.tape() == this);
        std::vector<double> adjoint(nodes_.size(), 0.0);
        adjoint[static_cast<std::size_t>(seed.index())] = 1.0;
        for (std::int32_t i = seed.index(); i >= 0; --i) {
            const double a = adjoint[static_cast<std::size_t>(i)];
            if (a == 0.0) continue;
            const Node& n = nodes_[static_cast<std::size_t>(i)];
            if (n.p0 != kNone) adjoint[static_cast<std::size_t>(n.p0)] += n.w0 * a;
            if (n.p1 != kNone) adjoint[static_cast<std::size_t>(n.p1)] += n.w1 * a;
        }
        return adjoint;
    }

  private:
    static constexpr std::int32_t kNone = -1;
    struct Node {
        double w0, w1;          // local partials
        std::int32_t p0, p1;    // parent indices, kNone when unused
    };
    std::vector<Node> nodes_;
};

inline Tape* common_tape(const Var& a, const Var& b) {
    if (a.tracked() && b.tracked()) {
        assert(a.tape() == b.tape());
        return a.tape();
    }
    return a.tracked() ? a.tape() : b.tape();
}

inline Var operator+(const Var& a, const Var& b) {
    const double v = a.value() + b.value();
    Tape* t = common_tape(a, b);
    if (!t) return Var(v);
    if (a.tracked() && b.tracked()) return t->record2(v, a, 1.0, b, 1.0);
    return t->record1(v, a.tracked() ? a : b, 1.0);
}

inline Var operator-(const Var& a, const Var& b) {
    const double v = a.value() - b.value();
    Tape* t = common_tape(a, b);
    if (!t) return Var(v);
    if (a.tracked() && b.tracked()) return t->record2(v, a, 1.0, b, -1.0);
    if (a.tracked()) return t->record1(v, a, 1.0);
    return t->record1(v, b, -1.0);
}

inline Var operator-(const Var& a) {
    if (!a.tracked()) return Var(-a.value());
    return a.tape()->record1(-a.value(), a, -1.0);
}

inline Var operator*(const Var& a, const Var& b) {
    const double v = a.value() * b.value();
    Tape* t = common_tape(a, b);
    if (!t) return Var(v);
    if (a.tracked() && b.tracked()) return t->record2(v, a, b.value(), b, a.value());
    if (a.tracked()) return t->record1(v, a, b.value());
    return t->record1(v, b, a.value());
}

inline Var operator/(const Var& a, const Var& b) {
    if (std::abs(b.value()) < 1e-300) throw DivisionByZero();
    const double v = a.value() / b.value();
    Tape* t = common_tape(a, b);
    if (!t) return Var(v);
    const double inv = 1.0 / b.value();
    if (a.tracked() && b.tracked()) return t->record2(v, a, inv, b, -v * inv);
    if (a.tracked()) return t->record1(v, a, inv);
    return t->record1(v, b, -v * inv);
}

inline Var sin(const Var& a) {
    const double v = std::sin(a.value());
    if (!a.tracked()) return Var(v);
    return a.tape()->record1(v, a, std::cos(a.value()));
}

inline Var cos(const Var& a) {
    const double v = std::cos(a.value());
    if (!a.tracked()) return Var(v);
    return a.tape()->record1(v, a, -std::sin(a.value()));
}

// Subgradient 0 at the kink.
inline Var abs(const Var& a) {
    const double x = a.value();
    const double v = std::abs(x);
    if (!a.tracked()) return Var(v);
    const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    return a.tape()->record1(v, a, sign);
}

// Partial forced to 0 at the origin so exactly-zero residuals (orthonormal
// rotations) do not inject inf*0 into the reverse sweep.
inline Var sqrt(const Var& a) {
    const double v = std::sqrt(a.value());
    if (!a.tracked()) return Var(v);
    const double dv = a.value() > 0.0 ? 0.5 / v : 0.0;
    return a.tape()->record1(v, a, dv);
}

inline double sigmoid_value(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline Var sigmoid(const Var& a) {
    const double s = sigmoid_value(a.value());
    if (!a.tracked()) return Var(s);
    return a.tape()->record1(s, a, s * (1.0 - s));
}

inline Var tanh(const Var& a) {
    // 2*sigma(2x) - 1, composed from the core op set.
    return sigmoid(a * Var(2.0)) * Var(2.0) - Var(1.0);
}

inline double value_of(const Var& v) { return v.value(); }

}  // namespace ad

inline double value_of(double v) { return v; }
inline double sigmoid(double x) { return ad::sigmoid_value(x); }

}  // namespace ugcl
